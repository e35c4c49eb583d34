"""
FermiSplit - Edge Spectral Module
Fundamental solutions of -u'' + (q - lambda) u = 0 on one edge at complex energy,
and the spectral objects built from them: transfer and Dirichlet-to-Neumann
matrices, the asymmetry functions a and b, Dirichlet eigenvalues and identity checks
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import NotABranchPointError, NumericalOverflowError, PoleError
from .potential import Potential, discretize, lower_bound, reflect
from .roots import ComplexRegion, find_roots

DEFAULT_SLICES = 1024
DIRICHLET_GUARD = 1e-8
BRANCH_TOL = 1e-8
FD_STEP = 1e-5

# Matrices per vectorized chunk when propagating many energies at once
_CHUNK_MATRICES = 1 << 17

# Fixed grid on which asymmetry classes are compared
DEFAULT_CLASS_GRID = (
    -7.5 + 0j, -1.2 + 0j, 0.7 + 0j, 2.9 + 0j, 5.3 + 0j, 8.1 + 0j, 12.6 + 0j,
    1.5 + 2.5j, -3.0 + 1.0j, 6.0 - 4.0j, 10.0 + 3.0j, 0.4 - 6.0j,
)

Matrix2 = np.ndarray


@dataclass(frozen=True)
class EdgeSpectral:
    """
    Endpoint spectral data of one edge at energy lam

    c, s are the fundamental solutions at x = L, c_prime and s_prime their
    x-derivatives there. s_prime equals c of the reflected potential.
    """
    lam: complex
    c: complex
    s: complex
    c_prime: complex
    s_prime: complex
    a: complex
    b: complex

    @classmethod
    def from_propagator(cls, lam: complex, prop: np.ndarray) -> 'EdgeSpectral':
        c, s = complex(prop[0, 0]), complex(prop[0, 1])
        c_prime, s_prime = complex(prop[1, 0]), complex(prop[1, 1])
        return cls(lam=complex(lam), c=c, s=s, c_prime=c_prime, s_prime=s_prime,
                   a=0.5 * (c - s_prime), b=0.5 * (c + s_prime))

    @property
    def wronskian_residual(self) -> float:
        return abs(self.c * self.s_prime - self.s * self.c_prime - 1.0)

    def transfer(self) -> Matrix2:
        return np.array([[self.c, self.s], [-self.c_prime, -self.s_prime]], dtype=complex)

    def dtn(self, guard: float = DIRICHLET_GUARD, edge: Optional[str] = None) -> Matrix2:
        if abs(self.s) <= guard:
            raise PoleError(abs(self.s), edge)
        return np.array([[-self.c, 1.0], [1.0, -self.s_prime]], dtype=complex) / self.s

    def to_dict(self) -> Dict:
        return {
            'lambda': self.lam, 'c': self.c, 's': self.s, 'c_prime': self.c_prime,
            's_prime': self.s_prime, 'a': self.a, 'b': self.b,
        }


@dataclass
class SolutionTrace:
    """
    Interior values of the fundamental solutions

    The grid holds every slice boundary and every slice midpoint, so each slice
    carries three samples for Simpson quadrature. c_tilde_values is the c-solution
    of the reflected potential on the same grid.
    """
    grid: np.ndarray
    c_values: np.ndarray
    s_values: np.ndarray
    c_tilde_values: np.ndarray
    slice_potential: np.ndarray
    reflected_potential: np.ndarray
    psi_values: Optional[np.ndarray] = None

    def slice_integral(self, integrand: np.ndarray, weights: Optional[np.ndarray] = None) -> complex:
        """Sum over slices of weight_k times the Simpson integral of integrand on slice k"""
        widths = self.grid[2::2] - self.grid[:-2:2]
        simpson = widths / 6.0 * (integrand[:-2:2] + 4.0 * integrand[1::2] + integrand[2::2])
        if weights is not None:
            simpson = simpson * weights
        return complex(np.sum(simpson))


# ---- propagation ----

def _slice_propagators(z: np.ndarray, widths: np.ndarray) -> np.ndarray:
    """
    Exact propagators of (u, u') across slices of constant potential

    Args:
        z: lambda - qbar per slice (broadcastable against widths)
        widths: Slice widths

    Returns:
        Array of shape z.shape + (2, 2)
    """
    z = np.asarray(z, dtype=complex)
    k = np.sqrt(z)
    # cos(k h) and sin(k h)/k are even in k, so the branch of sqrt is irrelevant
    cos_kh = np.cos(k * widths)
    sinc_kh = widths * np.sinc(k * widths / np.pi)
    mats = np.empty(np.broadcast(z, widths).shape + (2, 2), dtype=complex)
    mats[..., 0, 0] = cos_kh
    mats[..., 0, 1] = sinc_kh
    mats[..., 1, 0] = -z * sinc_kh
    mats[..., 1, 1] = cos_kh
    return mats


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """Product M_n ... M_2 M_1 over axis -3 by pairwise reduction"""
    while mats.shape[-3] > 1:
        if mats.shape[-3] % 2:
            eye = np.broadcast_to(np.eye(2, dtype=complex), mats.shape[:-3] + (1, 2, 2))
            mats = np.concatenate([mats, eye], axis=-3)
        mats = mats[..., 1::2, :, :] @ mats[..., 0::2, :, :]
    return mats[..., 0, :, :]


@lru_cache(maxsize=256)
def _grid(p: Potential, slices: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, qbar = discretize(p, slices)
    nodes.setflags(write=False)
    qbar.setflags(write=False)
    return nodes, qbar


def endpoint_propagators(p: Potential, lams, slices: int = DEFAULT_SLICES) -> np.ndarray:
    """
    Cauchy propagators [[c, s], [c', s']] for many energies

    Non-finite entries are returned as they are; callers decide whether to raise.

    Args:
        p: Edge potential
        lams: Array of complex energies
        slices: Slice count

    Returns:
        Array of shape lams.shape + (2, 2)
    """
    lams = np.asarray(lams, dtype=complex)
    flat = lams.ravel()
    nodes, qbar = _grid(p, slices)
    widths = np.diff(nodes)
    chunk = max(1, _CHUNK_MATRICES // len(widths))
    out = np.empty((len(flat), 2, 2), dtype=complex)
    with np.errstate(over='ignore', invalid='ignore'):
        for start in range(0, len(flat), chunk):
            part = flat[start:start + chunk]
            mats = _slice_propagators(part[:, None] - qbar[None, :], widths[None, :])
            out[start:start + chunk] = _ordered_product(mats)
    return out.reshape(lams.shape + (2, 2))


@lru_cache(maxsize=8192)
def edge_data(p: Potential, lam: complex, slices: int = DEFAULT_SLICES) -> EdgeSpectral:
    """
    Endpoint spectral data (cached per potential, energy and slice count)

    Raises:
        NumericalOverflowError: Non-finite propagator entries
    """
    prop = endpoint_propagators(p, np.array([lam]), slices)[0]
    if not np.all(np.isfinite(prop)):
        raise NumericalOverflowError(f"propagation overflow for {p} at lambda={lam}")
    return EdgeSpectral.from_propagator(lam, prop)


def a_values(p: Potential, lams, slices: int = DEFAULT_SLICES) -> np.ndarray:
    """Vectorized a(lambda) = (c - s')/2"""
    prop = endpoint_propagators(p, lams, slices)
    return 0.5 * (prop[..., 0, 0] - prop[..., 1, 1])


def _cumulative(mats: np.ndarray) -> np.ndarray:
    prefix = np.empty((mats.shape[0] + 1, 2, 2), dtype=complex)
    prefix[0] = np.eye(2)
    for j, m in enumerate(mats):
        prefix[j + 1] = m @ prefix[j]
    return prefix


def _half_slice_prefix(lam: complex, nodes: np.ndarray, qbar: np.ndarray) -> np.ndarray:
    half = np.repeat(np.diff(nodes) / 2.0, 2)
    return _cumulative(_slice_propagators(lam - np.repeat(qbar, 2), half))


def fundamental_solutions(p: Potential, lam: complex,
                          slices: int = DEFAULT_SLICES) -> Tuple[EdgeSpectral, SolutionTrace]:
    """
    Integrate the fundamental pair c, s across the edge and record interior values

    Args:
        p: Edge potential
        lam: Complex energy
        slices: Approximate number of slices (breakpoints are always slice boundaries)

    Returns:
        (EdgeSpectral at x = L, SolutionTrace on the half-slice grid)

    Raises:
        NumericalOverflowError: Non-finite intermediate values
    """
    lam = complex(lam)
    nodes, qbar = _grid(p, slices)
    r_nodes, r_qbar = _grid(reflect(p), slices)

    prefix = _half_slice_prefix(lam, nodes, qbar)
    r_prefix = _half_slice_prefix(lam, r_nodes, r_qbar)
    if not (np.all(np.isfinite(prefix)) and np.all(np.isfinite(r_prefix))):
        raise NumericalOverflowError(f"propagation overflow for {p} at lambda={lam}")

    grid = np.empty(2 * len(qbar) + 1)
    grid[0::2] = nodes
    grid[1::2] = 0.5 * (nodes[:-1] + nodes[1:])
    trace = SolutionTrace(grid=grid, c_values=prefix[:, 0, 0], s_values=prefix[:, 0, 1],
                          c_tilde_values=r_prefix[:, 0, 0], slice_potential=np.array(qbar),
                          reflected_potential=np.array(r_qbar))
    return EdgeSpectral.from_propagator(lam, prefix[-1]), trace


# ---- single-edge operations ----

def transfer_matrix(p: Potential, lam: complex, slices: int = DEFAULT_SLICES) -> Matrix2:
    """T_q(lambda) = [[c, s], [-c', -s']] in the inward-derivative convention"""
    return edge_data(p, complex(lam), slices).transfer()


def dtn_matrix(p: Potential, lam: complex, slices: int = DEFAULT_SLICES,
               guard: float = DIRICHLET_GUARD) -> Matrix2:
    """
    Dirichlet-to-Neumann matrix G_q(lambda) = (1/s) [[-c, 1], [1, -s']]

    Raises:
        PoleError: |s(lambda)| <= guard
    """
    return edge_data(p, complex(lam), slices).dtn(guard)


def a_function(p: Potential, lam: complex, slices: int = DEFAULT_SLICES) -> complex:
    return edge_data(p, complex(lam), slices).a


def b_function(p: Potential, lam: complex, slices: int = DEFAULT_SLICES) -> complex:
    return edge_data(p, complex(lam), slices).b


def dirichlet_eigenvalues(p: Potential, lambda_max: float,
                          slices: int = DEFAULT_SLICES) -> List[float]:
    """
    Real roots of s(lambda) up to lambda_max, ascending

    Sign changes of s on a fine real grid are bracketed and refined with brentq.
    """
    start = lower_bound(p)
    if lambda_max < start:
        return []
    step = min(0.25, math.pi ** 2 / (40.0 * p.length ** 2))
    count = int(math.ceil((lambda_max - start) / step)) + 1
    grid = np.linspace(start, lambda_max, max(count, 2))
    s_grid = endpoint_propagators(p, grid, slices)[:, 0, 1].real

    def s_real(lam: float) -> float:
        return edge_data(p, complex(lam), slices).s.real

    roots = [float(grid[i]) for i in np.nonzero(s_grid == 0.0)[0]]
    for i in np.nonzero(s_grid[:-1] * s_grid[1:] < 0)[0]:
        roots.append(brentq(s_real, grid[i], grid[i + 1], xtol=1e-13, rtol=1e-15))
    return sorted(roots)


def same_asymmetry_class(p1: Potential, p2: Potential,
                         lambda_grid: Sequence[complex] = DEFAULT_CLASS_GRID,
                         tol: float = 1e-8, slices: int = DEFAULT_SLICES) -> bool:
    """True iff |a_1 - a_2| <= tol at every grid energy"""
    grid = np.asarray(list(lambda_grid), dtype=complex)
    if grid.size == 0:
        raise ValueError("lambda grid must not be empty")
    diff = np.abs(a_values(p1, grid, slices) - a_values(p2, grid, slices))
    return bool(np.all(diff <= tol))


@dataclass
class CsRelationReport:
    """Residuals of s = s~, c' = c~', c = s~', s' = c~ from independent integrations"""
    s_minus_s_tilde: float
    cprime_minus_cprime_tilde: float
    c_minus_s_tilde_prime: float
    s_prime_minus_c_tilde: float

    @property
    def max_residual(self) -> float:
        return max(self.s_minus_s_tilde, self.cprime_minus_cprime_tilde,
                   self.c_minus_s_tilde_prime, self.s_prime_minus_c_tilde)

    def to_dict(self) -> Dict:
        return {
            's_minus_s_tilde': self.s_minus_s_tilde,
            'cprime_minus_cprime_tilde': self.cprime_minus_cprime_tilde,
            'c_minus_s_tilde_prime': self.c_minus_s_tilde_prime,
            's_prime_minus_c_tilde': self.s_prime_minus_c_tilde,
        }


def check_csrelations(p: Potential, lam: complex, slices: int = DEFAULT_SLICES) -> CsRelationReport:
    e = edge_data(p, complex(lam), slices)
    r = edge_data(reflect(p), complex(lam), slices)
    return CsRelationReport(
        s_minus_s_tilde=abs(e.s - r.s),
        cprime_minus_cprime_tilde=abs(e.c_prime - r.c_prime),
        c_minus_s_tilde_prime=abs(e.c - r.s_prime),
        s_prime_minus_c_tilde=abs(e.s_prime - r.c),
    )


def check_intqcc(p: Potential, lam: complex, slices: int = DEFAULT_SLICES) -> float:
    """
    Residual of c'(lambda) a(lambda) = -integral of q_-(x) c(x) c~(x) over the edge

    q_- is the odd part of the slice potential, c~ the c-solution of the reflected
    potential. Quadrature is Simpson per slice.
    """
    spectral, trace = fundamental_solutions(p, lam, slices)
    odd = 0.5 * (trace.slice_potential - trace.reflected_potential)
    integral = trace.slice_integral(trace.c_values * trace.c_tilde_values, odd)
    return abs(spectral.c_prime * spectral.a + integral)


def _branch_eigensolution(p: Potential, lam0: complex,
                          slices: int) -> Tuple[EdgeSpectral, SolutionTrace, complex]:
    spectral, trace = fundamental_solutions(p, lam0, slices)
    if abs(spectral.a ** 2 + 1.0) >= BRANCH_TOL:
        raise NotABranchPointError(
            f"|a^2 + 1| = {abs(spectral.a ** 2 + 1.0):.3e} at lambda={lam0} is not a ramification point")
    # psi(0) = 1, psi'(0) = -b/s
    slope = -spectral.b / spectral.s
    trace.psi_values = trace.c_values + slope * trace.s_values
    return spectral, trace, trace.slice_integral(trace.psi_values ** 2)


def a_derivative_at_branch(p: Potential, lam0: complex,
                           slices: int = DEFAULT_SLICES) -> Tuple[complex, complex]:
    """
    a'(lambda0) at a ramification point, two ways

    Returns:
        (formula_value, fd_value): -(s/2) * integral of psi^2, and a central
        finite difference of a with step 1e-5

    Raises:
        NotABranchPointError: |a(lambda0)^2 + 1| >= 1e-8
    """
    lam0 = complex(lam0)
    spectral, _, integral = _branch_eigensolution(p, lam0, slices)
    formula = -0.5 * spectral.s * integral
    lams = np.array([lam0 + FD_STEP, lam0 - FD_STEP])
    a_pair = a_values(p, lams, slices)
    fd = (a_pair[0] - a_pair[1]) / (2.0 * FD_STEP)
    return complex(formula), complex(fd)


def genericity_check(p: Potential, region: ComplexRegion,
                     slices: int = DEFAULT_SLICES, grid: int = 20) -> List[Tuple[complex, complex]]:
    """
    Roots of a^2 + 1 in a region with the integral of psi^2 at each

    Returns:
        List of (lambda0, integral of psi^2), sorted by real then imaginary part
    """
    def func(lams: np.ndarray) -> np.ndarray:
        return a_values(p, lams, slices) ** 2 + 1.0

    entries = []
    for lam0, _ in find_roots(func, region, grid=grid, tol=BRANCH_TOL):
        if abs(lam0.imag) == 0.0:
            raise AssertionError(f"real root of a^2 + 1 at {lam0}")
        _, _, integral = _branch_eigensolution(p, lam0, slices)
        entries.append((lam0, integral))
    return entries


def genericity_holds(entries: Sequence[Tuple[complex, complex]], threshold: float = 1e-8) -> bool:
    return any(abs(integral) > threshold for _, integral in entries)
