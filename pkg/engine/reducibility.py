"""
FermiSplit - Reducibility Module
Factorization of bilayer dispersion polynomials: same-class splitting, decorated
layer equivalence, the bipartite composite-variable reduction and the
irreducibility discriminant of the double-square lattice
"""

import cmath
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import null_space

from .edge_spectral import DEFAULT_SLICES, DIRICHLET_GUARD, EdgeSpectral, Matrix2, edge_data
from .errors import (NotSameClassError, PoleError, PreconditionError, RamificationError,
                     ShapeError)
from .floquet import dispersion_poly, reduced_matrix
from .graph_model import (BilayerSpec, EndCondition, PeriodicGraph, build_bilayer,
                          build_decorated_layer, connectors_same_class, is_symmetric,
                          layer_vertex)
from .laurent import LaurentPoly, lp_det, lp_residual, symmetry_residual, to_symmetric_basis
from .potential import Potential
from .riemann import mu_branches, principal_sqrt

DISTINCT_THRESHOLD = 1e-6
SQUARE_TEST_TOL = 1e-7
_TRIM = 1e-9


def _guarded(p: Potential, lam: complex, slices: int, guard: float, label: str) -> EdgeSpectral:
    data = edge_data(p, lam, slices)
    if abs(data.s) <= guard:
        raise PoleError(abs(data.s), label)
    return data


# ---- same-class factorization ----

@dataclass
class FactorReport:
    """D = d_plus * d_minus check for a bilayer with same-class connectors"""
    lam: complex
    mu: complex
    d_plus: LaurentPoly
    d_minus: LaurentPoly
    product_residual: float
    components_distinct: bool
    components_nonempty: Tuple[bool, bool]
    dispersion: Optional[LaurentPoly] = None

    def to_dict(self) -> Dict:
        return {
            'lambda': self.lam,
            'mu': self.mu,
            'd_plus': self.d_plus.to_records(),
            'd_minus': self.d_minus.to_records(),
            'product_residual': self.product_residual,
            'components_distinct': self.components_distinct,
            'components_nonempty': list(self.components_nonempty),
        }


def factor_same_class(spec: BilayerSpec, lam: complex, slices: int = DEFAULT_SLICES,
                      guard: float = DIRICHLET_GUARD, branch: int = 1,
                      class_tol: float = 1e-8) -> FactorReport:
    """
    Split the bilayer dispersion polynomial into det(A + D+) det(A + D-)

    D+- = diag((-b_v +- mu) / s_v) with mu the principal root of a^2 + 1 for the
    first connector (times branch).

    Raises:
        NotSameClassError: connectors are not all in one asymmetry class
        PoleError: lambda inside the Dirichlet guard
    """
    lam = complex(lam)
    if not connectors_same_class(spec, slices, class_tol):
        raise NotSameClassError("connector potentials belong to different asymmetry classes")
    full = dispersion_poly(build_bilayer(spec), lam, slices, guard)
    layer = reduced_matrix(spec.layer, lam, slices, guard)

    connectors = spec.connector_list()
    mu = branch * mu_branches(edge_data(connectors[0], lam, slices).a)[0]
    plus, minus = [], []
    for v, q in zip(spec.layer.vertex_ids, connectors):
        data = _guarded(q, lam, slices, guard, f"connector at {v}")
        plus.append((-data.b + mu) / data.s)
        minus.append((-data.b - mu) / data.s)

    d_plus = lp_det(layer.matrix.plus_diagonal(plus))
    d_minus = lp_det(layer.matrix.plus_diagonal(minus))
    return FactorReport(
        lam=lam,
        mu=mu,
        d_plus=d_plus,
        d_minus=d_minus,
        product_residual=lp_residual(full, d_plus * d_minus),
        components_distinct=lp_residual(d_plus, d_minus) > DISTINCT_THRESHOLD,
        components_nonempty=(d_plus.has_z_dependence(), d_minus.has_z_dependence()),
        dispersion=full,
    )


@dataclass
class DecoratedReport:
    """Residuals between decorated-layer dispersion polynomials and the factors"""
    lam: complex
    neumann_residual: float
    dirichlet_residual: float
    neumann_factor: str

    def to_dict(self) -> Dict:
        return {
            'lambda': self.lam,
            'neumann_residual': self.neumann_residual,
            'dirichlet_residual': self.dirichlet_residual,
            'neumann_factor': self.neumann_factor,
        }


def decorated_equivalence(layer: PeriodicGraph, connector: Potential, lam: complex,
                          slices: int = DEFAULT_SLICES,
                          guard: float = DIRICHLET_GUARD) -> DecoratedReport:
    """
    Compare Neumann- and Dirichlet-decorated layers with the factors d_plus, d_minus

    The matching of decorated graphs to factors is the one with the smaller
    residual sum.

    Raises:
        PreconditionError: connector is not symmetric
    """
    lam = complex(lam)
    neumann = build_decorated_layer(layer, connector, EndCondition.NEUMANN, slices)
    dirichlet = build_decorated_layer(layer, connector, EndCondition.DIRICHLET, slices)
    spec = BilayerSpec(layer, {v: connector for v in layer.vertex_ids})
    report = factor_same_class(spec, lam, slices, guard)
    p_neumann = dispersion_poly(neumann, lam, slices, guard)
    p_dirichlet = dispersion_poly(dirichlet, lam, slices, guard)

    straight = (lp_residual(p_neumann, report.d_plus), lp_residual(p_dirichlet, report.d_minus))
    crossed = (lp_residual(p_neumann, report.d_minus), lp_residual(p_dirichlet, report.d_plus))
    if sum(straight) <= sum(crossed):
        return DecoratedReport(lam, straight[0], straight[1], 'plus')
    return DecoratedReport(lam, crossed[0], crossed[1], 'minus')


# ---- bipartite two-vertex layers ----

@dataclass
class GrapheneReport:
    """
    Composite-variable reduction D = det(B1 B2 - w w' I)

    mode_subspaces[i] holds, for zeta_eigs[i], basis rows of the kernel family in
    vertex order (v1,1), (v1,2), (v2,1), (v2,2): [phi1, 0] and [0, phi2].
    """
    lam: complex
    B1: Matrix2
    B2: Matrix2
    R: Matrix2
    zeta_eigs: Tuple[complex, complex]
    coincident: bool
    quad_residual: float
    mode_subspaces: List[np.ndarray]
    w: LaurentPoly
    w_prime: LaurentPoly
    phi2: List[np.ndarray] = field(default_factory=list)

    def mode_vector(self, index: int, w_value: complex) -> np.ndarray:
        """Kernel vector [phi1, w phi2] of A(lambda, z) at any z with w(z) = w_value, w w' = zeta"""
        phi2 = self.phi2[index]
        return np.concatenate([-self.B2 @ phi2, w_value * phi2])

    def to_dict(self) -> Dict:
        return {
            'lambda': self.lam,
            'B1': self.B1.tolist(),
            'B2': self.B2.tolist(),
            'R': self.R.tolist(),
            'zeta_eigs': list(self.zeta_eigs),
            'coincident': self.coincident,
            'quad_residual': self.quad_residual,
            'mode_subspaces': [basis.tolist() for basis in self.mode_subspaces],
            'w': self.w.to_records(),
            'w_prime': self.w_prime.to_records(),
        }


def graphene_vertex_order(layer: PeriodicGraph) -> List[str]:
    v1, v2 = layer.vertex_ids
    return [layer_vertex(v1, 1), layer_vertex(v1, 2), layer_vertex(v2, 1), layer_vertex(v2, 2)]


def _check_bipartite(layer: PeriodicGraph):
    if len(layer.vertices) != 2:
        raise ShapeError(f"bipartite reduction needs a 2-vertex layer, got {len(layer.vertices)}")
    if layer.dangling:
        raise ShapeError("bipartite reduction does not support dangling edges")
    for i, e in enumerate(layer.edges):
        if e.tail == e.head:
            raise ShapeError(f"{e.label(i)} joins a vertex to itself; layer is not bipartite")


def _block(m: complex, data: EdgeSpectral) -> Matrix2:
    inv_s = 1.0 / data.s
    return np.array([[m - data.c * inv_s, inv_s], [inv_s, m - data.s_prime * inv_s]], dtype=complex)


def _kernel_basis(matrix: Matrix2) -> np.ndarray:
    basis = null_space(matrix, rcond=1e-8)
    if basis.shape[1] == 0:
        _, _, vh = np.linalg.svd(matrix)
        basis = vh[-1:].conj().T
    return basis


def graphene_reduction(spec: BilayerSpec, lam: complex, slices: int = DEFAULT_SLICES,
                       guard: float = DIRICHLET_GUARD) -> GrapheneReport:
    """
    Bipartite reduction of a bilayer over a 2-vertex layer

    Connectors may lie in different asymmetry classes.

    Raises:
        ShapeError: layer is not bipartite with two vertices
    """
    lam = complex(lam)
    layer = spec.layer
    _check_bipartite(layer)
    v1, v2 = layer.vertex_ids
    fm = reduced_matrix(layer, lam, slices, guard)
    m1, m2 = fm.entry(v1, v1), fm.entry(v2, v2)
    if m1.has_z_dependence() or m2.has_z_dependence():
        raise ShapeError("diagonal of a bipartite layer matrix must not depend on z")
    w, w_prime = fm.entry(v2, v1), fm.entry(v1, v2)

    B1 = _block(m1.constant_term, _guarded(spec.connectors[v1], lam, slices, guard, f"connector at {v1}"))
    B2 = _block(m2.constant_term, _guarded(spec.connectors[v2], lam, slices, guard, f"connector at {v2}"))
    R = B1 @ B2
    trace, det = R[0, 0] + R[1, 1], R[0, 0] * R[1, 1] - R[0, 1] * R[1, 0]
    root = principal_sqrt(trace * trace - 4.0 * det)
    zetas = (0.5 * (trace + root), 0.5 * (trace - root))
    coincident = abs(root) <= 1e-8 * max(1.0, abs(trace))

    ww = w * w_prime
    quadratic = ww * ww - ww * trace + det
    full = dispersion_poly(build_bilayer(spec), lam, slices, guard)

    subspaces, phi2_list = [], []
    for zeta in zetas:
        kernel = _kernel_basis(R - zeta * np.eye(2))
        phi2 = kernel[:, 0]
        phi2_list.append(phi2)
        rows = [np.concatenate([-B2 @ phi2, np.zeros(2)]), np.concatenate([np.zeros(2), phi2])]
        subspaces.append(np.array(rows))

    return GrapheneReport(lam=lam, B1=B1, B2=B2, R=R, zeta_eigs=zetas, coincident=coincident,
                          quad_residual=lp_residual(full, quadratic), mode_subspaces=subspaces,
                          w=w, w_prime=w_prime, phi2=phi2_list)


def composite_partner(s_values: Sequence[complex], z1: complex, zeta: complex) -> List[complex]:
    """
    All z2 with w(z) w'(z) = zeta for fixed z1

    w = 1/s_a + z1/s_b + z2/s_c and w' = 1/s_a + 1/(s_b z1) + 1/(s_c z2).
    """
    s_a, s_b, s_c = (complex(s) for s in s_values)
    head = 1.0 / s_a + z1 / s_b
    head_prime = 1.0 / s_a + 1.0 / (s_b * z1)
    tail = 1.0 / s_c
    roots = np.roots([tail * head_prime, head * head_prime + tail * tail - zeta, head * tail])
    return [complex(r) for r in roots if r != 0]


def f_zeta_points(zeta: complex, s_values: Sequence[complex], w_samples: Sequence[complex],
                  multiplier_sign: int = 1, notes: Optional[List[str]] = None,
                  tol: float = 1e-8) -> List[Tuple[complex, complex]]:
    """
    Points of the curve w w' = zeta for equal edge s-values

    With s_a = s_b = s_c = s the normalized w is 1 + sigma (z1 + z2), sigma the
    multiplier sign, and zeta becomes zeta s^2. For each sample w the pair {z1, z2}
    is the root set of q' y^2 - q q' y + q = 0 with q = w - 1, q' = zeta/w - 1.
    For zeta = 0 the samples are used as z1 on both components
    1 + y1 + y2 = 0 and 1 + 1/y1 + 1/y2 = 0.

    Raises:
        PreconditionError: s-values differ
    """
    s_list = [complex(s) for s in s_values]
    scale = max(abs(s) for s in s_list)
    if len(s_list) != 3 or any(abs(s - s_list[0]) > 1e-12 * scale for s in s_list):
        raise PreconditionError("curve parameterization needs equal s-values on the three edges")
    if multiplier_sign not in (1, -1):
        raise PreconditionError("multiplier_sign must be +1 or -1")
    zeta_n = complex(zeta) * s_list[0] ** 2
    notes = notes if notes is not None else []

    candidates: List[Tuple[complex, complex]] = []
    if zeta_n == 0:
        for y1 in (complex(t) for t in w_samples):
            if y1 != 0 and y1 != -1:
                candidates.append((y1, -1.0 - y1))
                candidates.append((y1, -y1 / (y1 + 1.0)))
            else:
                notes.append(f"skipped z1={y1}: outside the torus chart")
    else:
        for w in (complex(t) for t in w_samples):
            if w == 0:
                notes.append("skipped w=0: w' undefined")
                continue
            q, q_prime = w - 1.0, zeta_n / w - 1.0
            if abs(q * q_prime) <= 1e-14:
                notes.append(f"skipped w={w}: degenerate quadratic")
                continue
            y1, y2 = (complex(r) for r in np.roots([q_prime, -q * q_prime, q]))
            candidates.append((y1, y2))
            if abs(y1 - y2) > 1e-12:
                candidates.append((y2, y1))

    points = []
    for y1, y2 in candidates:
        if y1 == 0 or y2 == 0:
            continue
        value = (1.0 + y1 + y2) * (1.0 + 1.0 / y1 + 1.0 / y2)
        if abs(value - zeta_n) <= tol * max(1.0, abs(zeta_n)):
            points.append((multiplier_sign * y1, multiplier_sign * y2))
    return points


def f_zero_intersection(multiplier_sign: int = 1) -> List[Tuple[complex, complex]]:
    """
    Intersection of the two zeta = 0 components

    1 + y1 + y2 = 0 and 1 + 1/y1 + 1/y2 = 0 force y1^2 + y1 + 1 = 0, so
    y = (e^{2 pi i/3}, e^{-2 pi i/3}) and its swap; z = multiplier_sign * y.
    """
    third = cmath.exp(2j * cmath.pi / 3.0)
    pairs = [(third, third.conjugate()), (third.conjugate(), third)]
    return [(multiplier_sign * a, multiplier_sign * b) for a, b in pairs]


# ---- double-square lattice ----

@dataclass
class Square7Report:
    """Irreducibility discriminant of the double-square bilayer"""
    lam: complex
    omega: Dict[str, complex]
    r_squared: complex
    r_squared_closed_form: complex
    nu2: complex
    nu2_closed_form: complex
    d1_coefficients: List[complex]
    discriminant_d2: complex
    discriminant_direct: complex
    scale: float
    reducible: bool
    square_test_relative: Optional[float] = None
    square_test_reducible: Optional[bool] = None
    symmetry_residual: Optional[float] = None

    def to_dict(self) -> Dict:
        return {
            'lambda': self.lam,
            'omega': dict(self.omega),
            'r_squared': self.r_squared,
            'r_squared_closed_form': self.r_squared_closed_form,
            'nu2': self.nu2,
            'nu2_closed_form': self.nu2_closed_form,
            'd1_coefficients': list(self.d1_coefficients),
            'discriminant_d2': self.discriminant_d2,
            'discriminant_direct': self.discriminant_direct,
            'scale': self.scale,
            'reducible': self.reducible,
            'square_test_relative': self.square_test_relative,
            'square_test_reducible': self.square_test_reducible,
            'symmetry_residual': self.symmetry_residual,
        }


def _edge_key(tail: int, head: int, shift: Tuple[int, ...]) -> Tuple:
    if (tail, shift) > (head, tuple(-x for x in shift)):
        return head, tail, tuple(-x for x in shift)
    return tail, head, shift


def _check_double_square(layer: PeriodicGraph) -> Potential:
    if layer.rank != 2 or len(layer.vertices) != 2 or len(layer.edges) != 4 or layer.dangling:
        raise ShapeError("layer must be the double-square lattice (2 vertices, 4 edges, rank 2)")
    index = {v: i for i, v in enumerate(layer.vertex_ids)}
    found = sorted(_edge_key(index[e.tail], index[e.head], tuple(e.shift)) for e in layer.edges)
    expected = sorted(_edge_key(*key) for key in
                      ((0, 1, (0, 0)), (1, 0, (1, 0)), (0, 0, (0, 1)), (1, 1, (0, 1))))
    # a self-edge may be stored with shift (0, -1)
    found = sorted((t, h, (0, 1)) if t == h and s == (0, -1) else (t, h, s) for t, h, s in found)
    if found != expected:
        raise ShapeError("layer edges do not form the double-square lattice")
    potential = layer.edges[0].potential
    if any(e.potential != potential for e in layer.edges):
        raise ShapeError("double-square layer edges must share one potential")
    alphas = {v.alpha for v in layer.vertices}
    if len(alphas) != 1:
        raise ShapeError("double-square layer vertices must share one Robin constant")
    if not is_symmetric(potential):
        raise PreconditionError("double-square layer potential must be symmetric")
    return potential


def _square_residual(coefs: np.ndarray) -> float:
    """
    Relative distance of a polynomial (ascending coefficients) from a perfect square

    The square root is matched on the upper half of the coefficients and its
    square compared against all of them; odd degrees are never squares.
    """
    degree = len(coefs) - 1
    if degree == 0:
        return 0.0
    if degree % 2:
        return 1.0
    if degree == 2:
        return float(abs(coefs[1] ** 2 - 4.0 * coefs[2] * coefs[0]) / np.max(np.abs(coefs)) ** 2)
    descending = coefs[::-1]
    half = degree // 2
    root = np.zeros(half + 1, dtype=complex)
    root[0] = cmath.sqrt(descending[0])
    for k in range(1, half + 1):
        cross = np.dot(root[1:k], root[k - 1:0:-1])
        root[k] = (descending[k] - cross) / (2.0 * root[0])
    squared = np.convolve(root, root)
    return float(np.max(np.abs(squared - descending)) / np.max(np.abs(descending)))


def _square_test(full: LaurentPoly) -> Tuple[float, bool, float]:
    zeta_poly = to_symmetric_basis(full)
    degree_2 = max((e[1] for e in zeta_poly.terms), default=0)

    def coefficient(power: int) -> Polynomial:
        coefs = np.zeros(degree_2 + 1, dtype=complex)
        for (i, j), c in zeta_poly.terms.items():
            if i == power:
                coefs[j] += c
        return Polynomial(coefs)

    a, b, c = coefficient(2), coefficient(1), coefficient(0)
    d1 = b * b - 4.0 * a * c
    coefs = d1.coef
    top = np.max(np.abs(coefs)) if coefs.size else 0.0
    keep = np.nonzero(np.abs(coefs) > _TRIM * top)[0]
    coefs = coefs[:keep[-1] + 1] if keep.size else np.zeros(1, dtype=complex)
    relative = _square_residual(coefs)
    return float(relative), bool(relative <= SQUARE_TEST_TOL), symmetry_residual(full)


def square7_discriminant(spec: BilayerSpec, lam: complex, slices: int = DEFAULT_SLICES,
                         guard: float = DIRICHLET_GUARD, tol: float = 1e-8,
                         cross_check: bool = True) -> Square7Report:
    """
    Reducibility test for a bilayer over the double-square lattice

    The coupling block of vertex v2 is conjugated by the eigenbasis of N(lambda)
    of the v1 connector; its diagonal gives Omega_2+- and the product of its
    off-diagonal entries gives r^2.

    Raises:
        ShapeError: layer is not the double-square lattice
        RamificationError: mu_1 vanishes
    """
    lam = complex(lam)
    layer = spec.layer
    ring_potential = _check_double_square(layer)
    v1, v2 = layer.vertex_ids
    ring = _guarded(ring_potential, lam, slices, guard, "layer edge")
    alpha = layer.vertices[0].alpha
    d1 = _guarded(spec.connectors[v1], lam, slices, guard, f"connector at {v1}")
    d2 = _guarded(spec.connectors[v2], lam, slices, guard, f"connector at {v2}")

    mu1 = mu_branches(d1.a)[0]
    if abs(mu1) <= 1e-12:
        raise RamificationError(f"mu_1 vanishes at lambda={lam}")
    basis = np.array([[1.0, 1.0], [mu1 + d1.a, d1.a - mu1]], dtype=complex)
    inverse = np.linalg.inv(basis)
    base = -4.0 * ring.c - alpha * ring.s

    def conjugated(data: EdgeSpectral) -> Matrix2:
        return inverse @ (ring.s * data.dtn(guard)) @ basis

    k1, k2 = conjugated(d1), conjugated(d2)
    omega = {
        'omega1_plus': base + k1[0, 0],
        'omega1_minus': base + k1[1, 1],
        'omega2_plus': base + k2[0, 0],
        'omega2_minus': base + k2[1, 1],
    }
    r2 = k2[0, 1] * k2[1, 0]
    o1p, o1m = omega['omega1_plus'], omega['omega1_minus']
    o2p, o2m = omega['omega2_plus'], omega['omega2_minus']

    # D1(zeta2) = (c zeta2 + d)^2 + 4 r^2 (zeta2 + omega1+)(zeta2 + omega1-)
    c = o1m + o2m - o1p - o2p
    d = o1m * o2m - o1p * o2p
    quad = [c * c + 4.0 * r2, 2.0 * c * d + 4.0 * r2 * (o1p + o1m), d * d + 4.0 * r2 * o1p * o1m]
    direct = quad[1] ** 2 - 4.0 * quad[0] * quad[2]
    d2_value = 16.0 * r2 * (o1p - o1m) ** 2 * (r2 + (o1p - o2m) * (o2p - o1m))
    scale = max([1.0, abs(r2) ** 0.5] + [abs(v) for v in omega.values()]) ** 6

    ratio = ring.s / d2.s
    report = Square7Report(
        lam=lam,
        omega=omega,
        r_squared=complex(r2),
        r_squared_closed_form=complex(ratio ** 2 * (d1.a - d2.a) ** 2 / mu1 ** 2),
        nu2=complex((k2[0, 0] - k2[1, 1]) / (2.0 * ratio)),
        nu2_closed_form=complex((1.0 + d1.a * d2.a) / mu1),
        d1_coefficients=[complex(x) for x in quad],
        discriminant_d2=complex(d2_value),
        discriminant_direct=complex(direct),
        scale=float(scale),
        reducible=bool(abs(d2_value) < tol * scale),
    )
    if cross_check:
        full = dispersion_poly(build_bilayer(spec), lam, slices, guard)
        relative, square, sym = _square_test(full)
        report.square_test_relative = relative
        report.square_test_reducible = square
        report.symmetry_residual = sym
    return report
