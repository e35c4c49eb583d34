"""
FermiSplit - Floquet Reduction Module
Floquet-transformed vertex matrix A(lambda, z) of a periodic quantum graph, its
determinant D(lambda, z) and Fermi-surface slices
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .edge_spectral import DEFAULT_SLICES, DIRICHLET_GUARD, edge_data
from .errors import PoleError, ValidationError
from .graph_model import EndCondition, PeriodicGraph
from .laurent import LaurentMatrix, LaurentPoly, lp_det


@dataclass(frozen=True)
class FloquetMatrix:
    """Reduced matrix at fixed energy; rows and columns follow vertex_order"""
    lam: complex
    vertex_order: Tuple[str, ...]
    matrix: LaurentMatrix

    def entry(self, row: str, col: str) -> LaurentPoly:
        return self.matrix[self.vertex_order.index(row), self.vertex_order.index(col)]

    def evaluate(self, z) -> np.ndarray:
        return self.matrix.evaluate(z)


def reduced_matrix(g: PeriodicGraph, lam: complex, slices: int = DEFAULT_SLICES,
                   guard: float = DIRICHLET_GUARD,
                   vertex_order: Optional[Sequence[str]] = None) -> FloquetMatrix:
    """
    Assemble A(lambda, z)

    Each edge (tail v, head w, shift g) adds z^g/s to entry (v, w), z^-g/s to
    entry (w, v), -c/s to the diagonal at v and -s'/s to the diagonal at w.
    Robin constants are subtracted on the diagonal and dangling edges add their
    end-condition M-function there.

    Raises:
        PoleError: some denominator is inside the Dirichlet guard
    """
    lam = complex(lam)
    order = tuple(vertex_order) if vertex_order is not None else tuple(g.vertex_ids)
    if sorted(order) != sorted(g.vertex_ids):
        raise ValidationError("vertex_order must be a permutation of the graph's vertices")
    index = {v: i for i, v in enumerate(order)}
    m, n = len(order), g.rank
    origin = (0,) * n
    cells: Dict[Tuple[int, int], Dict[Tuple[int, ...], complex]] = {}

    def add(i: int, j: int, exponent: Tuple[int, ...], value: complex):
        terms = cells.setdefault((i, j), {})
        terms[exponent] = terms.get(exponent, 0j) + value

    for k, e in enumerate(g.edges):
        data = edge_data(e.potential, lam, slices)
        if abs(data.s) <= guard:
            raise PoleError(abs(data.s), e.label(k))
        t, h = index[e.tail], index[e.head]
        inv_s = 1.0 / data.s
        add(t, h, tuple(e.shift), inv_s)
        add(h, t, tuple(-x for x in e.shift), inv_s)
        add(t, t, origin, -data.c * inv_s)
        # c of the reversed edge is s' of the stored direction
        add(h, h, origin, -data.s_prime * inv_s)

    for v in g.vertices:
        add(index[v.id], index[v.id], origin, -v.alpha)

    for k, d in enumerate(g.dangling):
        data = edge_data(d.potential, lam, slices)
        if d.end_condition == EndCondition.DIRICHLET:
            numerator, denominator = data.c, data.s
        else:
            numerator, denominator = data.c_prime, data.s_prime
        if abs(denominator) <= guard:
            raise PoleError(abs(denominator), f"dangling[{k}] at {d.vertex}")
        add(index[d.vertex], index[d.vertex], origin, -numerator / denominator)

    entries = [[LaurentPoly(n, cells.get((i, j), {})) for j in range(m)] for i in range(m)]
    return FloquetMatrix(lam, order, LaurentMatrix(entries))


def dispersion_poly(g: PeriodicGraph, lam: complex, slices: int = DEFAULT_SLICES,
                    guard: float = DIRICHLET_GUARD,
                    vertex_order: Optional[Sequence[str]] = None) -> LaurentPoly:
    """D(lambda, z) = det A(lambda, z) as a Laurent polynomial in z"""
    return lp_det(reduced_matrix(g, lam, slices, guard, vertex_order).matrix)


def hermitian_residual(fm: FloquetMatrix, z) -> float:
    """Norm of A(z) - A(1/conj z)^H, which vanishes for real energies"""
    z = np.asarray(z, dtype=complex)
    return float(np.linalg.norm(fm.evaluate(z) - fm.evaluate(1.0 / np.conj(z)).conj().T))


def k_grid(count: int) -> np.ndarray:
    """Uniform grid over the closed interval [-pi, pi]"""
    if count < 2:
        raise ValidationError("k-grid needs at least 2 points")
    return np.linspace(-math.pi, math.pi, count)


def fermi_slice(g: PeriodicGraph, lam: float, grid: Union[int, Tuple[int, int]],
                slices: int = DEFAULT_SLICES, guard: float = DIRICHLET_GUARD,
                engine=None) -> List[Tuple[float, float, float, float]]:
    """
    |D(lambda, e^{ik})| on a uniform k-grid over [-pi, pi]^2

    Args:
        g: Rank-2 graph
        lam: Energy
        grid: Points per axis, or (n1, n2)
        engine: Optional SweepEngine used to evaluate rows in parallel

    Returns:
        Rows (k1, k2, |D|, log10|D|) in row-major order (k1 outer)
    """
    if g.rank != 2:
        raise ValidationError(f"Fermi slices need a rank-2 graph, got rank {g.rank}")
    n1, n2 = (grid, grid) if isinstance(grid, int) else grid
    k1_values, k2_values = k_grid(n1), k_grid(n2)
    poly = dispersion_poly(g, lam, slices, guard)
    z2 = np.exp(1j * k2_values)

    def row(k1: float) -> List[Tuple[float, float, float, float]]:
        points = np.column_stack([np.full(n2, np.exp(1j * k1)), z2])
        magnitudes = np.abs(poly(points))
        with np.errstate(divide='ignore'):
            logs = np.log10(magnitudes)
        return [(float(k1), float(k2), float(a), float(b))
                for k2, a, b in zip(k2_values, magnitudes, logs)]

    rows = engine.map(row, list(k1_values)) if engine is not None else [row(k) for k in k1_values]
    return [entry for block in rows for entry in block]
