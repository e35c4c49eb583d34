"""
FermiSplit - Two-Sheeted Branch Module
The square root mu^2 = a(lambda)^2 + 1: principal branch values, eigenprojections
of N(lambda), ramification points and continuation of mu along paths
"""

import cmath
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .edge_spectral import BRANCH_TOL, DEFAULT_SLICES, Matrix2, a_values
from .errors import ContinuationError, RamificationError, ValidationError
from .potential import Potential
from .roots import ComplexRegion, find_roots

MIN_MU = 1e-12
# A continuation step is ambiguous when the rejected root is not at least
# twice as far from the previous value as the chosen one
AMBIGUITY_RATIO = 0.5


@dataclass(frozen=True)
class BranchPoint:
    """Energy lambda0 with a(lambda0) = sign, sign in {+i, -i}"""
    lambda0: complex
    sign: complex
    newton_residual: float

    def to_dict(self) -> Dict:
        return {'lambda0': self.lambda0, 'sign': self.sign, 'newton_residual': self.newton_residual}


def principal_sqrt(w: complex) -> complex:
    """Principal square root with -0.0 imaginary parts treated as +0.0"""
    w = complex(w)
    if w.imag == 0.0:
        w = complex(w.real, 0.0)
    return cmath.sqrt(w)


def mu_branches(a_value: complex) -> Tuple[complex, complex]:
    """(mu, -mu) with mu the principal root of a^2 + 1"""
    mu = principal_sqrt(complex(a_value) ** 2 + 1.0)
    return mu, -mu


def n_matrix(a_value: complex) -> Matrix2:
    """N(lambda) = [[-a, 1], [1, a]], whose eigenvalues are the branch values"""
    return np.array([[-a_value, 1.0], [1.0, a_value]], dtype=complex)


def eigenprojection(a_value: complex, mu: complex) -> Matrix2:
    """
    Projection onto the mu-eigenspace of N(lambda): (1/2mu) [[mu - a, 1], [1, mu + a]]

    Raises:
        RamificationError: |mu| <= 1e-12
        ValidationError: mu is not a branch value for a_value
    """
    a_value, mu = complex(a_value), complex(mu)
    if abs(mu) <= MIN_MU:
        raise RamificationError(f"|mu| = {abs(mu):.3e} too small for an eigenprojection")
    if abs(mu * mu - (a_value * a_value + 1.0)) > 1e-10 * max(1.0, abs(mu) ** 2):
        raise ValidationError(f"mu={mu} is not a square root of a^2 + 1 for a={a_value}")
    return np.array([[mu - a_value, 1.0], [1.0, mu + a_value]], dtype=complex) / (2.0 * mu)


def branch_points(p: Potential, region: ComplexRegion, slices: int = DEFAULT_SLICES,
                  grid: int = 20) -> List[BranchPoint]:
    """
    Roots of a(lambda) - i and a(lambda) + i in a region

    Returns:
        Branch points sorted by real part, imaginary part, then sign
    """
    points = []
    for sign in (1j, -1j):
        def shifted(lams: np.ndarray, sign=sign) -> np.ndarray:
            return a_values(p, lams, slices) - sign

        for lam0, residual in find_roots(shifted, region, grid=grid, tol=BRANCH_TOL):
            points.append(BranchPoint(lambda0=lam0, sign=sign, newton_residual=residual))
    points.sort(key=lambda bp: (bp.lambda0.real, bp.lambda0.imag, -bp.sign.imag))
    return points


def circle_path(center: complex, radius: float, points: int = 400) -> List[complex]:
    """Closed counter-clockwise circle; the last point repeats the first"""
    angles = np.linspace(0.0, 2.0 * math.pi, points + 1)
    path = [complex(center + radius * np.exp(1j * t)) for t in angles]
    path[-1] = path[0]
    return path


def continue_mu(p: Potential, path: Sequence[complex], start_sign: int = 1,
                slices: int = DEFAULT_SLICES) -> List[complex]:
    """
    Continue mu = sqrt(a^2 + 1) along a path

    Starts at start_sign times the principal root, then at each point takes the
    root nearer to the previous value.

    Raises:
        ContinuationError: the two roots are comparably close to the previous value
    """
    if start_sign not in (1, -1):
        raise ValidationError("start_sign must be +1 or -1")
    if not path:
        return []
    a_path = a_values(p, np.asarray(path, dtype=complex), slices)
    values = [start_sign * mu_branches(a_path[0])[0]]
    for k in range(1, len(a_path)):
        root, _ = mu_branches(a_path[k])
        prev = values[-1]
        near, far = sorted((root, -root), key=lambda m: abs(m - prev))
        if abs(root) <= MIN_MU or abs(near - prev) > AMBIGUITY_RATIO * abs(far - prev):
            raise ContinuationError(
                f"ambiguous branch at path index {k} (lambda={path[k]}); refine the path")
        values.append(near)
    return values
