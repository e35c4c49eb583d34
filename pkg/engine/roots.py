"""
FermiSplit - Complex Root Finding Module
Multi-start damped Newton iteration for entire functions of one complex variable
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ComplexRegion:
    """Closed rectangle [re_min, re_max] x [im_min, im_max] of the complex plane"""
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        valid, message = validate_region(self)
        if not valid:
            raise ValidationError(message)

    @classmethod
    def square(cls, half_width: float, center: complex = 0j) -> 'ComplexRegion':
        return cls(center.real - half_width, center.real + half_width,
                   center.imag - half_width, center.imag + half_width)

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> 'ComplexRegion':
        if len(values) != 4:
            raise ValidationError("region needs re_min, re_max, im_min, im_max")
        return cls(*(float(v) for v in values))

    @property
    def diameter(self) -> float:
        return math.hypot(self.re_max - self.re_min, self.im_max - self.im_min)

    def contains(self, z, margin: float = 0.0):
        z = np.asarray(z)
        return ((z.real >= self.re_min - margin) & (z.real <= self.re_max + margin) &
                (z.imag >= self.im_min - margin) & (z.imag <= self.im_max + margin))

    def start_grid(self, count: int) -> np.ndarray:
        """count x count starting points at cell centers, flattened row-major"""
        re = self.re_min + (np.arange(count) + 0.5) * (self.re_max - self.re_min) / count
        im = self.im_min + (np.arange(count) + 0.5) * (self.im_max - self.im_min) / count
        grid_re, grid_im = np.meshgrid(re, im)
        return (grid_re + 1j * grid_im).ravel()

    def to_list(self) -> List[float]:
        return [self.re_min, self.re_max, self.im_min, self.im_max]


def validate_region(region: ComplexRegion) -> Tuple[bool, Optional[str]]:
    """
    Check that a region is a bounded, non-degenerate rectangle

    Returns:
        Tuple of (is_valid, error_message)
    """
    bounds = (region.re_min, region.re_max, region.im_min, region.im_max)
    if not all(math.isfinite(b) for b in bounds):
        return False, "region bounds must be finite"
    if region.re_max <= region.re_min or region.im_max <= region.im_min:
        return False, "region must have positive width and height"
    return True, None


class NewtonSolver:
    """
    Damped Newton iteration run on a whole grid of starting points at once

    The function must accept and return complex numpy arrays. The derivative is
    taken by a central difference along the real axis, which is valid for
    analytic functions.
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray],
                 max_iter: int = 80, diff_step: float = 1e-6,
                 max_halvings: int = 6):
        """
        Initialize the solver

        Args:
            func: Vectorized analytic function
            max_iter: Iteration cap per start
            diff_step: Relative step of the numerical derivative
            max_halvings: Backtracking steps when a Newton step increases |f|
        """
        self.func = func
        self.max_iter = max_iter
        self.diff_step = diff_step
        self.max_halvings = max_halvings

    def derivative(self, z: np.ndarray) -> np.ndarray:
        h = self.diff_step * np.maximum(1.0, np.abs(z))
        return (self.func(z + h) - self.func(z - h)) / (2.0 * h)

    def iterate(self, starts: np.ndarray, region: ComplexRegion) -> Tuple[np.ndarray, np.ndarray]:
        """
        Run damped Newton from every start

        Returns:
            (points, residuals) after iteration; diverged starts carry residual inf
        """
        z = np.array(starts, dtype=complex)
        fz = self.func(z)
        max_step = 0.1 * region.diameter
        margin = 0.1 * region.diameter
        active = np.isfinite(fz)

        for _ in range(self.max_iter):
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            with np.errstate(divide='ignore', invalid='ignore'):
                step = fz[idx] / self.derivative(z[idx])
            bad = ~np.isfinite(step)
            active[idx[bad]] = False
            idx, step = idx[~bad], step[~bad]

            size = np.abs(step)
            too_big = size > max_step
            step[too_big] *= max_step / size[too_big]

            # backtrack where |f| does not decrease
            candidate = z[idx] - step
            f_candidate = self.func(candidate)
            for _ in range(self.max_halvings):
                worse = ~(np.abs(f_candidate) < np.abs(fz[idx]))
                if not worse.any():
                    break
                step[worse] *= 0.5
                candidate[worse] = z[idx][worse] - step[worse]
                f_candidate[worse] = self.func(candidate[worse])

            z[idx] = candidate
            fz[idx] = f_candidate
            converged = np.abs(step) < 1e-15 * np.maximum(1.0, np.abs(candidate))
            escaped = ~region.contains(candidate, margin) | ~np.isfinite(f_candidate)
            active[idx[converged | escaped]] = False

        residuals = np.abs(fz)
        residuals[~np.isfinite(residuals)] = np.inf
        return z, residuals


def find_roots(func: Callable[[np.ndarray], np.ndarray], region: ComplexRegion,
               grid: int = 20, tol: float = 1e-8, dedupe: float = 1e-6) -> List[Tuple[complex, float]]:
    """
    Roots of an analytic function inside a region

    Args:
        func: Vectorized analytic function
        region: Search rectangle; starts are a grid x grid lattice in it
        grid: Starts per side
        tol: Accept a point when |f| <= tol
        dedupe: Points closer than this are the same root

    Returns:
        List of (root, residual) sorted by real then imaginary part
    """
    solver = NewtonSolver(func)
    points, residuals = solver.iterate(region.start_grid(grid), region)
    keep = (residuals <= tol) & region.contains(points)

    found: List[Tuple[complex, float]] = []
    order = np.argsort(residuals[keep], kind='stable')
    for z, res in zip(points[keep][order], residuals[keep][order]):
        if all(abs(z - other) > dedupe for other, _ in found):
            found.append((complex(z), float(res)))
    found.sort(key=lambda item: (item[0].real, item[0].imag))
    return found
