"""
FermiSplit - Sweep Engine Module
Evaluates per-energy computations over lambda segments and grid rows with a
thread pool, keeping input order and Dirichlet-guard skips
"""

import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import psutil

from .errors import NumericalError, PoleError

MAX_WORKERS = 16


class PointStatus:
    """Outcome of one sweep point"""
    OK = "ok"
    SKIPPED = "skipped"
    ERROR = "error"


@dataclass
class SweepPoint:
    lam: complex
    status: str
    result: Any = None
    message: str = ""


def calculate_optimal_workers() -> int:
    """
    Worker count from CPU count and available memory

    Returns:
        int: Recommended worker count in [1, MAX_WORKERS]
    """
    try:
        cpu_count = psutil.cpu_count(logical=True) or 1
        available_gb = psutil.virtual_memory().available / (1024 ** 3)
        # propagator stacks for 1024 slices take a few hundred MB per worker
        if available_gb < 2:
            optimal = 1
        elif available_gb < 8:
            optimal = min(cpu_count, 4)
        else:
            optimal = cpu_count
        return max(1, min(MAX_WORKERS, optimal))
    except Exception:
        return 4


def lambda_segment(start: complex, end: complex, count: int) -> List[complex]:
    """count equally spaced energies from start to end, both included"""
    if count < 1:
        raise ValueError("sweep needs at least one point")
    if count == 1:
        return [complex(start)]
    return [complex(x) for x in np.linspace(complex(start), complex(end), count)]


class SweepEngine:
    """
    Ordered parallel evaluation of pure per-energy functions

    A point whose evaluation hits the Dirichlet guard is reported as skipped;
    numerical failures are recorded per point and do not stop the sweep.
    """

    def __init__(self, workers: Optional[int] = None,
                 log_callback: Optional[Callable] = None,
                 progress_callback: Optional[Callable] = None):
        """
        Initialize the sweep engine

        Args:
            workers: Thread count (None = calculate_optimal_workers())
            log_callback: Function to call with log messages
            progress_callback: Function to call with a copy of the statistics; calls
                are serialized, one per finished point
        """
        self.workers = workers if workers else calculate_optimal_workers()
        self.log_callback = log_callback
        self.progress_callback = progress_callback
        self._lock = threading.Lock()

        self.stats = {
            'points_total': 0,
            'points_done': 0,
            'points_skipped': 0,
            'errors': 0,
            'start_time': None,
            'end_time': None,
        }

    def reset_stats(self, total: int):
        self.stats.update(points_total=total, points_done=0, points_skipped=0, errors=0,
                          start_time=datetime.now().isoformat(), end_time=None)

    def map(self, func: Callable, items: Sequence) -> List:
        """Apply func to every item; results follow the order of items"""
        items = list(items)
        if self.workers <= 1 or len(items) <= 1:
            return [func(item) for item in items]
        with ThreadPoolExecutor(max_workers=min(self.workers, len(items))) as pool:
            return list(pool.map(func, items))

    def sweep(self, func: Callable[[complex], Any], lams: Sequence[complex]) -> List[SweepPoint]:
        """
        Evaluate func at every energy

        Args:
            func: Pure function of lambda
            lams: Energies, evaluated in parallel and returned in this order

        Returns:
            One SweepPoint per energy
        """
        lams = [complex(lam) for lam in lams]
        self.reset_stats(len(lams))
        self._log(f"Sweeping {len(lams)} energies with {self.workers} workers")

        def evaluate(lam: complex) -> SweepPoint:
            try:
                point = SweepPoint(lam, PointStatus.OK, func(lam))
            except PoleError as e:
                point = SweepPoint(lam, PointStatus.SKIPPED, message=str(e))
            except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as e:
                point = SweepPoint(lam, PointStatus.ERROR, message=str(e))
            self._record(point)
            return point

        points = self.map(evaluate, lams)
        self.stats['end_time'] = datetime.now().isoformat()
        self._log(f"Sweep finished: {self.stats['points_done']} points, "
                  f"{self.stats['points_skipped']} skipped, {self.stats['errors']} errors")
        return points

    def get_stats(self) -> Dict:
        """Get current statistics"""
        return self.stats.copy()

    def _record(self, point: SweepPoint):
        with self._lock:
            self.stats['points_done'] += 1
            if point.status == PointStatus.SKIPPED:
                self.stats['points_skipped'] += 1
                self._log(f"Skipped lambda={point.lam}: {point.message}")
            elif point.status == PointStatus.ERROR:
                self.stats['errors'] += 1
                self._log(f"Failed at lambda={point.lam}: {point.message}")
            if self.progress_callback:
                self.progress_callback(self.stats.copy())

    def _log(self, message: str):
        """Internal logging function"""
        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        log_message = f"[{timestamp}] {message}"

        if self.log_callback:
            self.log_callback(log_message)
        else:
            print(log_message, file=sys.stderr)


if __name__ == '__main__':
    from .edge_spectral import a_function
    from .potential import builtin_potential

    step = builtin_potential('step')
    engine = SweepEngine(progress_callback=lambda s: None)
    for p in engine.sweep(lambda lam: a_function(step, lam), lambda_segment(1.0, 20.0, 5)):
        print(p.lam, p.status, p.result)
