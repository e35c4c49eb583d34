import json
import math
import threading
import time

import pytest

from benchmark.sweep_monitor import SweepMonitor
from engine.errors import NumericalError
from engine.graph_model import BilayerSpec
from engine.potential import Potential
from engine.reducibility import factor_same_class
from engine.sweep_engine import (MAX_WORKERS, PointStatus, SweepEngine, calculate_optimal_workers,
                                 lambda_segment)


def test_lambda_segment():
    assert lambda_segment(0.0, 1.0, 5) == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert lambda_segment(2.0, 9.0, 1) == [2.0]
    points = lambda_segment(1.0, 1.0 + 2.0j, 3)
    assert points[1] == pytest.approx(1.0 + 1.0j)
    with pytest.raises(ValueError):
        lambda_segment(0.0, 1.0, 0)


def test_optimal_workers_in_range():
    assert 1 <= calculate_optimal_workers() <= MAX_WORKERS


def test_map_keeps_order():
    engine = SweepEngine(workers=4)
    assert engine.map(lambda x: x * x, range(20)) == [x * x for x in range(20)]
    assert SweepEngine(workers=1).map(str, [3, 1, 2]) == ['3', '1', '2']


def test_sweep_skips_guarded_energies(square_layer):
    logs, progress = [], []
    engine = SweepEngine(workers=3, log_callback=logs.append, progress_callback=progress.append)
    spec = BilayerSpec(square_layer, {'v': Potential.zero()})
    lams = [2.0, math.pi ** 2, 5.0, 4 * math.pi ** 2]
    points = engine.sweep(lambda lam: factor_same_class(spec, lam), lams)

    assert [p.lam for p in points] == [complex(x) for x in lams]
    assert [p.status for p in points] == [PointStatus.OK, PointStatus.SKIPPED,
                                          PointStatus.OK, PointStatus.SKIPPED]
    assert points[0].result.product_residual < 1e-10
    assert 'Dirichlet guard' in points[1].message

    stats = engine.get_stats()
    assert stats['points_total'] == 4 and stats['points_done'] == 4
    assert stats['points_skipped'] == 2 and stats['errors'] == 0
    assert stats['end_time'] is not None
    assert len(progress) == 4
    assert any('Skipped lambda' in line for line in logs)
    assert logs[0].startswith('[')


def test_sweep_records_numerical_failures():
    engine = SweepEngine(workers=2, log_callback=lambda message: None)

    def fragile(lam: complex):
        if lam.real > 1.0:
            raise NumericalError("propagation overflow")
        return lam

    points = engine.sweep(fragile, [0.5, 2.0, 1.0])
    assert [p.status for p in points] == [PointStatus.OK, PointStatus.ERROR, PointStatus.OK]
    assert engine.stats['errors'] == 1


def test_progress_callbacks_are_serialized():
    active, peak, done = [0], [0], []
    guard = threading.Lock()

    def on_progress(stats):
        with guard:
            active[0] += 1
            peak[0] = max(peak[0], active[0])
        time.sleep(0.002)
        done.append(stats['points_done'])
        with guard:
            active[0] -= 1

    engine = SweepEngine(workers=4, log_callback=lambda message: None, progress_callback=on_progress)
    engine.sweep(lambda lam: lam, [float(x) for x in range(24)])
    assert peak[0] == 1
    assert done == list(range(1, 25))


def test_monitor_sessions_round_trip(tmp_path):
    stats_file = tmp_path / 'runs' / 'stats.csv'
    monitor = SweepMonitor(str(stats_file))
    monitor.start_session('factor', {'graph': 'square'})
    monitor.update_progress({'points_done': 3, 'points_skipped': 1, 'errors': 0})
    assert monitor.get_current_stats()['skipped'] == 1
    monitor.record_result(max_residual=2.5e-12, verdicts={'true': 2, 'false': 0}, lambda_count=3)
    monitor.end_session(success=True)
    monitor.start_session('square7')
    monitor.end_session(success=False)

    assert stats_file.exists()
    reloaded = SweepMonitor(str(stats_file))
    assert len(reloaded.history) == 2
    first = reloaded.get_history(command='factor')[0]
    assert first['lambda_count'] == 3 and first['skipped'] == 1
    assert first['verdicts'] == {'true': 2, 'false': 0}
    assert first['success'] is True
    summary = reloaded.get_summary_stats()
    assert summary['total_sessions'] == 2 and summary['failed_sessions'] == 1
    assert summary['max_residual'] == pytest.approx(2.5e-12)

    exported = tmp_path / 'runs.json'
    reloaded.export_to_json(str(exported))
    data = json.loads(exported.read_text())
    assert [entry['command'] for entry in data] == ['factor', 'square7']
    assert 'point_times' not in data[0]


def test_monitor_without_session_is_noop(tmp_path):
    monitor = SweepMonitor(str(tmp_path / 'stats.csv'))
    monitor.update_progress({'points_done': 1})
    monitor.end_session()
    assert monitor.get_current_stats() is None
    assert monitor.get_summary_stats()['total_sessions'] == 0
    assert SweepMonitor.format_duration(42.0) == '42.0s'
    assert SweepMonitor.format_duration(90.0) == '1.5m'
