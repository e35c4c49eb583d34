"""
FermiSplit - Run Monitoring Module
Tracks and stores timing and verdict statistics for CLI runs
"""

import csv
import json
import os
import sys
import time
from datetime import datetime
from typing import Dict, List, Optional


class SweepMonitor:
    """
    Records CLI runs as sessions in a stats CSV
    """

    FIELDNAMES = [
        'session_id', 'command', 'start_time', 'end_time', 'duration_seconds',
        'lambda_count', 'skipped', 'errors', 'max_residual', 'verdicts', 'success',
    ]

    def __init__(self, stats_file: str = "benchmark/stats.csv"):
        """
        Initialize run monitor

        Args:
            stats_file: Path to CSV file for storing statistics
        """
        self.stats_file = stats_file
        self.current_session = None
        self.history = []

        directory = os.path.dirname(stats_file)
        if directory:
            os.makedirs(directory, exist_ok=True)

        self._load_history()

    def start_session(self, command: str, additional_info: Optional[Dict] = None) -> str:
        """
        Start a new monitoring session

        Args:
            command: CLI command being run (factor, graphene, ...)
            additional_info: Additional metadata, kept in memory only

        Returns:
            Session ID
        """
        session_id = datetime.now().strftime("%Y%m%d_%H%M%S_%f")

        self.current_session = {
            'session_id': session_id,
            'command': command,
            'start_time': datetime.now().isoformat(),
            'end_time': None,
            'duration_seconds': 0.0,
            'lambda_count': 0,
            'skipped': 0,
            'errors': 0,
            'max_residual': 0.0,
            'verdicts': {},
            'success': False,
            'point_times': [],
            'additional_info': additional_info or {},
        }

        return session_id

    def update_progress(self, stats: Dict):
        """
        Update current session from a SweepEngine statistics snapshot

        Args:
            stats: Dictionary with points_done, points_skipped and errors
        """
        if not self.current_session:
            return

        self.current_session['lambda_count'] = stats.get('points_done', 0)
        self.current_session['skipped'] = stats.get('points_skipped', 0)
        self.current_session['errors'] = stats.get('errors', 0)
        self.current_session['point_times'].append(time.time())

    def record_result(self, max_residual: Optional[float] = None,
                      verdicts: Optional[Dict[str, int]] = None, lambda_count: Optional[int] = None):
        """Store the summary of the finished computation"""
        if not self.current_session:
            return
        if max_residual is not None:
            self.current_session['max_residual'] = max_residual
        if verdicts:
            self.current_session['verdicts'] = dict(verdicts)
        if lambda_count is not None:
            self.current_session['lambda_count'] = lambda_count

    def end_session(self, success: bool = True):
        """
        End current monitoring session

        Args:
            success: Whether the run exited with code 0
        """
        if not self.current_session:
            return

        self.current_session['end_time'] = datetime.now().isoformat()
        self.current_session['success'] = success

        start = datetime.fromisoformat(self.current_session['start_time'])
        end = datetime.fromisoformat(self.current_session['end_time'])
        self.current_session['duration_seconds'] = (end - start).total_seconds()

        self.history.append(self.current_session.copy())
        self._save_to_csv()

        self.current_session = None

    def get_current_stats(self) -> Optional[Dict]:
        """Get current session statistics"""
        if self.current_session:
            return self.current_session.copy()
        return None

    def get_history(self, limit: Optional[int] = None,
                    command: Optional[str] = None) -> List[Dict]:
        """
        Get historical statistics

        Args:
            limit: Maximum number of records to return
            command: Filter by command

        Returns:
            List of historical records
        """
        filtered = self.history

        if command:
            filtered = [h for h in filtered if h['command'] == command]

        if limit:
            filtered = filtered[-limit:]

        return filtered

    def get_summary_stats(self) -> Dict:
        """
        Get summary statistics across all history

        Returns:
            Dictionary with summary statistics
        """
        if not self.history:
            return {
                'total_sessions': 0,
                'successful_sessions': 0,
                'failed_sessions': 0,
                'total_lambda_points': 0,
                'average_duration_seconds': 0.0,
                'max_residual': 0.0,
            }

        total_sessions = len(self.history)
        successful = len([h for h in self.history if h['success']])
        durations = [h['duration_seconds'] for h in self.history]

        return {
            'total_sessions': total_sessions,
            'successful_sessions': successful,
            'failed_sessions': total_sessions - successful,
            'total_lambda_points': sum(h['lambda_count'] for h in self.history),
            'average_duration_seconds': sum(durations) / len(durations),
            'max_residual': max(h['max_residual'] for h in self.history),
        }

    def export_to_json(self, output_file: str):
        """
        Export history to JSON file

        Args:
            output_file: Output JSON file path
        """
        export_data = []
        for session in self.history:
            session_copy = session.copy()
            session_copy.pop('point_times', None)
            export_data.append(session_copy)

        with open(output_file, 'w') as f:
            json.dump(export_data, f, indent=2)

    def _save_to_csv(self):
        """Append the last finished session to the CSV file"""
        if not self.history:
            return

        file_exists = os.path.exists(self.stats_file)

        with open(self.stats_file, 'a', newline='', encoding='utf-8') as f:
            writer = csv.DictWriter(f, fieldnames=self.FIELDNAMES, extrasaction='ignore')

            if not file_exists:
                writer.writeheader()

            last_entry = self.history[-1].copy()
            last_entry['verdicts'] = json.dumps(last_entry['verdicts'], sort_keys=True)
            writer.writerow(last_entry)

    def _load_history(self):
        """Load history from CSV file"""
        if not os.path.exists(self.stats_file):
            return

        try:
            with open(self.stats_file, 'r', newline='', encoding='utf-8') as f:
                reader = csv.DictReader(f)
                for row in reader:
                    row['duration_seconds'] = float(row.get('duration_seconds') or 0)
                    row['lambda_count'] = int(row.get('lambda_count') or 0)
                    row['skipped'] = int(row.get('skipped') or 0)
                    row['errors'] = int(row.get('errors') or 0)
                    row['max_residual'] = float(row.get('max_residual') or 0)
                    row['verdicts'] = json.loads(row.get('verdicts') or '{}')
                    row['success'] = row.get('success', 'False') == 'True'
                    row['point_times'] = []
                    row['additional_info'] = {}

                    self.history.append(row)
        except (OSError, ValueError, csv.Error) as e:
            print(f"Error loading run history: {e}", file=sys.stderr)

    @staticmethod
    def format_duration(seconds: float) -> str:
        """Format duration to human-readable format"""
        if seconds < 60:
            return f"{seconds:.1f}s"
        elif seconds < 3600:
            return f"{seconds / 60:.1f}m"
        else:
            return f"{seconds / 3600:.1f}h"


if __name__ == '__main__':
    monitor = SweepMonitor("test_stats.csv")

    session_id = monitor.start_session("factor")
    print(f"Started session: {session_id}")

    for i in range(5):
        monitor.update_progress({'points_done': i + 1, 'points_skipped': 0, 'errors': 0})
    monitor.record_result(max_residual=3.2e-12, verdicts={'reducible': 5})
    monitor.end_session(success=True)

    print(json.dumps(monitor.get_summary_stats(), indent=2))
