"""
FermiSplit - Benchmark Module
Run timing and verdict statistics
"""

from .sweep_monitor import SweepMonitor

__all__ = ['SweepMonitor']
