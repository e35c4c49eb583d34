"""
FermiSplit - CLI Module
Command-line front end, graph-spec files and report writers
"""

from .app import ExitCode, Command, RunConfig, FermiSplitApp, build_parser, load_config, main
from .graph_spec import parse_graph_spec, load_graph_spec_text, export_graph_spec, write_graph_spec
from .reports import to_json_text, fermi_csv_text, write_text_atomic

__all__ = [
    'ExitCode',
    'Command',
    'RunConfig',
    'FermiSplitApp',
    'build_parser',
    'load_config',
    'main',
    'parse_graph_spec',
    'load_graph_spec_text',
    'export_graph_spec',
    'write_graph_spec',
    'to_json_text',
    'fermi_csv_text',
    'write_text_atomic',
]
