"""
FermiSplit - Command-Line Application
Argument parsing, configuration, command dispatch and report emission
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from engine.edge_spectral import (DEFAULT_CLASS_GRID, DEFAULT_SLICES, DIRICHLET_GUARD,
                                  a_derivative_at_branch, a_values, check_csrelations,
                                  dirichlet_eigenvalues, edge_data, genericity_check,
                                  genericity_holds, same_asymmetry_class)
from engine.errors import (FermiSplitError, NotABranchPointError, NumericalError, PoleError,
                           SchemaError, ValidationError)
from engine.floquet import dispersion_poly, fermi_slice
from engine.graph_model import (BUILTIN_GRAPHS, BilayerSpec, PeriodicGraph, build_bilayer,
                                builtin_graph, guard_denominators, is_symmetric)
from engine.potential import BUILTIN_POTENTIAL_NAMES, Potential, builtin_potential
from engine.reducibility import (decorated_equivalence, factor_same_class, graphene_reduction,
                                 square7_discriminant)
from engine.riemann import branch_points, mu_branches
from engine.roots import ComplexRegion
from engine.sweep_engine import PointStatus, SweepEngine, lambda_segment
from benchmark.sweep_monitor import SweepMonitor

from cli.graph_spec import parse_graph_spec, write_graph_spec
from cli.reports import fermi_csv_text, sweep_summary, to_json_text, write_text_atomic

DEFAULT_CONFIG_FILE = "config/config.json"

DEFAULT_SETTINGS = {
    'slices': DEFAULT_SLICES,
    'tol': 1e-8,
    'dirichlet_guard': DIRICHLET_GUARD,
    'workers': 'auto',
    'root_grid': 20,
    'class_grid': [[z.real, z.imag] for z in DEFAULT_CLASS_GRID],
    'log_file': 'logs/fermisplit.log',
    'stats_file': 'benchmark/stats.csv',
}


class ExitCode:
    """Process exit codes"""
    OK = 0
    USAGE = 1
    VALIDATION = 2
    GUARD = 3
    NUMERICAL = 4


class Command:
    """CLI command names"""
    EDGE = "edge"
    AFUN = "afun"
    CLASSES = "classes"
    DISPERSION = "dispersion"
    FACTOR = "factor"
    GRAPHENE = "graphene"
    SQUARE7 = "square7"
    FERMI = "fermi"
    RAMI = "rami"
    DECORATED = "decorated"

    ALL = (EDGE, AFUN, CLASSES, DISPERSION, FACTOR, GRAPHENE, SQUARE7, FERMI, RAMI, DECORATED)
    NEEDS_POTENTIAL = (EDGE, AFUN, CLASSES, RAMI)
    NEEDS_GRAPH = (DISPERSION, FACTOR, GRAPHENE, SQUARE7, FERMI, DECORATED)
    NEEDS_LAMBDA = (EDGE, AFUN, DISPERSION, FACTOR, GRAPHENE, SQUARE7, FERMI, DECORATED)
    SWEEPABLE = (AFUN, FACTOR, GRAPHENE, SQUARE7, DECORATED)


class UsageError(Exception):
    """Bad command line (exit code 1)"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


@dataclass
class RunConfig:
    """One CLI invocation with configuration defaults applied"""
    command: str
    input_path: Optional[str] = None
    builtin: Optional[str] = None
    potentials: List[str] = field(default_factory=list)
    connectors: List[str] = field(default_factory=list)
    lam: Optional[complex] = None
    lam_end: Optional[complex] = None
    sweep: int = 0
    grid: int = 64
    slices: int = DEFAULT_SLICES
    tol: float = 1e-8
    guard: float = DIRICHLET_GUARD
    branch: int = 1
    region: Optional[List[float]] = None
    lambda_max: Optional[float] = None
    out_path: Optional[str] = None
    export_path: Optional[str] = None
    workers: Optional[int] = None

    def validate(self) -> List[str]:
        """Missing or inconsistent parameters for the chosen command"""
        problems = []
        if self.command not in Command.ALL:
            problems.append(f"unknown command '{self.command}'")
            return problems
        if self.command in Command.NEEDS_POTENTIAL and not self.potentials:
            problems.append(f"'{self.command}' needs --potential")
        if self.command in Command.NEEDS_GRAPH and not (self.input_path or self.builtin):
            problems.append(f"'{self.command}' needs --graph or --builtin")
        if self.input_path and self.builtin:
            problems.append("--graph and --builtin are mutually exclusive")
        if self.command in Command.NEEDS_LAMBDA and self.lam is None:
            problems.append(f"'{self.command}' needs --re (and optionally --im)")
        if self.command == Command.RAMI and not self.region:
            problems.append("'rami' needs --region RE_MIN RE_MAX IM_MIN IM_MAX")
        if self.sweep:
            if self.command not in Command.SWEEPABLE:
                problems.append(f"'{self.command}' does not support --sweep")
            if self.sweep < 1 or self.lam_end is None:
                problems.append("--sweep needs a positive count and --re-end/--im-end")
        if self.slices < 2 or self.grid < 2:
            problems.append("--slices and --grid must be at least 2")
        if self.export_path and not (self.input_path or self.builtin):
            problems.append("--export needs --builtin or --graph")
        return problems

    @classmethod
    def from_args(cls, args: argparse.Namespace, settings: Dict) -> 'RunConfig':
        lam = complex(args.re, args.im or 0.0) if args.re is not None else None
        lam_end = None
        if args.re_end is not None or args.im_end is not None:
            base = lam if lam is not None else 0j
            lam_end = complex(args.re_end if args.re_end is not None else base.real,
                              args.im_end if args.im_end is not None else base.imag)
        workers = args.workers
        if workers is None and settings.get('workers') not in (None, 'auto'):
            workers = int(settings['workers'])
        return cls(
            command=args.command,
            input_path=args.graph,
            builtin=args.builtin,
            potentials=list(args.potential or []),
            connectors=list(args.connector or []),
            lam=lam,
            lam_end=lam_end,
            sweep=args.sweep or 0,
            grid=args.grid,
            slices=args.slices if args.slices is not None else int(settings['slices']),
            tol=args.tol if args.tol is not None else float(settings['tol']),
            guard=args.guard if args.guard is not None else float(settings['dirichlet_guard']),
            branch=args.branch,
            region=args.region,
            lambda_max=args.lambda_max,
            out_path=args.out,
            export_path=args.export,
            workers=workers,
        )


def load_config(path: str = DEFAULT_CONFIG_FILE,
                log_callback: Optional[Callable] = None) -> Dict:
    """
    Load settings from a JSON file merged over DEFAULT_SETTINGS

    A missing or unreadable file falls back to the defaults.
    """
    settings = dict(DEFAULT_SETTINGS)
    if not path or not os.path.exists(path):
        return settings
    try:
        with open(path, 'r', encoding='utf-8') as f:
            loaded = json.load(f)
        if not isinstance(loaded, dict):
            raise ValueError("top level must be an object")
        settings.update(loaded)
    except (OSError, ValueError) as e:
        if log_callback:
            log_callback(f"Could not read config {path}: {e}; using defaults")
    return settings


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='fermisplit',
                     description='Reducibility of Fermi surfaces of bilayer periodic quantum graphs')
    parser.add_argument('command', choices=Command.ALL, help='computation to run')
    parser.add_argument('--graph', help='graph-spec JSON file')
    parser.add_argument('--builtin', choices=BUILTIN_GRAPHS, help='builtin graph model')
    parser.add_argument('--potential', action='append',
                        help=f"potential: builtin name ({', '.join(BUILTIN_POTENTIAL_NAMES)}) "
                             "or JSON record file; repeatable")
    parser.add_argument('--connector', action='append',
                        help='bilayer connector potential (one for all vertices or one per vertex)')
    parser.add_argument('--re', type=float, help='real part of lambda')
    parser.add_argument('--im', type=float, default=0.0, help='imaginary part of lambda')
    parser.add_argument('--re-end', type=float, help='real part of the sweep end point')
    parser.add_argument('--im-end', type=float, help='imaginary part of the sweep end point')
    parser.add_argument('--sweep', type=int, help='number of lambda points on the segment')
    parser.add_argument('--grid', type=int, default=64, help='k-grid points per axis (fermi)')
    parser.add_argument('--slices', type=int, help='integration slices per edge')
    parser.add_argument('--tol', type=float, help='tolerance for class and reducibility tests')
    parser.add_argument('--guard', type=float, help='Dirichlet guard threshold on |s|')
    parser.add_argument('--branch', type=int, choices=(1, -1), default=1,
                        help='square-root branch labelling d_plus (factor)')
    parser.add_argument('--region', type=float, nargs=4,
                        metavar=('RE_MIN', 'RE_MAX', 'IM_MIN', 'IM_MAX'), help='search region (rami)')
    parser.add_argument('--lambda-max', type=float, help='list Dirichlet eigenvalues up to this value')
    parser.add_argument('--out', help='output file (default: stdout)')
    parser.add_argument('--export', help='write the graph-spec of the model to this file')
    parser.add_argument('--workers', type=int, help='sweep worker threads')
    parser.add_argument('--config', default=DEFAULT_CONFIG_FILE, help='settings JSON file')
    return parser


def resolve_potential(name_or_path: str) -> Potential:
    """Builtin potential name, or a JSON file holding one potential record"""
    if name_or_path in BUILTIN_POTENTIAL_NAMES:
        return builtin_potential(name_or_path)
    if os.path.exists(name_or_path):
        try:
            with open(name_or_path, 'r', encoding='utf-8') as f:
                return Potential.from_record(json.load(f))
        except json.JSONDecodeError as e:
            raise SchemaError([f"{name_or_path}: line {e.lineno}: {e.msg}"]) from e
    raise ValidationError(f"'{name_or_path}' is neither a builtin potential nor a file")


class FermiSplitApp:
    """
    Runs one command per call and maps failures to exit codes
    """

    def __init__(self, settings: Optional[Dict] = None, log_callback: Optional[Callable] = None,
                 stdout=None):
        """
        Initialize the application

        Args:
            settings: Merged configuration (None = defaults)
            log_callback: Extra destination for log lines
            stdout: Stream for reports without --out (default sys.stdout)
        """
        self.settings = dict(DEFAULT_SETTINGS)
        self.settings.update(settings or {})
        self.log_callback = log_callback
        self.stdout = stdout
        self.log_file = self.settings.get('log_file') or None
        stats_file = self.settings.get('stats_file')
        self.monitor = SweepMonitor(stats_file) if stats_file else None
        self.last_summary: Optional[Dict] = None

    # Logging

    def log_message(self, message: str):
        """Log a line to stderr, the log file and the callback"""
        print(message, file=sys.stderr)
        if self.log_callback:
            self.log_callback(message)
        self._write_to_log_file(message + "\n")

    def _log(self, message: str):
        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        self.log_message(f"[{timestamp}] {message}")

    def _write_to_log_file(self, message: str):
        if not self.log_file:
            return
        try:
            directory = os.path.dirname(self.log_file)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(self.log_file, 'a', encoding='utf-8') as f:
                f.write(message)
        except OSError:
            pass

    # Running

    def run(self, rc: RunConfig) -> int:
        """
        Execute one command

        Returns:
            ExitCode value
        """
        problems = rc.validate()
        if problems:
            for problem in problems:
                self._log(f"Usage error: {problem}")
            return ExitCode.USAGE

        if self.monitor:
            self.monitor.start_session(rc.command)
        code = ExitCode.OK
        try:
            output = self.dispatch(rc)
            self._emit(rc, output)
        except SchemaError as e:
            for message in e.messages:
                self._log(f"Schema error: {message}")
            code = ExitCode.VALIDATION
        except ValidationError as e:
            self._log(f"Validation error: {e}")
            code = ExitCode.VALIDATION
        except PoleError as e:
            self._log(f"Dirichlet guard: {e}")
            code = ExitCode.GUARD
        except (NumericalError, ArithmeticError, np.linalg.LinAlgError, AssertionError) as e:
            self._log(f"Numerical failure: {e}")
            code = ExitCode.NUMERICAL
        except FermiSplitError as e:
            self._log(f"Error: {e}")
            code = ExitCode.NUMERICAL

        if self.monitor:
            summary = self.last_summary or {}
            self.monitor.record_result(max_residual=summary.get('max_residual'),
                                       verdicts=summary.get('verdicts'),
                                       lambda_count=summary.get('count'))
            self.monitor.end_session(success=code == ExitCode.OK)
        return code

    def dispatch(self, rc: RunConfig) -> Union[Dict, str]:
        self.last_summary = None
        handler = getattr(self, f"cmd_{rc.command}")
        self._log(f"Running {rc.command}")
        return handler(rc)

    def _emit(self, rc: RunConfig, output: Union[Dict, str]):
        text = output if isinstance(output, str) else to_json_text(output)
        if rc.out_path:
            write_text_atomic(rc.out_path, text)
            self._log(f"Wrote {rc.out_path}")
        else:
            (self.stdout or sys.stdout).write(text)

    # Inputs

    def _potentials(self, rc: RunConfig) -> List[Potential]:
        return [resolve_potential(p) for p in rc.potentials]

    def _model(self, rc: RunConfig) -> Union[PeriodicGraph, BilayerSpec]:
        if rc.input_path:
            model = parse_graph_spec(rc.input_path)
        else:
            params = {}
            if rc.potentials:
                params['potential'] = resolve_potential(rc.potentials[0])
            model = builtin_graph(rc.builtin, params)
        if rc.connectors:
            layer = model.layer if isinstance(model, BilayerSpec) else model
            connectors = [resolve_potential(c) for c in rc.connectors]
            if len(connectors) == 1:
                connectors = connectors * len(layer.vertex_ids)
            if len(connectors) != len(layer.vertex_ids):
                raise ValidationError(
                    f"give one --connector or one per vertex ({len(layer.vertex_ids)})")
            model = BilayerSpec(layer, dict(zip(layer.vertex_ids, connectors)))
        if rc.export_path:
            write_graph_spec(model, rc.export_path)
            self._log(f"Exported graph-spec to {rc.export_path}")
        return model

    def _bilayer(self, rc: RunConfig) -> BilayerSpec:
        model = self._model(rc)
        if not isinstance(model, BilayerSpec):
            raise ValidationError(f"'{rc.command}' needs a bilayer (connectors in the graph-spec or --connector)")
        return model

    def _graph(self, rc: RunConfig) -> PeriodicGraph:
        model = self._model(rc)
        return build_bilayer(model) if isinstance(model, BilayerSpec) else model

    def _envelope(self, rc: RunConfig, inputs: Dict, result) -> Dict:
        return {
            'command': rc.command,
            'inputs': dict(inputs, slices=rc.slices, guard=rc.guard, tol=rc.tol),
            'result': result,
        }

    def _per_lambda(self, rc: RunConfig, func: Callable[[complex], Dict],
                    residual_key: Optional[str] = None, verdict_key: Optional[str] = None):
        """Single-energy result, or sweep entries plus a summary"""
        if not rc.sweep:
            report = func(rc.lam)
            self.last_summary = {'count': 1}
            if residual_key and report.get(residual_key) is not None:
                self.last_summary['max_residual'] = float(report[residual_key])
            if verdict_key:
                self.last_summary['verdicts'] = {str(bool(report.get(verdict_key))).lower(): 1}
            return report

        engine = SweepEngine(rc.workers, log_callback=self.log_message,
                             progress_callback=self.monitor.update_progress if self.monitor else None)
        points = engine.sweep(func, lambda_segment(rc.lam, rc.lam_end, rc.sweep))
        entries = []
        for p in points:
            entry = {'lambda': p.lam, 'status': p.status}
            if p.status == PointStatus.OK:
                entry['report'] = p.result
            else:
                entry['message'] = p.message
            entries.append(entry)
        summary = sweep_summary(entries, residual_key, verdict_key)
        self.last_summary = summary
        return {'points': entries, 'summary': summary}

    # Commands

    def cmd_edge(self, rc: RunConfig) -> Dict:
        p = self._potentials(rc)[0]
        data = edge_data(p, rc.lam, rc.slices)
        transfer = data.transfer()
        det = complex(np.linalg.det(transfer))
        try:
            dtn, dtn_error = data.dtn(rc.guard, 'edge'), None
        except PoleError as e:
            dtn, dtn_error = None, str(e)
        result = {
            'spectral': data.to_dict(),
            'abs_s': abs(data.s),
            'transfer': transfer,
            'det_transfer': det,
            'det_residual': abs(det + 1.0),
            'wronskian_residual': data.wronskian_residual,
            'csrelations': check_csrelations(p, rc.lam, rc.slices),
            'dtn': dtn,
            'dtn_error': dtn_error,
        }
        return self._envelope(rc, {'lambda': rc.lam, 'potential': p.to_record()}, result)

    def cmd_afun(self, rc: RunConfig) -> Dict:
        p = self._potentials(rc)[0]

        def evaluate(lam: complex) -> Dict:
            data = edge_data(p, lam, rc.slices)
            return {'lambda': lam, 'a': data.a, 'b': data.b, 'mu': mu_branches(data.a)[0]}

        result = {'values': self._per_lambda(rc, evaluate), 'symmetric': is_symmetric(p, rc.slices)}
        if rc.lambda_max is not None:
            result['dirichlet_eigenvalues'] = dirichlet_eigenvalues(p, rc.lambda_max, rc.slices)
        return self._envelope(rc, {'lambda': rc.lam, 'potential': p.to_record()}, result)

    def cmd_classes(self, rc: RunConfig) -> Dict:
        potentials = self._potentials(rc)
        grid = [complex(re, im) for re, im in self.settings['class_grid']]
        same = [[same_asymmetry_class(p, q, grid, rc.tol, rc.slices) for q in potentials]
                for p in potentials]
        result = {
            'class_grid': grid,
            'a_values': [a_values(p, np.array(grid), rc.slices) for p in potentials],
            'symmetric': [is_symmetric(p, rc.slices) for p in potentials],
            'same_class': same,
        }
        return self._envelope(rc, {'potentials': [p.to_record() for p in potentials]}, result)

    def cmd_dispersion(self, rc: RunConfig) -> Dict:
        g = self._graph(rc)
        poly = dispersion_poly(g, rc.lam, rc.slices, rc.guard)
        result = {
            'vertex_order': g.vertex_ids,
            'nvars': poly.nvars,
            'terms': poly.to_records(),
            'guard_denominators': [{'label': label, 'abs': value}
                                   for label, value in guard_denominators(g, rc.lam, rc.slices)],
        }
        return self._envelope(rc, {'lambda': rc.lam, 'graph': g.name}, result)

    def cmd_factor(self, rc: RunConfig) -> Dict:
        spec = self._bilayer(rc)

        def evaluate(lam: complex) -> Dict:
            return factor_same_class(spec, lam, rc.slices, rc.guard, rc.branch, rc.tol).to_dict()

        result = self._per_lambda(rc, evaluate, 'product_residual', 'components_distinct')
        return self._envelope(rc, {'lambda': rc.lam, 'graph': spec.layer.name, 'branch': rc.branch},
                              result)

    def cmd_graphene(self, rc: RunConfig) -> Dict:
        spec = self._bilayer(rc)

        def evaluate(lam: complex) -> Dict:
            return graphene_reduction(spec, lam, rc.slices, rc.guard).to_dict()

        result = self._per_lambda(rc, evaluate, 'quad_residual', 'coincident')
        return self._envelope(rc, {'lambda': rc.lam, 'graph': spec.layer.name}, result)

    def cmd_square7(self, rc: RunConfig) -> Dict:
        spec = self._bilayer(rc)

        def evaluate(lam: complex) -> Dict:
            return square7_discriminant(spec, lam, rc.slices, rc.guard, rc.tol).to_dict()

        result = self._per_lambda(rc, evaluate, None, 'reducible')
        return self._envelope(rc, {'lambda': rc.lam, 'graph': spec.layer.name}, result)

    def cmd_decorated(self, rc: RunConfig) -> Dict:
        model = self._model(rc)
        if not isinstance(model, BilayerSpec):
            raise ValidationError("'decorated' needs a connector (--connector or a bilayer spec)")
        connectors = model.connector_list()
        if any(c != connectors[0] for c in connectors):
            raise ValidationError("'decorated' needs the same connector at every vertex")

        def evaluate(lam: complex) -> Dict:
            report = decorated_equivalence(model.layer, connectors[0], lam, rc.slices, rc.guard).to_dict()
            report['max_residual'] = max(report['neumann_residual'], report['dirichlet_residual'])
            return report

        result = self._per_lambda(rc, evaluate, 'max_residual')
        return self._envelope(rc, {'lambda': rc.lam, 'graph': model.layer.name,
                                   'connector': connectors[0].to_record()}, result)

    def cmd_fermi(self, rc: RunConfig) -> str:
        g = self._graph(rc)
        engine = SweepEngine(rc.workers, log_callback=self.log_message)
        rows = fermi_slice(g, rc.lam, rc.grid, rc.slices, rc.guard, engine)
        self.last_summary = {'count': 1}
        return fermi_csv_text(rows)

    def cmd_rami(self, rc: RunConfig) -> Dict:
        p = self._potentials(rc)[0]
        region = ComplexRegion.from_sequence(rc.region)
        grid = int(self.settings.get('root_grid', 20))
        points = branch_points(p, region, rc.slices, grid)
        checks = []
        for bp in points:
            try:
                formula, fd = a_derivative_at_branch(p, bp.lambda0, rc.slices)
                checks.append({'lambda0': bp.lambda0, 'formula': formula, 'finite_difference': fd,
                               'relative_error': abs(formula - fd) / max(abs(fd), 1e-300)})
            except NotABranchPointError as e:
                checks.append({'lambda0': bp.lambda0, 'error': str(e)})
        genericity = genericity_check(p, region, rc.slices, grid)
        symmetric = is_symmetric(p, rc.slices)
        result = {
            'branch_points': points,
            'derivative_checks': checks,
            'genericity': [{'lambda0': lam0, 'psi_squared_integral': value} for lam0, value in genericity],
            'symmetric': symmetric,
            'decorated_realizable_obstructed': (not symmetric) and genericity_holds(genericity),
        }
        return self._envelope(rc, {'potential': p.to_record(), 'region': list(region.to_list())}, result)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return ExitCode.USAGE

    settings = load_config(args.config, lambda message: print(message, file=sys.stderr))
    app = FermiSplitApp(settings)
    return app.run(RunConfig.from_args(args, app.settings))


if __name__ == '__main__':
    sys.exit(main())
