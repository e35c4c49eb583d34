"""
FermiSplit - Periodic Graph Model Module
Z^n-periodic metric graphs with Robin vertices and potential-carrying edges,
bilayer and decorated constructions and the builtin lattices
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .edge_spectral import (DEFAULT_CLASS_GRID, DEFAULT_SLICES, DIRICHLET_GUARD, edge_data,
                            same_asymmetry_class)
from .errors import PreconditionError, ValidationError
from .potential import Potential, restrict

_LENGTH_TOL = 1e-12


class EndCondition:
    """Condition at the free end of a dangling edge"""
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    ALL = (DIRICHLET, NEUMANN)


@dataclass(frozen=True)
class Vertex:
    id: str
    alpha: float = 0.0


@dataclass(frozen=True)
class Edge:
    """Edge from tail in the fundamental domain to the copy of head translated by shift"""
    tail: str
    head: str
    shift: Tuple[int, ...]
    length: float
    potential: Potential

    def label(self, index: Optional[int] = None) -> str:
        prefix = f"edges[{index}] " if index is not None else ""
        return f"{prefix}{self.tail}->{self.head} shift {list(self.shift)}"


@dataclass(frozen=True)
class DanglingEdge:
    """Edge attached at vertex with a free end carrying end_condition"""
    vertex: str
    length: float
    potential: Potential
    end_condition: str


@dataclass(frozen=True)
class PeriodicGraph:
    """
    One fundamental domain of a Z^rank-periodic quantum graph

    Raises:
        ValidationError: on construction when any structural invariant fails
    """
    rank: int
    vertices: Tuple[Vertex, ...]
    edges: Tuple[Edge, ...]
    dangling: Tuple[DanglingEdge, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, 'vertices', tuple(self.vertices))
        object.__setattr__(self, 'edges', tuple(self.edges))
        object.__setattr__(self, 'dangling', tuple(self.dangling))
        problems = self.validate()
        if problems:
            raise ValidationError("; ".join(problems))

    def validate(self) -> List[str]:
        """List of invariant violations (empty when the graph is valid)"""
        problems = []
        if self.rank < 1:
            problems.append(f"rank must be positive, got {self.rank}")
        ids = [v.id for v in self.vertices]
        if not ids:
            problems.append("graph needs at least one vertex")
        if len(set(ids)) != len(ids):
            problems.append("vertex ids must be unique")
        known = set(ids)
        for i, e in enumerate(self.edges):
            label = e.label(i)
            for end in (e.tail, e.head):
                if end not in known:
                    problems.append(f"{label}: unknown vertex '{end}'")
            if len(e.shift) != self.rank:
                problems.append(f"{label}: shift must have {self.rank} entries")
            elif e.tail == e.head and not any(e.shift):
                problems.append(f"{label}: loops with zero shift are not supported")
            if e.length <= 0 or abs(e.length - e.potential.length) > _LENGTH_TOL * e.length:
                problems.append(f"{label}: length {e.length} does not match its potential")
        for i, d in enumerate(self.dangling):
            if d.vertex not in known:
                problems.append(f"dangling[{i}]: unknown vertex '{d.vertex}'")
            if d.end_condition not in EndCondition.ALL:
                problems.append(f"dangling[{i}]: end condition must be one of {EndCondition.ALL}")
            if d.length <= 0 or abs(d.length - d.potential.length) > _LENGTH_TOL * d.length:
                problems.append(f"dangling[{i}]: length {d.length} does not match its potential")
        return problems

    @property
    def vertex_ids(self) -> List[str]:
        return [v.id for v in self.vertices]

    def alpha(self, vertex_id: str) -> float:
        for v in self.vertices:
            if v.id == vertex_id:
                return v.alpha
        raise KeyError(vertex_id)


@dataclass(frozen=True)
class BilayerSpec:
    """A layer graph plus one unit-length connector potential per layer vertex"""
    layer: PeriodicGraph
    connectors: Dict[str, Potential] = field(default_factory=dict)

    def __post_init__(self):
        problems = [f"vertex '{v}' has no connector" for v in self.layer.vertex_ids
                    if v not in self.connectors]
        problems += [f"connector for unknown vertex '{v}'" for v in self.connectors
                     if v not in self.layer.vertex_ids]
        problems += [f"connector at '{v}' must have length 1" for v, p in self.connectors.items()
                     if abs(p.length - 1.0) > _LENGTH_TOL]
        if problems:
            raise ValidationError("; ".join(problems))

    def connector_list(self) -> List[Potential]:
        return [self.connectors[v] for v in self.layer.vertex_ids]


def layer_vertex(vertex_id: str, layer: int) -> str:
    """Id of the copy of a layer vertex in layer 1 or 2 of a bilayer"""
    return f"{vertex_id}.{layer}"


def build_bilayer(spec: BilayerSpec) -> PeriodicGraph:
    """
    Bilayer graph: both layer copies plus one connecting edge (v,1) -> (v,2) per vertex

    Vertices are ordered with all layer-1 copies first.
    """
    layer = spec.layer
    vertices = [Vertex(layer_vertex(v.id, k), v.alpha) for k in (1, 2) for v in layer.vertices]
    edges = [Edge(layer_vertex(e.tail, k), layer_vertex(e.head, k), e.shift, e.length, e.potential)
             for k in (1, 2) for e in layer.edges]
    zero_shift = (0,) * layer.rank
    for v in layer.vertex_ids:
        if v not in spec.connectors:
            raise ValidationError(f"vertex '{v}' has no connector")
        edges.append(Edge(layer_vertex(v, 1), layer_vertex(v, 2), zero_shift, 1.0, spec.connectors[v]))
    dangling = [DanglingEdge(layer_vertex(d.vertex, k), d.length, d.potential, d.end_condition)
                for k in (1, 2) for d in layer.dangling]
    name = f"{layer.name}_bilayer" if layer.name else "bilayer"
    return PeriodicGraph(layer.rank, tuple(vertices), tuple(edges), tuple(dangling), name)


def is_symmetric(p: Potential, slices: int = DEFAULT_SLICES, tol: float = 1e-12) -> bool:
    """Numerical symmetry test: a vanishes on the class grid relative to |b|"""
    for lam in DEFAULT_CLASS_GRID:
        data = edge_data(p, complex(lam), slices)
        if abs(data.a) > tol * max(1.0, abs(data.b)):
            return False
    return True


def build_decorated_layer(layer: PeriodicGraph, connector: Potential, bc: str,
                          slices: int = DEFAULT_SLICES) -> PeriodicGraph:
    """
    Layer with a half-length dangling edge at every vertex

    Each dangling edge carries the first half of the connector potential and the
    end condition bc at its free end.

    Raises:
        PreconditionError: connector is not symmetric
    """
    if bc not in EndCondition.ALL:
        raise ValidationError(f"end condition must be one of {EndCondition.ALL}")
    if not is_symmetric(connector, slices):
        raise PreconditionError("decorated layers need a symmetric connector potential")
    half_length = 0.5 * connector.length
    half = restrict(connector, half_length)
    dangling = tuple(DanglingEdge(v, half_length, half, bc) for v in layer.vertex_ids)
    return PeriodicGraph(layer.rank, layer.vertices, layer.edges, layer.dangling + dangling,
                         f"{layer.name}_decorated_{bc}" if layer.name else f"decorated_{bc}")


# ---- builtins ----

BUILTIN_GRAPHS = ('square_lattice', 'graphene_layer', 'graphene_bilayer', 'double_square_7')


def _square_lattice(potential: Potential, alpha: float) -> PeriodicGraph:
    L = potential.length
    return PeriodicGraph(2, (Vertex('v', alpha),),
                         (Edge('v', 'v', (1, 0), L, potential), Edge('v', 'v', (0, 1), L, potential)),
                         name='square_lattice')


def _graphene_layer(potentials: Sequence[Potential], alphas: Sequence[float]) -> PeriodicGraph:
    # tail v2, head v1 so that entry (v2, v1) is w = 1/s_a + z1/s_b + z2/s_c
    qa, qb, qc = potentials
    edges = tuple(Edge('v2', 'v1', shift, q.length, q)
                  for shift, q in (((0, 0), qa), ((1, 0), qb), ((0, 1), qc)))
    return PeriodicGraph(2, (Vertex('v1', alphas[0]), Vertex('v2', alphas[1])), edges,
                         name='graphene_layer')


def _double_square(potential: Potential, alpha: float) -> PeriodicGraph:
    L = potential.length
    edges = (
        Edge('v1', 'v2', (0, 0), L, potential),
        Edge('v2', 'v1', (1, 0), L, potential),
        Edge('v1', 'v1', (0, 1), L, potential),
        Edge('v2', 'v2', (0, 1), L, potential),
    )
    return PeriodicGraph(2, (Vertex('v1', alpha), Vertex('v2', alpha)), edges, name='double_square_7')


def builtin_graph(name: str, params: Optional[Dict] = None):
    """
    Builtin models

    Args:
        name: One of BUILTIN_GRAPHS
        params: Optional overrides. Keys: 'potential' (layer edges), 'potentials'
            (graphene edges a, b, c), 'alpha' or 'alphas', 'connectors' (bilayer)

    Returns:
        PeriodicGraph, or BilayerSpec for graphene_bilayer

    Raises:
        ValidationError: unknown name
    """
    params = params or {}
    potential = params.get('potential', Potential.zero())
    alpha = float(params.get('alpha', 0.0))
    if name == 'square_lattice':
        return _square_lattice(potential, alpha)
    if name in ('graphene_layer', 'graphene_bilayer'):
        potentials = params.get('potentials', (potential,) * 3)
        alphas = params.get('alphas', (alpha, alpha))
        layer = _graphene_layer(potentials, alphas)
        if name == 'graphene_layer':
            return layer
        connectors = params.get('connectors', (Potential.zero(), Potential.zero()))
        if not isinstance(connectors, dict):
            connectors = dict(zip(layer.vertex_ids, connectors))
        return BilayerSpec(layer, connectors)
    if name == 'double_square_7':
        return _double_square(potential, alpha)
    raise ValidationError(f"unknown builtin graph '{name}' (known: {', '.join(BUILTIN_GRAPHS)})")


# ---- Dirichlet guard ----

def guard_denominators(g: PeriodicGraph, lam: complex,
                       slices: int = DEFAULT_SLICES) -> List[Tuple[str, float]]:
    """
    (label, |denominator|) for every quantity the reduced matrix divides by

    That is s for each edge, s for Dirichlet-ended and s' for Neumann-ended
    dangling edges.
    """
    lam = complex(lam)
    result = [(e.label(i), abs(edge_data(e.potential, lam, slices).s)) for i, e in enumerate(g.edges)]
    for i, d in enumerate(g.dangling):
        data = edge_data(d.potential, lam, slices)
        value = data.s if d.end_condition == EndCondition.DIRICHLET else data.s_prime
        result.append((f"dangling[{i}] at {d.vertex}", abs(value)))
    return result


def dirichlet_guard_check(g: PeriodicGraph, lam: complex, guard: float = DIRICHLET_GUARD,
                          slices: int = DEFAULT_SLICES) -> bool:
    """True iff lambda is outside the Dirichlet guard of every edge"""
    return all(value > guard for _, value in guard_denominators(g, lam, slices))


def bilayer_guard_check(spec: BilayerSpec, lam: complex, guard: float = DIRICHLET_GUARD,
                        slices: int = DEFAULT_SLICES) -> bool:
    return dirichlet_guard_check(build_bilayer(spec), lam, guard, slices)


def connectors_same_class(spec: BilayerSpec, slices: int = DEFAULT_SLICES, tol: float = 1e-8) -> bool:
    """Pairwise asymmetry-class test of all connectors against the first one"""
    potentials = spec.connector_list()
    return all(same_asymmetry_class(potentials[0], p, DEFAULT_CLASS_GRID, tol, slices)
               for p in potentials[1:])
