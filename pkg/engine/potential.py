"""
FermiSplit - Edge Potential Module
Real potentials q(x) on an edge [0, L]: evaluation, reflection, even/odd parts,
restriction and the slice grid used by the propagator
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, ValidationError


class PotentialKind:
    """Potential kind constants (also the "kind" tags of graph-spec records)"""
    ZERO = "zero"
    CONSTANT = "constant"
    PIECEWISE = "piecewise"
    TRIG = "trig"
    SAMPLES = "samples"

    ALL = (ZERO, CONSTANT, PIECEWISE, TRIG, SAMPLES)


# Coefficients of a trig series at or below this fraction of the largest one
# are treated as zero when deciding whether a part collapses to a simpler kind
_SERIES_ZERO = 1e-14
_BREAK_MERGE = 1e-14


def _as_float_tuple(values: Sequence[float], name: str) -> Tuple[float, ...]:
    try:
        result = tuple(float(v) for v in values)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"{name}: expected a list of numbers ({e})")
    if not all(math.isfinite(v) for v in result):
        raise ValidationError(f"{name}: all values must be finite")
    return result


def _trim_zeros(values: Tuple[float, ...]) -> Tuple[float, ...]:
    end = len(values)
    while end > 0 and values[end - 1] == 0.0:
        end -= 1
    return values[:end]


@dataclass(frozen=True)
class Potential:
    """
    Real potential on an edge of length L

    Only the fields relevant to ``kind`` are meaningful:

    - constant: ``value``
    - piecewise: ``breaks`` (0 = b0 < b1 < ... < bn = L) and ``values`` (n entries,
      value i on [b_i, b_{i+1}), the last piece closed)
    - trig: ``cos`` and ``sin`` coefficients of
      q(x) = sum_k cos[k] cos(k pi x / P) + sum_k sin[k-1] sin(k pi x / P)
      with basis length P = ``period`` (defaults to L)
    - samples: ``values`` on a uniform grid, piecewise constant

    Use the classmethod constructors rather than calling this directly.
    """
    kind: str
    length: float = 1.0
    value: float = 0.0
    breaks: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()
    cos: Tuple[float, ...] = ()
    sin: Tuple[float, ...] = ()
    period: float = 0.0

    def __post_init__(self):
        if self.kind not in PotentialKind.ALL:
            raise ValidationError(f"unknown potential kind '{self.kind}'")
        length = float(self.length)
        if not math.isfinite(length) or length <= 0:
            raise ValidationError(f"potential length must be positive, got {self.length}")
        object.__setattr__(self, 'length', length)
        object.__setattr__(self, 'value', float(self.value))
        if not math.isfinite(self.value):
            raise ValidationError("constant value must be finite")

        breaks = _as_float_tuple(self.breaks, "breaks")
        values = _as_float_tuple(self.values, "values")
        object.__setattr__(self, 'breaks', breaks)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'cos', _trim_zeros(_as_float_tuple(self.cos, "cos")))
        object.__setattr__(self, 'sin', _trim_zeros(_as_float_tuple(self.sin, "sin")))

        if self.kind == PotentialKind.PIECEWISE:
            if len(breaks) < 2 or len(values) != len(breaks) - 1:
                raise ValidationError("piecewise potential needs n+1 breaks for n values")
            if breaks[0] != 0.0 or abs(breaks[-1] - length) > _BREAK_MERGE * length:
                raise ValidationError("piecewise breaks must start at 0 and end at the edge length")
            if any(b1 <= b0 for b0, b1 in zip(breaks, breaks[1:])):
                raise ValidationError("piecewise breaks must be strictly increasing")
        elif self.kind == PotentialKind.SAMPLES:
            if not values:
                raise ValidationError("sample table must not be empty")
        elif self.kind == PotentialKind.TRIG:
            period = float(self.period) if self.period else length
            if not math.isfinite(period) or period <= 0:
                raise ValidationError("trig period must be positive")
            object.__setattr__(self, 'period', period)

    # ---- constructors ----

    @classmethod
    def zero(cls, length: float = 1.0) -> 'Potential':
        return cls(PotentialKind.ZERO, length=length)

    @classmethod
    def constant(cls, value: float, length: float = 1.0) -> 'Potential':
        return cls(PotentialKind.CONSTANT, length=length, value=value)

    @classmethod
    def piecewise(cls, breaks: Sequence[float], values: Sequence[float]) -> 'Potential':
        if not breaks:
            raise ValidationError("piecewise potential needs breaks")
        return cls(PotentialKind.PIECEWISE, length=float(breaks[-1]),
                   breaks=tuple(breaks), values=tuple(values))

    @classmethod
    def trig(cls, cos: Sequence[float], sin: Sequence[float] = (),
             length: float = 1.0, period: Optional[float] = None) -> 'Potential':
        return cls(PotentialKind.TRIG, length=length, cos=tuple(cos), sin=tuple(sin),
                   period=period or 0.0)

    @classmethod
    def samples(cls, values: Sequence[float], length: float = 1.0) -> 'Potential':
        return cls(PotentialKind.SAMPLES, length=length, values=tuple(values))

    # ---- serialization ----

    def to_record(self) -> Dict:
        """Tagged graph-spec record for this potential"""
        record: Dict = {'kind': self.kind}
        if self.kind == PotentialKind.CONSTANT:
            record['value'] = self.value
        elif self.kind == PotentialKind.PIECEWISE:
            record['breaks'] = list(self.breaks)
            record['values'] = list(self.values)
        elif self.kind == PotentialKind.TRIG:
            record['cos'] = list(self.cos)
            record['sin'] = list(self.sin)
            if self.period != self.length:
                record['period'] = self.period
        elif self.kind == PotentialKind.SAMPLES:
            record['values'] = list(self.values)
        if self.kind != PotentialKind.PIECEWISE and self.length != 1.0:
            record['length'] = self.length
        return record

    @classmethod
    def from_record(cls, record: Dict) -> 'Potential':
        """
        Build a potential from a graph-spec record

        Raises:
            ValidationError: Unknown kind or bad parameters
        """
        if not isinstance(record, dict):
            raise ValidationError("potential record must be an object")
        kind = record.get('kind')
        length = record.get('length', 1.0)
        if kind == PotentialKind.ZERO:
            return cls.zero(length)
        if kind == PotentialKind.CONSTANT:
            if 'value' not in record:
                raise ValidationError("constant potential needs 'value'")
            return cls.constant(record['value'], length)
        if kind == PotentialKind.PIECEWISE:
            return cls.piecewise(record.get('breaks', ()), record.get('values', ()))
        if kind == PotentialKind.TRIG:
            return cls.trig(record.get('cos', ()), record.get('sin', ()), length,
                            record.get('period'))
        if kind == PotentialKind.SAMPLES:
            return cls.samples(record.get('values', ()), length)
        raise ValidationError(f"unknown potential kind '{kind}'")

    def __str__(self) -> str:
        return f"Potential({self.kind}, L={self.length:g})"


# ---- evaluation ----

def _trig_values(p: Potential, xs: np.ndarray) -> np.ndarray:
    result = np.zeros_like(xs)
    omega = math.pi / p.period
    for k, coef in enumerate(p.cos):
        if coef:
            result += coef * np.cos(k * omega * xs)
    for k, coef in enumerate(p.sin, start=1):
        if coef:
            result += coef * np.sin(k * omega * xs)
    return result


def _cell_edges(p: Potential) -> np.ndarray:
    if p.kind == PotentialKind.PIECEWISE:
        return np.asarray(p.breaks)
    return np.linspace(0.0, p.length, len(p.values) + 1)


def values_at(p: Potential, xs) -> np.ndarray:
    """
    Vectorized evaluation, no range check

    Args:
        p: Potential
        xs: Array of positions

    Returns:
        Array of q(x) values with the shape of xs
    """
    xs = np.asarray(xs, dtype=float)
    if p.kind == PotentialKind.ZERO:
        return np.zeros_like(xs)
    if p.kind == PotentialKind.CONSTANT:
        return np.full_like(xs, p.value)
    if p.kind == PotentialKind.TRIG:
        return _trig_values(p, xs)
    edges = _cell_edges(p)
    idx = np.clip(np.searchsorted(edges, xs, side='right') - 1, 0, len(p.values) - 1)
    return np.asarray(p.values)[idx]


def evaluate(p: Potential, x: float) -> float:
    """
    Value q(x)

    Raises:
        DomainError: x outside [0, L]
    """
    if not (0.0 <= x <= p.length):
        raise DomainError(f"x={x} outside [0, {p.length}]")
    return float(values_at(p, np.array([x]))[0])


def lower_bound(p: Potential) -> float:
    """A value not larger than min q, used to start Dirichlet searches"""
    if p.kind == PotentialKind.ZERO:
        return 0.0
    if p.kind == PotentialKind.CONSTANT:
        return p.value
    if p.kind == PotentialKind.TRIG:
        head = p.cos[0] if p.cos else 0.0
        return head - sum(abs(c) for c in p.cos[1:]) - sum(abs(s) for s in p.sin)
    return min(p.values)


# ---- reflection and parts ----

def _trig_rotation(p: Potential, k: int) -> Tuple[float, float]:
    # cos/sin of k*pi*L/P, exact when the basis spans the edge
    if p.period == p.length:
        return (1.0 if k % 2 == 0 else -1.0), 0.0
    theta = k * math.pi * p.length / p.period
    return math.cos(theta), math.sin(theta)


def _padded(p: Potential) -> Tuple[List[float], List[float]]:
    count = max(len(p.cos), len(p.sin) + 1)
    cos = list(p.cos) + [0.0] * (count - len(p.cos))
    sin = [0.0] + list(p.sin) + [0.0] * (count - 1 - len(p.sin))
    return cos, sin


def reflect(p: Potential) -> Potential:
    """Potential q~(x) = q(L - x)"""
    if p.kind in (PotentialKind.ZERO, PotentialKind.CONSTANT):
        return p
    if p.kind == PotentialKind.SAMPLES:
        return Potential.samples(p.values[::-1], p.length)
    if p.kind == PotentialKind.PIECEWISE:
        breaks = [0.0] + [p.length - b for b in reversed(p.breaks[1:-1])] + [p.length]
        return Potential.piecewise(breaks, p.values[::-1])

    cos, sin = _padded(p)
    new_cos, new_sin = [], []
    for k in range(len(cos)):
        ck, sk = _trig_rotation(p, k)
        new_cos.append(cos[k] * ck + sin[k] * sk)
        new_sin.append(cos[k] * sk - sin[k] * ck)
    return Potential.trig(new_cos, new_sin[1:], p.length, p.period)


def _collapse(p: Potential) -> Potential:
    """Replace a part that is constant by the simplest equal potential"""
    if p.kind in (PotentialKind.PIECEWISE, PotentialKind.SAMPLES):
        first = p.values[0]
        if all(v == first for v in p.values):
            return Potential.zero(p.length) if first == 0.0 else Potential.constant(first, p.length)
        return p
    if p.kind == PotentialKind.TRIG:
        scale = max([abs(c) for c in p.cos + p.sin] + [0.0])
        rest = [c for c in p.cos[1:] + p.sin if abs(c) > _SERIES_ZERO * scale]
        if rest:
            return p
        head = p.cos[0] if p.cos and abs(p.cos[0]) > _SERIES_ZERO * scale else 0.0
        return Potential.zero(p.length) if head == 0.0 else Potential.constant(head, p.length)
    return p


def symmetric_breaks(p: Potential) -> List[float]:
    """Breakpoints of p merged with their mirror images, sorted"""
    if p.kind == PotentialKind.PIECEWISE:
        raw = sorted(set(p.breaks) | {p.length - b for b in p.breaks})
    elif p.kind == PotentialKind.SAMPLES:
        return list(np.linspace(0.0, p.length, len(p.values) + 1))
    else:
        return [0.0, p.length]
    merged = [0.0]
    for b in raw[1:]:
        if b - merged[-1] > _BREAK_MERGE * p.length:
            merged.append(b)
    merged[-1] = p.length
    return merged


def even_odd_parts(p: Potential) -> Tuple[Potential, Potential]:
    """
    Symmetric and antisymmetric parts (q+, q-) of p about the edge center

    Returns:
        Tuple (q_plus, q_minus) with q = q_plus + q_minus
    """
    if p.kind == PotentialKind.ZERO:
        return p, p
    if p.kind == PotentialKind.CONSTANT:
        return p, Potential.zero(p.length)
    if p.kind == PotentialKind.SAMPLES:
        v = np.asarray(p.values)
        w = v[::-1]
        return (_collapse(Potential.samples(0.5 * (v + w), p.length)),
                _collapse(Potential.samples(0.5 * (v - w), p.length)))
    if p.kind == PotentialKind.PIECEWISE:
        breaks = symmetric_breaks(p)
        mids = 0.5 * (np.asarray(breaks[:-1]) + np.asarray(breaks[1:]))
        q = values_at(p, mids)
        qr = values_at(p, p.length - mids)
        return (_collapse(Potential.piecewise(breaks, 0.5 * (q + qr))),
                _collapse(Potential.piecewise(breaks, 0.5 * (q - qr))))

    cos, sin = _padded(p)
    rc, rs = _padded(reflect(p))
    count = max(len(cos), len(rc))
    cos += [0.0] * (count - len(cos))
    sin += [0.0] * (count - len(sin))
    rc += [0.0] * (count - len(rc))
    rs += [0.0] * (count - len(rs))
    even = Potential.trig([0.5 * (a + b) for a, b in zip(cos, rc)],
                          [0.5 * (a + b) for a, b in zip(sin, rs)][1:], p.length, p.period)
    odd = Potential.trig([0.5 * (a - b) for a, b in zip(cos, rc)],
                         [0.5 * (a - b) for a, b in zip(sin, rs)][1:], p.length, p.period)
    return _collapse(even), _collapse(odd)


def restrict(p: Potential, length: float) -> Potential:
    """
    Restriction of p to [0, length]

    Raises:
        DomainError: length not in (0, L]
    """
    if not (0.0 < length <= p.length):
        raise DomainError(f"restriction length {length} outside (0, {p.length}]")
    if p.kind == PotentialKind.ZERO:
        return Potential.zero(length)
    if p.kind == PotentialKind.CONSTANT:
        return Potential.constant(p.value, length)
    if p.kind == PotentialKind.TRIG:
        return Potential.trig(p.cos, p.sin, length, p.period)
    if p.kind == PotentialKind.SAMPLES:
        cells = length * len(p.values) / p.length
        if abs(cells - round(cells)) < 1e-9 and round(cells) >= 1:
            return Potential.samples(p.values[:int(round(cells))], length)
    edges = list(_cell_edges(p))
    kept = [b for b in edges if b < length * (1 - _BREAK_MERGE)]
    return Potential.piecewise(kept + [length], p.values[:len(kept)])


def discretize(p: Potential, slices: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Slice grid for the propagator

    The grid contains the mirror-symmetric breakpoint set of p, so table kinds are
    exact and the grid of reflect(p) is the mirror of the grid of p.

    Args:
        p: Potential
        slices: Approximate total number of slices

    Returns:
        (nodes, qbar): slice boundaries (n+1 values) and the potential frozen at
        each slice midpoint (n values)
    """
    if slices < 1:
        raise ValidationError(f"slices must be positive, got {slices}")
    breaks = symmetric_breaks(p)
    parts = []
    for b0, b1 in zip(breaks[:-1], breaks[1:]):
        count = max(1, int(round(slices * (b1 - b0) / p.length)))
        parts.append(np.linspace(b0, b1, count + 1)[:-1])
    nodes = np.concatenate(parts + [np.array([p.length])])
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    return nodes, values_at(p, mids)


def builtin_potential(name: str) -> Potential:
    """
    Named potentials used by the CLI and the test suite

    Raises:
        ValidationError: Unknown name
    """
    table = {
        'zero': lambda: Potential.zero(),
        'constant': lambda: Potential.constant(3.0),
        'step': lambda: Potential.piecewise([0.0, 0.5, 1.0], [5.0, 0.0]),
        'well': lambda: Potential.piecewise([0.0, 0.25, 0.75, 1.0], [0.0, -4.0, 0.0]),
        'trig': lambda: Potential.trig([1.0, 2.0, 0.0, 0.5], [1.5, -1.0, -0.5]),
        'ramp': lambda: Potential.samples([0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]),
    }
    if name not in table:
        raise ValidationError(f"unknown builtin potential '{name}' (known: {', '.join(sorted(table))})")
    return table[name]()


BUILTIN_POTENTIAL_NAMES = ('zero', 'constant', 'step', 'well', 'trig', 'ramp')
