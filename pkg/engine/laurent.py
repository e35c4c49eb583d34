"""
FermiSplit - Laurent Polynomial Module
Sparse Laurent polynomials in n variables with complex coefficients, small
matrices over them and their cofactor determinants
"""

import itertools
import math
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DimensionError, DomainError, LaurentError, ValidationError

PRUNE_THRESHOLD = 1e-13
MAX_DET_DIMENSION = 10

Exponent = Tuple[int, ...]
Scalar = Union[int, float, complex]


class LaurentPoly:
    """
    Laurent polynomial sum c_e z^e stored as {exponent tuple: coefficient}

    Instances are normalized on construction (coefficients at or below
    PRUNE_THRESHOLD times the largest magnitude are dropped) and never mutated.

    Example
    -------
    LaurentPoly(2, {(1, 0): 1, (-1, 0): 1}) is z1 + 1/z1
    """

    __slots__ = ('nvars', '_terms', '_arrays')

    def __init__(self, nvars: int, terms: Optional[Mapping[Exponent, Scalar]] = None):
        if nvars < 1:
            raise ValidationError("a Laurent polynomial needs at least one variable")
        self.nvars = int(nvars)
        cleaned: Dict[Exponent, complex] = {}
        for exponent, coef in (terms or {}).items():
            exponent = tuple(int(e) for e in exponent)
            if len(exponent) != self.nvars:
                raise LaurentError(f"exponent {exponent} does not have {self.nvars} entries")
            coef = complex(coef)
            if coef != 0:
                cleaned[exponent] = cleaned.get(exponent, 0j) + coef
        if cleaned:
            floor = PRUNE_THRESHOLD * max(abs(c) for c in cleaned.values())
            cleaned = {e: c for e, c in cleaned.items() if abs(c) > floor}
        self._terms = MappingProxyType(cleaned)
        self._arrays = None

    # ---- constructors ----

    @classmethod
    def zero(cls, nvars: int) -> 'LaurentPoly':
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value: Scalar) -> 'LaurentPoly':
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def monomial(cls, nvars: int, exponent: Sequence[int], coef: Scalar = 1.0) -> 'LaurentPoly':
        return cls(nvars, {tuple(exponent): coef})

    @classmethod
    def variable(cls, nvars: int, index: int, power: int = 1) -> 'LaurentPoly':
        exponent = [0] * nvars
        exponent[index] = power
        return cls(nvars, {tuple(exponent): 1.0})

    # ---- inspection ----

    @property
    def terms(self) -> Mapping[Exponent, complex]:
        return self._terms

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def max_coeff(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    @property
    def constant_term(self) -> complex:
        return self._terms.get((0,) * self.nvars, 0j)

    def has_z_dependence(self) -> bool:
        """True if some non-constant monomial survives normalization"""
        return any(any(e) for e in self._terms)

    def inverted(self, axis: int) -> 'LaurentPoly':
        """Substitute z_axis -> 1/z_axis"""
        flipped = {}
        for e, c in self._terms.items():
            f = list(e)
            f[axis] = -f[axis]
            flipped[tuple(f)] = c
        return LaurentPoly(self.nvars, flipped)

    def __len__(self) -> int:
        return len(self._terms)

    def __repr__(self) -> str:
        if not self._terms:
            return "LaurentPoly(0)"
        parts = []
        for e in sorted(self._terms):
            mono = "*".join(f"z{i + 1}^{k}" for i, k in enumerate(e) if k)
            parts.append(f"({self._terms[e]:.6g}){'*' + mono if mono else ''}")
        return "LaurentPoly(" + " + ".join(parts) + ")"

    # ---- arithmetic ----

    def _coerce(self, other) -> 'LaurentPoly':
        if isinstance(other, LaurentPoly):
            if other.nvars != self.nvars:
                raise LaurentError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return LaurentPoly.constant(self.nvars, other)
        return NotImplemented

    def __add__(self, other) -> 'LaurentPoly':
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        total = dict(self._terms)
        for e, c in other._terms.items():
            total[e] = total.get(e, 0j) + c
        return LaurentPoly(self.nvars, total)

    __radd__ = __add__

    def __neg__(self) -> 'LaurentPoly':
        return LaurentPoly(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> 'LaurentPoly':
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> 'LaurentPoly':
        return (-self) + other

    def __mul__(self, other) -> 'LaurentPoly':
        if isinstance(other, (int, float, complex, np.number)):
            return LaurentPoly(self.nvars, {e: c * other for e, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        product: Dict[Exponent, complex] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                product[e] = product.get(e, 0j) + c1 * c2
        return LaurentPoly(self.nvars, product)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> 'LaurentPoly':
        if not isinstance(power, int) or power < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = LaurentPoly.constant(self.nvars, 1.0)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base
            power >>= 1
        return result

    # ---- evaluation ----

    def _exponent_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        if self._arrays is None:
            keys = list(self._terms)
            exps = np.array(keys, dtype=int).reshape(len(keys), self.nvars)
            coefs = np.array([self._terms[k] for k in keys], dtype=complex)
            self._arrays = (exps, coefs)
        return self._arrays

    def __call__(self, z) -> Union[complex, np.ndarray]:
        return lp_eval(self, z)

    # ---- serialization ----

    def to_records(self) -> List[Dict]:
        """Terms as [{exponents, re, im}] sorted by exponent vector"""
        return [{'exponents': list(e), 're': self._terms[e].real, 'im': self._terms[e].imag}
                for e in sorted(self._terms)]

    @classmethod
    def from_records(cls, nvars: int, records: Iterable[Dict]) -> 'LaurentPoly':
        return cls(nvars, {tuple(r['exponents']): complex(r['re'], r['im']) for r in records})


# ---- module-level operations ----

def lp_add(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    return a + a._coerce(b)


def lp_mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    return a * a._coerce(b)


def lp_eval(p: LaurentPoly, z) -> Union[complex, np.ndarray]:
    """
    Evaluate at one point (shape (n,)) or many points (shape (N, n))

    Raises:
        DomainError: some z_i is zero
        LaurentError: wrong number of coordinates
    """
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    points = z.reshape(1, -1) if single else z
    if points.shape[-1] != p.nvars:
        raise LaurentError(f"expected {p.nvars} coordinates, got {points.shape[-1]}")
    if np.any(points == 0):
        raise DomainError("Laurent polynomials are undefined where a coordinate is zero")
    if p.is_zero:
        values = np.zeros(points.shape[0], dtype=complex)
    else:
        exps, coefs = p._exponent_arrays()
        monomials = np.prod(points[:, None, :] ** exps[None, :, :], axis=-1)
        values = monomials @ coefs
    return complex(values[0]) if single else values


def lp_residual(a: LaurentPoly, b: LaurentPoly) -> float:
    """max |coeff(a - b)| / max |coeff(a)|; 0 when both vanish"""
    scale = a.max_coeff
    diff = dict(a.terms)
    for e, c in a._coerce(b).terms.items():
        diff[e] = diff.get(e, 0j) - c
    top = max((abs(c) for c in diff.values()), default=0.0)
    if scale == 0.0:
        return 0.0 if top == 0.0 else math.inf
    return top / scale


class LaurentMatrix:
    """Square matrix of Laurent polynomials sharing one variable count"""

    def __init__(self, entries: Sequence[Sequence[LaurentPoly]]):
        rows = [list(row) for row in entries]
        self.m = len(rows)
        if self.m == 0 or any(len(row) != self.m for row in rows):
            raise ValidationError("LaurentMatrix must be square and non-empty")
        self.nvars = rows[0][0].nvars
        if any(entry.nvars != self.nvars for row in rows for entry in row):
            raise LaurentError("all entries must share nvars")
        self.entries = tuple(tuple(row) for row in rows)

    @classmethod
    def zeros(cls, m: int, nvars: int) -> 'LaurentMatrix':
        zero = LaurentPoly.zero(nvars)
        return cls([[zero] * m for _ in range(m)])

    def __getitem__(self, index: Tuple[int, int]) -> LaurentPoly:
        i, j = index
        return self.entries[i][j]

    def evaluate(self, z) -> np.ndarray:
        """Numeric m x m matrix at one point z"""
        return np.array([[lp_eval(entry, z) for entry in row] for row in self.entries], dtype=complex)

    def permuted(self, order: Sequence[int]) -> 'LaurentMatrix':
        """Simultaneous row and column permutation"""
        return LaurentMatrix([[self.entries[i][j] for j in order] for i in order])

    def plus_diagonal(self, diagonal: Sequence[Scalar]) -> 'LaurentMatrix':
        rows = [list(row) for row in self.entries]
        for i, value in enumerate(diagonal):
            rows[i][i] = rows[i][i] + value
        return LaurentMatrix(rows)


def _cofactor_det(rows: List[List[LaurentPoly]], nvars: int) -> LaurentPoly:
    m = len(rows)
    if m == 1:
        return rows[0][0]
    if m == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    pivot = max(range(m), key=lambda i: sum(entry.is_zero for entry in rows[i]))
    total = LaurentPoly.zero(nvars)
    for j, entry in enumerate(rows[pivot]):
        if entry.is_zero:
            continue
        minor = [row[:j] + row[j + 1:] for k, row in enumerate(rows) if k != pivot]
        term = entry * _cofactor_det(minor, nvars)
        total = total - term if (pivot + j) % 2 else total + term
    return total


def lp_det(matrix: LaurentMatrix) -> LaurentPoly:
    """
    Determinant by cofactor expansion along the sparsest row

    Raises:
        DimensionError: matrix larger than MAX_DET_DIMENSION
    """
    if matrix.m > MAX_DET_DIMENSION:
        raise DimensionError(f"cofactor determinant limited to {MAX_DET_DIMENSION}x{MAX_DET_DIMENSION}")
    return _cofactor_det([list(row) for row in matrix.entries], matrix.nvars)


# ---- symmetric polynomials ----

def symmetry_residual(p: LaurentPoly) -> float:
    """Largest lp_residual between p and p with one z_i replaced by 1/z_i"""
    return max(lp_residual(p, p.inverted(axis)) for axis in range(p.nvars))


def _chebyshev_expansion(exponent: Exponent) -> Dict[Exponent, int]:
    # prod_i (z_i + 1/z_i)^e_i
    factors = [[(e - 2 * j, math.comb(e, j)) for j in range(e + 1)] for e in exponent]
    expansion: Dict[Exponent, int] = {}
    for combo in itertools.product(*factors):
        key = tuple(power for power, _ in combo)
        expansion[key] = expansion.get(key, 0) + math.prod(weight for _, weight in combo)
    return expansion


def to_symmetric_basis(p: LaurentPoly, rel_floor: float = 1e-12) -> LaurentPoly:
    """
    Rewrite a polynomial invariant under every z_i -> 1/z_i in zeta_i = z_i + 1/z_i

    The result is a LaurentPoly whose variables are the zeta_i (all exponents
    non-negative). Lexicographically leading terms are peeled off one at a time.

    Raises:
        ValidationError: p is not symmetric
    """
    remainder = dict(p.terms)
    floor = rel_floor * p.max_coeff
    result: Dict[Exponent, complex] = {}
    while True:
        live = [e for e, c in remainder.items() if abs(c) > floor]
        if not live:
            break
        lead = max(live)
        if any(k < 0 for k in lead):
            raise ValidationError(f"polynomial is not symmetric (leading exponent {lead})")
        coef = remainder[lead]
        result[lead] = coef
        for e, weight in _chebyshev_expansion(lead).items():
            remainder[e] = remainder.get(e, 0j) - coef * weight
    return LaurentPoly(p.nvars, result)
