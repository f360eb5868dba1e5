"""Prime-field arithmetic and nested coset codes with sum-coset closure.

A nested coset code over F_v maps an index pair (a, m) to
``a g_I + m g_{O/I} + b`` (all arithmetic mod v).  Two codes whose
generator rows are prefix-contained in each other sum into a single
coset of the containing code indexed by m2 + m3, which is the algebraic
fact the decoding construction rides on.

Randomness comes from numpy's PCG64 (``numpy.random.default_rng``),
seeded explicitly everywhere, so every experiment replays bit-for-bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .config import ENUMERATION_CAP
from .errors import (DomainError, IncompatiblePair, LengthMismatch, NotPrime,
                     TooLarge)

SUPPORTED_MODULI = (2, 3, 5, 7)


def _check_modulus(v: int) -> int:
    v = int(v)
    if v not in SUPPORTED_MODULI:
        raise NotPrime(f"modulus must be a prime in {SUPPORTED_MODULI}, got {v}")
    return v


@dataclass(frozen=True)
class FieldElem:
    """An element of the prime field F_v."""

    value: int
    modulus: int

    def __post_init__(self):
        object.__setattr__(self, "modulus", _check_modulus(self.modulus))
        object.__setattr__(self, "value", int(self.value) % self.modulus)

    def _coerce(self, other):
        if isinstance(other, FieldElem):
            if other.modulus != self.modulus:
                raise IncompatiblePair("field moduli differ")
            return other.value
        return int(other)

    def __add__(self, other):
        return FieldElem(self.value + self._coerce(other), self.modulus)

    def __sub__(self, other):
        return FieldElem(self.value - self._coerce(other), self.modulus)

    def __mul__(self, other):
        return FieldElem(self.value * self._coerce(other), self.modulus)

    def __neg__(self):
        return FieldElem(-self.value, self.modulus)


def _as_field_array(x, modulus, length, what) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=np.int64))
    if arr.ndim != 1 or arr.size != length:
        raise LengthMismatch(f"{what} must have length {length}, got {arr.size}")
    return arr % modulus


@dataclass(frozen=True)
class NestedCosetCode:
    """Coset code u(a, m) = a g_I + m g_{O/I} + bias over F_modulus."""

    n: int
    k: int
    l: int
    g_i: np.ndarray
    g_oi: np.ndarray
    bias: np.ndarray
    modulus: int

    def __post_init__(self):
        v = _check_modulus(self.modulus)
        n, k, l = int(self.n), int(self.k), int(self.l)
        if n <= 0 or k < 0 or l < 0:
            raise DomainError(f"bad code dimensions n={n} k={k} l={l}")
        g_i = np.asarray(self.g_i, dtype=np.int64).reshape(k, n) % v
        g_oi = np.asarray(self.g_oi, dtype=np.int64).reshape(l, n) % v
        bias = np.asarray(self.bias, dtype=np.int64).reshape(n) % v
        for name, arr in (("g_i", g_i), ("g_oi", g_oi), ("bias", bias)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "modulus", v)

    @property
    def rate(self) -> float:
        return (self.l / self.n) * np.log2(self.modulus)

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n, "k": self.k, "l": self.l, "modulus": self.modulus,
            "g_i": self.g_i.ravel().tolist(),
            "g_oi": self.g_oi.ravel().tolist(),
            "bias": self.bias.tolist(),
        })

    @classmethod
    def from_json(cls, blob: str) -> "NestedCosetCode":
        d = json.loads(blob)
        return cls(d["n"], d["k"], d["l"], d["g_i"], d["g_oi"], d["bias"],
                   d["modulus"])


def _prefix_contained(small: np.ndarray, large: np.ndarray) -> bool:
    r = small.shape[0]
    return r <= large.shape[0] and bool(np.array_equal(small, large[:r]))


@dataclass(frozen=True)
class CodePair:
    """Two nested coset codes whose generator rows are prefix-contained.

    The code with fewer rows (per generator) must be the literal row
    prefix of the other, which makes the elementwise sum of any two
    codewords land in the coset of the containing code indexed by the
    (padded) sum of the two messages.
    """

    code2: NestedCosetCode
    code3: NestedCosetCode

    def __post_init__(self):
        c2, c3 = self.code2, self.code3
        if c2.modulus != c3.modulus:
            raise IncompatiblePair(f"moduli differ: {c2.modulus} vs {c3.modulus}")
        if c2.n != c3.n:
            raise IncompatiblePair(f"blocklengths differ: {c2.n} vs {c3.n}")
        for a, b, what in ((c2.g_i, c3.g_i, "g_i"), (c2.g_oi, c3.g_oi, "g_oi")):
            small, large = (a, b) if a.shape[0] <= b.shape[0] else (b, a)
            if not _prefix_contained(small, large):
                raise IncompatiblePair(f"{what} rows are not prefix-contained")

    @property
    def modulus(self) -> int:
        return self.code2.modulus


def codeword(code: NestedCosetCode, a, m) -> np.ndarray:
    """a g_I + m g_{O/I} + bias over F_modulus."""
    v = code.modulus
    av = _as_field_array(a, v, code.k, "index a") if code.k else np.zeros(0, np.int64)
    mv = _as_field_array(m, v, code.l, "message m") if code.l else np.zeros(0, np.int64)
    out = code.bias.copy()
    if code.k:
        out = out + av @ code.g_i
    if code.l:
        out = out + mv @ code.g_oi
    return out % v


def _pad(vec: np.ndarray, length: int) -> np.ndarray:
    if vec.size == length:
        return vec
    out = np.zeros(length, dtype=np.int64)
    out[:vec.size] = vec
    return out


def sum_code(pair: CodePair) -> NestedCosetCode:
    """The containing code: k = max k_j, l = max l_j, bias = b2 + b3."""
    c2, c3 = pair.code2, pair.code3
    g_i = c2.g_i if c2.k >= c3.k else c3.g_i
    g_oi = c2.g_oi if c2.l >= c3.l else c3.g_oi
    return NestedCosetCode(c2.n, max(c2.k, c3.k), max(c2.l, c3.l),
                           g_i, g_oi, (c2.bias + c3.bias) % c2.modulus,
                           c2.modulus)


def sum_codeword(pair: CodePair, a2, m2, a3, m3) -> np.ndarray:
    """codeword(code2, a2, m2) + codeword(code3, a3, m3) elementwise mod v.

    Lies in coset (padded m2 + m3) of ``sum_code(pair)``.
    """
    u2 = codeword(pair.code2, a2, m2)
    u3 = codeword(pair.code3, a3, m3)
    return (u2 + u3) % pair.modulus


def sum_message(pair: CodePair, m2, m3) -> np.ndarray:
    """The coset index of the containing code that sum_codeword lands in."""
    v = pair.modulus
    l = max(pair.code2.l, pair.code3.l)
    m2v = _as_field_array(m2, v, pair.code2.l, "m2") if pair.code2.l \
        else np.zeros(0, np.int64)
    m3v = _as_field_array(m3, v, pair.code3.l, "m3") if pair.code3.l \
        else np.zeros(0, np.int64)
    return (_pad(m2v, l) + _pad(m3v, l)) % v


def index_tuples(modulus: int, length: int) -> np.ndarray:
    """All v^length tuples over F_v, lexicographic, as a (v^length, length) array."""
    count = modulus ** length
    if count > ENUMERATION_CAP:
        raise TooLarge(f"{count} tuples exceed the enumeration cap")
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(count, dtype=np.int64)
    cols = []
    for pos in range(length - 1, -1, -1):
        cols.append((idx // modulus ** pos) % modulus)
    return np.stack(cols, axis=1)


def enumerate_coset(code: NestedCosetCode, m) -> np.ndarray:
    """All v^k codewords of coset m, as rows; duplicates retained.

    A singular g_I yields repeated rows on purpose: downstream counting
    (likelihood masses, uniform index draws) works with multiplicity.
    """
    if code.modulus ** code.k > ENUMERATION_CAP:
        raise TooLarge(f"coset of size {code.modulus ** code.k} exceeds cap")
    a_all = index_tuples(code.modulus, code.k)
    v = code.modulus
    mv = _as_field_array(m, v, code.l, "message m") if code.l else np.zeros(0, np.int64)
    base = code.bias.copy()
    if code.l:
        base = base + mv @ code.g_oi
    rows = base[None, :]
    if code.k:
        rows = rows + a_all @ code.g_i
    return rows % v


def random_nested_code(n: int, k: int, l: int, modulus: int,
                       rng_seed) -> NestedCosetCode:
    """Generator and bias entries i.i.d. uniform over F_v from PCG64(seed)."""
    v = _check_modulus(modulus)
    rng = np.random.default_rng(rng_seed)
    g_i = rng.integers(0, v, size=(k, n), dtype=np.int64)
    g_oi = rng.integers(0, v, size=(l, n), dtype=np.int64)
    bias = rng.integers(0, v, size=n, dtype=np.int64)
    return NestedCosetCode(n, k, l, g_i, g_oi, bias, v)


def random_code_pair(n: int, k2: int, l2: int, k3: int, l3: int,
                     modulus: int, rng_seed) -> CodePair:
    """Random pair with prefix-contained generators and independent biases."""
    v = _check_modulus(modulus)
    rng = np.random.default_rng(rng_seed)
    g_i = rng.integers(0, v, size=(max(k2, k3), n), dtype=np.int64)
    g_oi = rng.integers(0, v, size=(max(l2, l3), n), dtype=np.int64)
    b2 = rng.integers(0, v, size=n, dtype=np.int64)
    b3 = rng.integers(0, v, size=n, dtype=np.int64)
    code2 = NestedCosetCode(n, k2, l2, g_i[:k2], g_oi[:l2], b2, v)
    code3 = NestedCosetCode(n, k3, l3, g_i[:k3], g_oi[:l3], b3, v)
    return CodePair(code2, code3)
