"""Combinatorial bit <-> index mappings and communication-rate bookkeeping.

Combinations are ranked in colexicographic order (combinadic), permutations
in lexicographic order (Lehmer code). Bit strings are packed big-endian:
the first bit is the most significant bit of the rank.

Only the first ``2**floor(log2(count))`` patterns of every space are used as
codewords, so a block of ``b`` bits always maps to a valid pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CodebookError",
    "SelectionPattern",
    "OrderedAssignment",
    "CodebookSpec",
    "RateReport",
    "binomial",
    "bits_for_selection",
    "floor_log2",
    "rank_combination",
    "unrank_combination",
    "rank_permutation",
    "unrank_permutation",
    "rank_assignment",
    "unrank_assignment",
    "assignment_count",
    "rank_partition",
    "unrank_partition",
    "partition_count",
    "bits_to_int",
    "int_to_bits",
    "build_lut",
    "scheme_rate",
    "SCHEMES",
    "MAX_LUT_BITS",
]

MAX_BINOMIAL_N = 62
MAX_LUT_BITS = 20


class CodebookError(ValueError):
    """Raised for invalid combinatorial parameters or out-of-range ranks."""


@dataclass(frozen=True)
class SelectionPattern:
    """A sorted ``k``-of-``n`` index subset."""

    indices: tuple[int, ...]
    n: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise CodebookError(f"indices must be strictly increasing: {idx}")
        if idx and (idx[0] < 0 or idx[-1] >= self.n):
            raise CodebookError(f"indices {idx} outside [0, {self.n})")

    @property
    def k(self) -> int:
        return len(self.indices)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[list(self.indices)] = True
        return m


@dataclass(frozen=True)
class OrderedAssignment:
    """Selected items plus the slot order they are handed out in.

    Slot ``j`` receives ``pattern.indices[order[j]]``.
    """

    pattern: SelectionPattern
    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(o) for o in self.order)
        object.__setattr__(self, "order", order)
        if sorted(order) != list(range(self.pattern.k)):
            raise CodebookError(f"order {order} is not a permutation of range({self.pattern.k})")

    def items(self) -> tuple[int, ...]:
        """Item assigned to each slot."""
        return tuple(self.pattern.indices[o] for o in self.order)

    @classmethod
    def from_items(cls, items: Sequence[int], n: int) -> "OrderedAssignment":
        items = [int(i) for i in items]
        if len(set(items)) != len(items):
            raise CodebookError(f"items must be distinct: {items}")
        srt = sorted(items)
        return cls(SelectionPattern(tuple(srt), n), tuple(srt.index(i) for i in items))


@dataclass(frozen=True)
class CodebookSpec:
    """Size of a single index codebook."""

    k: int
    n: int
    ordered: bool = False

    @property
    def count(self) -> int:
        return assignment_count(self.k, self.n) if self.ordered else binomial(self.k, self.n)

    @property
    def exact_bits(self) -> int:
        return floor_log2(self.count)

    @property
    def nominal_bits(self) -> int:
        if self.ordered:
            return floor_log2(binomial(self.k, self.n)) + floor_log2(math.factorial(self.k))
        return bits_for_selection(self.k, self.n)


@dataclass(frozen=True)
class RateReport:
    """Bits per channel use of one scheme.

    ``nominal_bits`` evaluates the published closed-form rate; ``exact_bits``
    is what the transmit chain actually carries, i.e. the sum over the
    independently mapped bit groups of ``floor(log2(group size))``.
    """

    scheme: str
    params: dict
    nominal_bits: int
    exact_bits: int
    groups: dict = field(default_factory=dict)

    @property
    def params_str(self) -> str:
        return ";".join(f"{k}={v}" for k, v in self.params.items())


def _check_kn(k: int, n: int) -> None:
    if k < 0 or n < 0 or k > n:
        raise CodebookError(f"need 0 <= k <= n, got k={k}, n={n}")


def binomial(k: int, n: int) -> int:
    """Number of ways to select ``k`` of ``n`` items."""
    _check_kn(k, n)
    if n > MAX_BINOMIAL_N:
        raise CodebookError(f"n={n} exceeds the exact-arithmetic guard {MAX_BINOMIAL_N}")
    return math.comb(n, k)


def floor_log2(x: int) -> int:
    if x < 1:
        raise CodebookError(f"floor_log2 needs a positive integer, got {x}")
    return int(x).bit_length() - 1


def bits_for_selection(k: int, n: int) -> int:
    return floor_log2(binomial(k, n))


def _codeword_limit(count: int) -> int:
    return 1 << floor_log2(count)


def _check_rank(r: int, limit: int) -> int:
    r = int(r)
    if not 0 <= r < limit:
        raise CodebookError(f"rank {r} outside [0, {limit})")
    return r


# -- combinations ----------------------------------------------------------

def _rank_comb_full(indices: Sequence[int]) -> int:
    return sum(math.comb(c, i + 1) for i, c in enumerate(indices))


def _unrank_comb_full(r: int, k: int, n: int) -> tuple[int, ...]:
    out = [0] * k
    for i in range(k, 0, -1):
        c = i - 1
        while math.comb(c + 1, i) <= r:
            c += 1
        out[i - 1] = c
        r -= math.comb(c, i)
    return tuple(out)


def rank_combination(p: SelectionPattern, full: bool = False) -> int:
    """Colex rank of ``p``.

    With ``full=False`` (default) the rank must be a codeword, i.e. lie below
    ``2**bits_for_selection(k, n)``.
    """
    r = _rank_comb_full(p.indices)
    limit = binomial(p.k, p.n) if full else _codeword_limit(binomial(p.k, p.n))
    if r >= limit:
        raise CodebookError(f"pattern {p.indices} has rank {r}, not a codeword (< {limit})")
    return r


def unrank_combination(r: int, k: int, n: int, full: bool = False) -> SelectionPattern:
    count = binomial(k, n)
    r = _check_rank(r, count if full else _codeword_limit(count))
    return SelectionPattern(_unrank_comb_full(r, k, n), n)


# -- permutations ----------------------------------------------------------

def _rank_perm_full(order: Sequence[int]) -> int:
    k = len(order)
    r = 0
    for i, v in enumerate(order):
        smaller = sum(1 for w in order[i + 1:] if w < v)
        r += smaller * math.factorial(k - 1 - i)
    return r


def _unrank_perm_full(r: int, k: int) -> tuple[int, ...]:
    pool = list(range(k))
    out = []
    for i in range(k - 1, -1, -1):
        f = math.factorial(i)
        q, r = divmod(r, f)
        out.append(pool.pop(q))
    return tuple(out)


def rank_permutation(order: Sequence[int], full: bool = False) -> int:
    """Lexicographic (Lehmer code) rank of a permutation of ``range(k)``."""
    order = [int(o) for o in order]
    k = len(order)
    if sorted(order) != list(range(k)):
        raise CodebookError(f"{order} is not a permutation of range({k})")
    r = _rank_perm_full(order)
    limit = math.factorial(k) if full else _codeword_limit(math.factorial(k))
    if r >= limit:
        raise CodebookError(f"permutation {order} has rank {r}, not a codeword (< {limit})")
    return r


def unrank_permutation(r: int, k: int, full: bool = False) -> tuple[int, ...]:
    if k < 0:
        raise CodebookError(f"k must be non-negative, got {k}")
    count = math.factorial(k)
    r = _check_rank(r, count if full else _codeword_limit(count))
    return _unrank_perm_full(r, k)


# -- ordered assignments: k distinct items out of n, in slot order ---------

def assignment_count(k: int, n: int) -> int:
    return binomial(k, n) * math.factorial(k)


def rank_assignment(a: OrderedAssignment, full: bool = False) -> int:
    """Mixed-radix rank ``combination_rank * k! + permutation_rank``."""
    k, n = a.pattern.k, a.pattern.n
    r = _rank_comb_full(a.pattern.indices) * math.factorial(k) + _rank_perm_full(a.order)
    count = assignment_count(k, n)
    if r >= (count if full else _codeword_limit(count)):
        raise CodebookError(f"assignment {a.items()} has rank {r}, not a codeword")
    return r


def unrank_assignment(r: int, k: int, n: int, full: bool = False) -> OrderedAssignment:
    count = assignment_count(k, n)
    r = _check_rank(r, count if full else _codeword_limit(count))
    c, q = divmod(r, math.factorial(k))
    return OrderedAssignment(SelectionPattern(_unrank_comb_full(c, k, n), n), _unrank_perm_full(q, k))


# -- equal-size labeled partitions -----------------------------------------

def partition_count(n: int, groups: int) -> int:
    """Ways to split ``n`` labeled items into ``groups`` labeled groups of equal size."""
    if groups < 1 or n % groups:
        raise CodebookError(f"groups={groups} must divide n={n}")
    size = n // groups
    return math.factorial(n) // math.factorial(size) ** groups


def rank_partition(labels: Sequence[int], groups: int) -> int:
    """Rank a group labelling ``labels[item] = group``.

    Group 0 members are chosen first among all items, group 1 among the
    remaining ones, and so on; each choice is a colex combination rank.
    """
    labels = [int(g) for g in labels]
    n = len(labels)
    total = partition_count(n, groups)
    size = n // groups
    remaining = list(range(n))
    r = 0
    for g in range(groups - 1):
        members = [i for i in remaining if labels[i] == g]
        if len(members) != size:
            raise CodebookError(f"group {g} has {len(members)} members, expected {size}")
        pos = [remaining.index(i) for i in members]
        radix = math.comb(len(remaining), size)
        r = r * radix + _rank_comb_full(pos)
        remaining = [i for i in remaining if labels[i] != g]
    if any(labels[i] != groups - 1 for i in remaining):
        raise CodebookError(f"labels {labels} are not a valid {groups}-group partition")
    assert r < total
    return r


def unrank_partition(r: int, n: int, groups: int) -> tuple[int, ...]:
    total = partition_count(n, groups)
    r = _check_rank(r, total)
    size = n // groups
    radices = []
    m = n
    for _ in range(groups - 1):
        radices.append(math.comb(m, size))
        m -= size
    digits = []
    for radix in reversed(radices):
        r, d = divmod(r, radix)
        digits.append(d)
    digits.reverse()
    labels = [groups - 1] * n
    remaining = list(range(n))
    for g, d in enumerate(digits):
        pos = _unrank_comb_full(d, size, len(remaining))
        chosen = [remaining[p] for p in pos]
        for i in chosen:
            labels[i] = g
        remaining = [i for i in remaining if i not in chosen]
    return tuple(labels)


# -- bit packing -------------------------------------------------------------

def bits_to_int(bits: Iterable[int]) -> int:
    """Big-endian: the first bit is the most significant."""
    v = 0
    for b in bits:
        v = (v << 1) | (int(b) & 1)
    return v


def int_to_bits(value: int, width: int) -> np.ndarray:
    value = int(value)
    if width < 0 or value < 0 or value >> width:
        raise CodebookError(f"{value} does not fit in {width} bits")
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def build_lut(spec: CodebookSpec) -> list:
    """All codewords of ``spec``; entry ``i`` is the pattern for bit value ``i``."""
    bits = spec.exact_bits
    if bits > MAX_LUT_BITS:
        raise MemoryError(f"lookup table of 2**{bits} entries exceeds 2**{MAX_LUT_BITS}")
    if spec.ordered:
        return [unrank_assignment(i, spec.k, spec.n) for i in range(1 << bits)]
    return [unrank_combination(i, spec.k, spec.n) for i in range(1 << bits)]


# -- per-scheme rates ------------------------------------------------------

def _log2_int(m: int) -> int:
    if m < 1 or m & (m - 1):
        raise CodebookError(f"constellation order M={m} must be a power of two")
    return m.bit_length() - 1


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise CodebookError(msg)


def _rate_subcarrier(K: int, K_s: int, M: int = 1) -> tuple[int, dict]:
    _require(1 <= K_s <= K, "subcarrier: need 1 <= K_s <= K")
    sym = K_s * _log2_int(M)
    idx = bits_for_selection(K_s, K)
    return sym + idx, {"symbol": sym, "index": idx}


def _rate_antenna(N: int, N_s: int, M: int = 1) -> tuple[int, dict]:
    _require(1 <= N_s <= N, "antenna: need 1 <= N_s <= N")
    sym = N_s * _log2_int(M)
    idx = bits_for_selection(N_s, N)
    return sym + idx, {"symbol": sym, "index": idx}


def _rate_majorcom(N: int, K: int, reuse: bool = False) -> tuple[int, dict, int]:
    _require(N >= 1 and K >= 1, "majorcom: need N >= 1 and K >= 1")
    nominal = _floor_mul_log2(N, K)
    if reuse:
        return nominal, {"assignment": floor_log2(K**N)}, nominal
    _require(N <= K, "majorcom: need N <= K for distinct frequencies")
    exact = floor_log2(assignment_count(N, K))
    return exact, {"assignment": exact}, nominal


def _rate_grouped(N: int, K: int, G: int) -> tuple[int, dict, int]:
    _require(G >= 1 and N % G == 0, "grouped: G must divide N")
    _require(G <= K, "grouped: need G <= K")
    count = binomial(G, K) * partition_count(N, G)
    exact = floor_log2(count)
    nominal = _floor_mul_log2(G, K) + _floor_mul_log2(N, G)
    return exact, {"pattern": exact}, nominal


def _floor_mul_log2(a: int, b: int) -> int:
    """floor(a * log2(b)) in exact integer arithmetic."""
    return floor_log2(b**a)


def _rate_frac(N: int, N_s: int, K: int, M: int = 1) -> tuple[int, dict]:
    _require(1 <= N_s <= N, "frac: need 1 <= N_s <= N")
    _require(N_s <= K, "frac: need N_s <= K")
    groups = {
        "phase": N_s * _log2_int(M),
        "frequency": bits_for_selection(N_s, K),
        "antenna": bits_for_selection(N_s, N),
        "permutation": floor_log2(math.factorial(N_s)),
    }
    return sum(groups.values()), groups


def _rate_fh(H: int, N: int, K: int) -> tuple[int, dict, int]:
    _require(H >= 1, "fh: need H >= 1")
    _require(1 <= N <= K, "fh: need 1 <= N <= K")
    per_hop_codes = floor_log2(assignment_count(N, K))
    nominal = H * (N + floor_log2(binomial(N, K) * math.factorial(N)))
    exact = H * (N + per_hop_codes)
    return exact, {"phase": H * N, "code": H * per_hop_codes}, nominal


def _rate_spim(L_C: int, L_s: int) -> tuple[int, dict]:
    _require(1 <= L_s <= L_C, "spim: need 1 <= L_s <= L_C")
    idx = bits_for_selection(L_s, L_C)
    return idx, {"index": idx}


SCHEMES = ("subcarrier", "antenna", "majorcom", "grouped", "frac", "fh", "spim")


def scheme_rate(scheme: str, **params) -> RateReport:
    """Nominal (closed-form) and exact (carried) bits per channel use.

    >>> r = scheme_rate("majorcom", N=4, K=8)
    >>> (r.nominal_bits, r.exact_bits)
    (12, 10)
    """
    try:
        if scheme in ("subcarrier", "antenna", "frac", "spim"):
            fn = {"subcarrier": _rate_subcarrier, "antenna": _rate_antenna,
                  "frac": _rate_frac, "spim": _rate_spim}[scheme]
            bits, groups = fn(**params)
            return RateReport(scheme, dict(params), bits, bits, groups)
        if scheme in ("majorcom", "grouped", "fh"):
            fn = {"majorcom": _rate_majorcom, "grouped": _rate_grouped, "fh": _rate_fh}[scheme]
            exact, groups, nominal = fn(**params)
            return RateReport(scheme, dict(params), nominal, exact, groups)
    except TypeError as exc:
        raise CodebookError(f"{scheme}: bad parameters {sorted(params)}: {exc}") from None
    raise CodebookError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")

