"""Capacities on small finite ground sets, stored as tables indexed by bitmask."""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, permutations
from math import comb

from envctl.algebra import iter_bits, set_partitions
from envctl.assessment import Prior, as_fraction

MAX_GROUND = 20
EXHAUSTIVE_GROUND = 6
EXHAUSTIVE_BUDGET = 300_000
PARTITION_BLOCKS = 7


class CapacityError(ValueError):
    pass


class NotTwoMonotone(CapacityError):
    pass


class GroundTooLarge(CapacityError):
    pass


def _popcount(m: int) -> int:
    return bin(m).count("1")


@dataclass(frozen=True)
class Capacity:
    ground: tuple[str, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        n = len(self.ground)
        if n > MAX_GROUND:
            raise GroundTooLarge(f"ground set of {n} elements exceeds the cap of {MAX_GROUND}")
        vals = tuple(as_fraction(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != 1 << n:
            raise CapacityError(f"expected {1 << n} values, got {len(vals)}")
        if vals[0] != 0 or vals[-1] != 1:
            raise CapacityError("a capacity vanishes on the empty set and equals 1 on the ground set")
        for m in range(1 << n):
            for b in range(n):
                if not m >> b & 1 and vals[m] > vals[m | 1 << b]:
                    raise CapacityError(f"not monotone at {self.labels(m)} + {self.ground[b]}")

    @classmethod
    def from_function(cls, ground: Sequence[str], f: Callable[[frozenset], Fraction]) -> Capacity:
        g = tuple(ground)
        return cls(g, tuple(f(frozenset(g[b] for b in iter_bits(m))) for m in range(1 << len(g))))

    @classmethod
    def from_dict(cls, ground: Sequence[str], table: dict) -> Capacity:
        """Missing subsets default to 0 (and the ground set to 1)."""
        g = tuple(ground)
        vals = [Fraction(0)] * (1 << len(g))
        vals[-1] = Fraction(1)
        for key, v in table.items():
            vals[mask_of(g, key)] = as_fraction(v)
        return cls(g, tuple(vals))

    @property
    def size(self) -> int:
        return len(self.ground)

    @property
    def full(self) -> int:
        return (1 << len(self.ground)) - 1

    def __call__(self, subset) -> Fraction:
        if isinstance(subset, int):
            return self.values[subset]
        return self.values[mask_of(self.ground, subset)]

    def labels(self, m: int) -> frozenset:
        return frozenset(self.ground[b] for b in iter_bits(m))


def mask_of(ground: Sequence[str], subset: Iterable[str] | str) -> int:
    if isinstance(subset, str):
        subset = [subset]
    m = 0
    for x in subset:
        try:
            m |= 1 << ground.index(x)
        except ValueError:
            raise CapacityError(f"{x!r} is not in the ground set") from None
    return m


@dataclass(frozen=True)
class MobiusRepresentation:
    ground: tuple[str, ...]
    mass: tuple[Fraction, ...]

    def __call__(self, subset) -> Fraction:
        if isinstance(subset, int):
            return self.mass[subset]
        return self.mass[mask_of(self.ground, subset)]

    def focal_sets(self) -> list[tuple[frozenset, Fraction]]:
        return [
            (frozenset(self.ground[b] for b in iter_bits(m)), x) for m, x in enumerate(self.mass) if x != 0
        ]


def mobius(v: Capacity) -> MobiusRepresentation:
    m = list(v.values)
    n = v.size
    for b in range(n):
        bit = 1 << b
        for s in range(1 << n):
            if s & bit:
                m[s] -= m[s ^ bit]
    return MobiusRepresentation(v.ground, tuple(m))


def unmobius(rep: MobiusRepresentation) -> Capacity:
    v = list(rep.mass)
    n = len(rep.ground)
    for b in range(n):
        bit = 1 << b
        for s in range(1 << n):
            if s & bit:
                v[s] += v[s ^ bit]
    return Capacity(rep.ground, tuple(v))


def dual(v: Capacity) -> Capacity:
    full = v.full
    return Capacity(v.ground, tuple(1 - v.values[full ^ m] for m in range(full + 1)))


def is_totally_monotone(v: Capacity) -> bool:
    return all(x >= 0 for x in mobius(v).mass)


@dataclass
class MonotonicityReport:
    ok: bool
    method: str
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def _inclusion_exclusion(v: Capacity, sets: Sequence[int]) -> Fraction:
    total = Fraction(0)
    for r in range(1, len(sets) + 1):
        sign = 1 if r % 2 else -1
        for idx in combinations(sets, r):
            inter = v.full
            for s in idx:
                inter &= s
            total += sign * v.values[inter]
    return total


def _exhaustive(v: Capacity, n: int) -> MonotonicityReport:
    subsets = range(v.full + 1)
    for sets in combinations_with_replacement(subsets, n):
        union = 0
        for s in sets:
            union |= s
        if v.values[union] < _inclusion_exclusion(v, sets):
            return MonotonicityReport(False, "exhaustive", tuple(v.labels(s) for s in sets))
    return MonotonicityReport(True, "exhaustive")


def _mobius_criterion(v: Capacity, n: int) -> MonotonicityReport:
    # n-monotone iff the Mobius masses between C and A add up to >= 0 whenever 2 <= |C| <= n
    m = mobius(v).mass
    full = v.full
    for c in range(full + 1):
        k = _popcount(c)
        if k < 2 or k > n:
            continue
        rest = full & ~c
        extra = rest
        while True:
            a = c | extra
            total = Fraction(0)
            sub = extra
            while True:
                total += m[c | sub]
                if sub == 0:
                    break
                sub = (sub - 1) & extra
            if total < 0:
                return MonotonicityReport(False, "mobius", (v.labels(c), v.labels(a)))
            if extra == 0:
                break
            extra = (extra - 1) & rest
    return MonotonicityReport(True, "mobius")


def is_n_monotone(v: Capacity, n: int, method: str = "auto") -> MonotonicityReport:
    """Test the n-monotonicity inequality.

    ``"exhaustive"`` checks it over every n-tuple of subsets (ground of at most 6 elements);
    ``"mobius"`` uses the equivalent sign condition on sums of Mobius masses; ``"auto"``
    picks the exhaustive route when the enumeration is small.
    """
    if n < 2:
        raise ValueError("n-monotonicity is defined for n >= 2")
    if method == "exhaustive":
        if v.size > EXHAUSTIVE_GROUND:
            raise GroundTooLarge(f"exhaustive check is capped at {EXHAUSTIVE_GROUND} elements")
        return _exhaustive(v, n)
    if method == "mobius":
        return _mobius_criterion(v, n)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    if v.size <= EXHAUSTIVE_GROUND and comb((1 << v.size) + n - 1, n) <= EXHAUSTIVE_BUDGET:
        return _exhaustive(v, n)
    return _mobius_criterion(v, n)


def core_vertices(v: Capacity) -> list[tuple[Fraction, ...]]:
    """Extreme points of the core: the marginal allocations along every ordering of the ground set."""
    rep = is_n_monotone(v, 2)
    if not rep:
        raise NotTwoMonotone(f"capacity is not 2-monotone (witness {rep.witness})")
    seen: dict[tuple[Fraction, ...], None] = {}
    for order in permutations(range(v.size)):
        p = [Fraction(0)] * v.size
        acc = 0
        for b in order:
            p[b] = v.values[acc | 1 << b] - v.values[acc]
            acc |= 1 << b
        seen.setdefault(tuple(p), None)
    return list(seen)


def choquet(X: Sequence, v: Capacity) -> Fraction:
    """Choquet integral of ``X`` (one value per ground element) by sorting."""
    xs = [as_fraction(x) for x in X]
    if len(xs) != v.size:
        raise CapacityError("X must give one value per ground element")
    order = sorted(range(v.size), key=lambda b: xs[b], reverse=True)
    total = xs[order[-1]]
    acc = 0
    for k in range(v.size - 1):
        acc |= 1 << order[k]
        total += (xs[order[k]] - xs[order[k + 1]]) * v.values[acc]
    return total


def expectation(X: Sequence, p: Sequence[Fraction]) -> Fraction:
    return sum((as_fraction(x) * q for x, q in zip(X, p)), Fraction(0))


@dataclass(frozen=True)
class BlockMeasure:
    """A probability on the algebra generated by a partition of a finite ground set."""

    ground: tuple[str, ...]
    blocks: tuple[int, ...]
    masses: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(as_fraction(m) for m in self.masses))
        seen = 0
        for b in self.blocks:
            if not b or b & seen:
                raise CapacityError("blocks must be nonempty and disjoint")
            seen |= b
        if seen != (1 << len(self.ground)) - 1:
            raise CapacityError("blocks must cover the ground set")
        if any(m < 0 for m in self.masses) or sum(self.masses) != 1:
            raise CapacityError("block masses must be a probability vector")

    @classmethod
    def from_prior(cls, prior: Prior) -> BlockMeasure:
        ground = prior.space.row_labels
        blocks = tuple(sum(1 << i for i in prior.sub.block_rows(t)) for t in range(len(prior.sub)))
        return cls(ground, blocks, prior.masses)

    @classmethod
    def from_sets(cls, ground: Sequence[str], blocks: Sequence[Iterable[str]], masses: Sequence) -> BlockMeasure:
        g = tuple(ground)
        return cls(g, tuple(mask_of(g, b) for b in blocks), tuple(masses))


def _as_block_measure(pi) -> BlockMeasure:
    return BlockMeasure.from_prior(pi) if isinstance(pi, Prior) else pi


def inner_measure(pi: BlockMeasure | Prior) -> Capacity:
    """``pi_*(E)``: total mass of the blocks contained in ``E``."""
    pi = _as_block_measure(pi)
    n = len(pi.ground)
    vals = []
    for m in range(1 << n):
        vals.append(sum((x for b, x in zip(pi.blocks, pi.masses) if b & m == b), Fraction(0)))
    return Capacity(pi.ground, tuple(vals))


def outer_measure(pi: BlockMeasure | Prior) -> Capacity:
    """``pi^*(E)``: total mass of the blocks meeting ``E``."""
    return dual(inner_measure(pi))


def _stieltjes(X: Sequence, pi, pick, all_partitions: bool) -> Fraction:
    pi = _as_block_measure(pi)
    xs = [as_fraction(x) for x in X]
    if len(xs) != len(pi.ground):
        raise CapacityError("X must give one value per ground element")
    cells = [(m, pick(xs[b] for b in iter_bits(blk))) for blk, m in zip(pi.blocks, pi.masses)]
    finest = sum((m * v for m, v in cells if m), Fraction(0))
    if not all_partitions:
        # merging blocks never moves the sum the right way, so the blocks attain the bound
        return finest
    if len(cells) > PARTITION_BLOCKS:
        raise CapacityError(f"partition enumeration is capped at {PARTITION_BLOCKS} blocks")
    best = finest
    for part in set_partitions(list(range(len(cells)))):
        total = Fraction(0)
        for group in part:
            total += sum(cells[t][0] for t in group) * pick(cells[t][1] for t in group)
        best = max(best, total) if pick is min else min(best, total)
    return best


def lower_stieltjes(X: Sequence, pi: BlockMeasure | Prior, all_partitions: bool = False) -> Fraction:
    """Supremum over finite measurable partitions of the sums of cellwise infima times mass.

    ``all_partitions=True`` takes the supremum literally over every partition of the blocks.
    """
    return _stieltjes(X, pi, min, all_partitions)


def upper_stieltjes(X: Sequence, pi: BlockMeasure | Prior, all_partitions: bool = False) -> Fraction:
    return _stieltjes(X, pi, max, all_partitions)
