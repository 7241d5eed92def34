"""Closed-form envelopes of extensions of a prior and a strategy on finite instances.

A finite instance is an :class:`AtomSpace`, a :class:`Prior` whose blocks are unions of
rows, and a :class:`Strategy`.  Joint probabilities consistent with the pair put mass
``x_i`` on each row with ``sum_{i in B} x_i = pi(B)`` and spread it by ``sigma(.|H_i)``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from envctl.algebra import EmptyConditioning, Event
from envctl.assessment import EventNotInPriorAlgebra, Prior, Strategy
from envctl.capacity import BlockMeasure, Capacity, lower_stieltjes, upper_stieltjes
from envctl.lp import RationalLP

ZERO = Fraction(0)
ONE = Fraction(1)


class NotIntegrable(ValueError):
    pass


@dataclass(frozen=True)
class EnvelopeResult:
    lower: Fraction
    upper: Fraction
    case_tag: str
    upper_tag: str = ""
    aux: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper <= 1:
            raise ValueError(f"inconsistent envelope [{self.lower}, {self.upper}]")

    @property
    def interval(self) -> tuple[Fraction, Fraction]:
        return self.lower, self.upper

    def within(self, other: EnvelopeResult) -> bool:
        return other.lower <= self.lower and self.upper <= other.upper


def _check_k(K: Event) -> None:
    if K.is_empty:
        raise EmptyConditioning("conditioning event must be nonempty")


def _rows_meeting(K: Event) -> list[int]:
    return K.space.rows_meeting(K)


def _hull(K: Event) -> Event:
    sp = K.space
    m = 0
    for i in _rows_meeting(K):
        m |= sp.row_masks[i]
    return Event(sp, m)


def is_row_event(K: Event) -> bool:
    """``K`` belongs to the algebra generated by the conditioning cells."""
    return _hull(K) == K


def _block_rows(prior: Prior) -> tuple[tuple[int, ...], ...]:
    return prior.block_rows


def joint_is_unique(prior: Prior) -> bool:
    """Every block carrying mass is a single cell, which pins down the joint."""
    return all(len(rows) == 1 or m == 0 for rows, m in zip(_block_rows(prior), prior.masses))


# -- joints -----------------------------------------------------------------------------


def _memo(prior: Prior, sigma: Strategy) -> dict:
    """Per-(prior, sigma) cache of joint integrals, kept on the strategy.

    The entry holds the prior itself, so its ``id`` cannot be recycled while cached.
    """
    store = sigma.__dict__.setdefault("_joint_cache", {})
    hit = store.get(id(prior))
    if hit is None or hit[0] is not prior:
        hit = store[id(prior)] = (prior, {})
    return hit[1]


def _lower_cached(prior: Prior, sigma: Strategy, kind: str, F: Event, K: Event, compute) -> tuple[Fraction, str, dict]:
    # a conditional value depends on F only through F & K
    memo = _memo(prior, sigma)
    key = (kind, (F & K).mask, K.mask)
    hit = memo.get(key)
    if hit is None:
        hit = memo[key] = compute(F, K)
    return hit


def lower_joint(prior: Prior, sigma: Strategy, F: Event) -> Fraction:
    """Lower joint probability of ``F``.

    The supremum over finite partitions drawn from the prior's algebra of the sums of
    ``pi(cell) * min sigma(F|H_i)`` over each cell.  A block of several rows cannot hide
    mass outside its rows on a finite instance, so each cell contributes its smallest
    ``sigma`` value rather than counting only when contained in ``F``.  Merging blocks
    can only lower such a sum, so the finest partition attains the supremum.
    """
    memo = _memo(prior, sigma)
    key = ("lower", F.mask)
    if key not in memo:
        total = ZERO
        for rows, m in zip(prior.block_rows, prior.masses):
            if m:
                total += m * min(sigma(F, i) for i in rows)
        memo[key] = total
    return memo[key]


def upper_joint(prior: Prior, sigma: Strategy, F: Event) -> Fraction:
    return 1 - lower_joint(prior, sigma, ~F)


def _joint_lp(prior: Prior) -> RationalLP:
    n = prior.space.n_conditioning
    lp = RationalLP(n)
    for rows, m in zip(_block_rows(prior), prior.masses):
        lp.add_eq({i: 1 for i in rows}, m)
    return lp


def _two_stage(build, a: Sequence[Fraction], b: Sequence[Fraction], first: str) -> Fraction:
    """Optimize ``a.x`` over the face where ``b.x`` is at its max (``first="max"``) or min."""
    lp = build()
    pin = lp.maximize(b) if first == "max" else lp.minimize(b)
    lp.add_eq(list(b), pin.value)
    return (lp.minimize(a) if first == "max" else lp.maximize(a)).value


def joint_aux(prior: Prior, sigma: Strategy, F: Event, K: Event) -> dict[str, Fraction]:
    """``L^j(F,K)``, ``U^j(F^c,K)`` and the joint envelopes they are compared against."""
    a = sigma.row(F & K)
    b = sigma.row(~F & K)
    build = lambda: _joint_lp(prior)  # noqa: E731
    Lj = _two_stage(build, a, b, "max")
    Uj_c = _two_stage(build, b, a, "min")
    lo_fk = lower_joint(prior, sigma, F & K)
    up_fck = upper_joint(prior, sigma, ~F & K)
    c1 = lo_fk / (lo_fk + Uj_c) if lo_fk + Uj_c else None
    c2 = Lj / (Lj + up_fck) if Lj + up_fck else None
    return {"L_j": Lj, "U_j_complement": Uj_c, "lower_joint_FK": lo_fk, "upper_joint_FcK": up_fck, "candidates": (c1, c2)}


def _min_ratio_over_joints(prior: Prior, a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    # Charnes-Cooper: y = t x with b.y = 1 turns the ratio into a linear objective
    n = prior.space.n_conditioning
    lp = RationalLP(n + 1)
    for rows, m in zip(_block_rows(prior), prior.masses):
        row = {i: 1 for i in rows}
        row[n] = -m
        lp.add_eq(row, 0)
    lp.add_eq(list(b) + [ZERO], 1)
    return lp.minimize(list(a) + [ZERO]).value


# -- the I1 / I2 / I3 classification ----------------------------------------------------


def index_sets(F: Event, K: Event) -> tuple[list[int], list[int], list[int]]:
    """Rows meeting ``K`` split by whether they meet ``F & K`` and ``~F & K``."""
    _check_k(K)
    sp = K.space
    fk, fck = (F & K).mask, (~F & K).mask
    i1, i2, i3 = [], [], []
    for i in _rows_meeting(K):
        r = sp.row_masks[i]
        a, b = bool(r & fk), bool(r & fck)
        (i2 if a and b else i1 if a else i3).append(i)
    return i1, i2, i3


def _null_formula(sigma: Strategy, F: Event, K: Event) -> tuple[Fraction, str, dict]:
    i1, i2, i3 = index_sets(F, K)
    aux = {"I1": i1, "I2": i2, "I3": i3}
    if i3:
        return ZERO, "null-I3-zero", aux
    fk = F & K
    ratios = []
    for i in i2:
        den = sigma(K, i)
        if den == 0:
            return ZERO, "null-I2-zero", aux
        ratios.append(sigma(fk, i) / den)
    if not ratios:
        return ONE, "sure", aux
    return min(ratios), "null-I2-min", aux


# -- coherent extensions ----------------------------------------------------------------


def _coherent_lower(
    prior: Prior, sigma: Strategy, F: Event, K: Event, with_aux: bool = False
) -> tuple[Fraction, str, dict]:
    if K <= F:
        return ONE, "sure", {}
    lk = lower_joint(prior, sigma, K)
    if lk > 0:
        if joint_is_unique(prior):
            # the lower joint is the joint itself here
            return lower_joint(prior, sigma, F & K) / lk, "positive-ratio", {"lower_joint_K": lk}
        a, b = sigma.row(F & K), sigma.row(K)
        aux = joint_aux(prior, sigma, F, K) if with_aux else {}
        aux["lower_joint_K"] = lk
        return _min_ratio_over_joints(prior, a, b), "positive-ratio-lp", aux
    return _null_formula(sigma, F, K)


def conditional_envelope(
    prior: Prior, sigma: Strategy, F: Event, K: Event, with_aux: bool = False
) -> EnvelopeResult:
    """Envelope of ``P(F|K)`` over every full conditional probability extending ``{pi, sigma}``.

    When the joint is not unique, the positive-mass branch minimizes the ratio over the
    joint polytope directly; the two-term expression in ``L^j``/``U^j`` is reported in
    ``aux["candidates"]`` (with ``with_aux=True``) and agrees with it whenever the joint
    is unique.
    """
    _check_k(K)
    if with_aux:
        lo, tag, aux = _coherent_lower(prior, sigma, F, K, True)
        lo_c, tag_c, aux_c = _coherent_lower(prior, sigma, ~F, K, True)
    else:
        low = lambda G, C: _coherent_lower(prior, sigma, G, C)  # noqa: E731
        lo, tag, aux = _lower_cached(prior, sigma, "coherent", F, K, low)
        lo_c, tag_c, aux_c = _lower_cached(prior, sigma, "coherent", ~F, K, low)
    aux = dict(aux, complement=aux_c)
    return EnvelopeResult(lo, 1 - lo_c, tag, tag_c, aux)


# -- disintegrable joint ----------------------------------------------------------------


def disintegrable_joint(prior: Prior, sigma: Strategy, F: Event) -> Fraction:
    """``int sigma(F|.) dpi``, defined when the lower and upper Stieltjes integrals agree."""
    memo = _memo(prior, sigma)
    key = ("dis", F.mask)
    if key in memo:
        return memo[key]
    lo = hi = ZERO
    for rows, m in zip(prior.block_rows, prior.masses):
        if m:
            vals = [sigma(F, i) for i in rows]
            lo += m * min(vals)
            hi += m * max(vals)
    if lo != hi:
        raise NotIntegrable(f"sigma({F!r}|.) is not integrable: lower {lo} < upper {hi}")
    memo[key] = lo
    return lo


def _dis_lower(prior: Prior, sigma: Strategy, F: Event, K: Event) -> tuple[Fraction, str, dict]:
    if K <= F:
        return ONE, "sure", {}
    pk = disintegrable_joint(prior, sigma, K)
    if pk > 0:
        return disintegrable_joint(prior, sigma, F & K) / pk, "positive-ratio", {"P_d_K": pk}
    return _null_formula(sigma, F, K)


def dis_extension_envelope(prior: Prior, sigma: Strategy, F: Event, K: Event) -> EnvelopeResult:
    _check_k(K)
    low = lambda G, C: _dis_lower(prior, sigma, G, C)  # noqa: E731
    lo, tag, aux = _lower_cached(prior, sigma, "dis", F, K, low)
    lo_c, tag_c, aux_c = _lower_cached(prior, sigma, "dis", ~F, K, low)
    return EnvelopeResult(lo, 1 - lo_c, tag, tag_c, dict(aux, complement=aux_c))


# -- conditional prior ------------------------------------------------------------------


def _prior_lower(prior: Prior, F: Event, K: Event) -> Fraction:
    pk = prior.prob(K)
    if pk > 0:
        return prior.prob(F & K) / pk
    return ONE if K <= F else ZERO


def conditional_prior_envelope(prior: Prior, F: Event, K: Event) -> EnvelopeResult:
    """Bounds on ``pi(F|K)`` for ``F``, ``K`` in the prior's algebra: ratio, or vacuous at ``K``."""
    _check_k(K)
    for ev in (F, K):
        if not prior.sub.contains(ev):
            raise EventNotInPriorAlgebra(f"{ev!r} is not a union of prior blocks")
    tag = "positive-ratio" if prior.prob(K) > 0 else "vacuous"
    return EnvelopeResult(_prior_lower(prior, F, K), 1 - _prior_lower(prior, ~F, K), tag, tag)


def conditional_prior_capacity(prior: Prior, K: Event) -> Capacity:
    """``F -> lower pi(F|K)`` on the blocks of the prior's algebra."""
    sub = prior.sub

    def value(labels: frozenset) -> Fraction:
        ev = sub.union(t for t, lab in enumerate(sub.labels) if lab in labels)
        return _prior_lower(prior, ev, K)

    return Capacity.from_function(sub.labels, value)


# -- fully disintegrable extensions -----------------------------------------------------


def _cell_prior(prior: Prior, sigma: Strategy, events: Sequence[Event]) -> list[Fraction]:
    """Row masses for the fully disintegrable computation.

    Blocks of several rows are accepted only if every integrand in ``events`` is constant
    across their rows; the block mass is then split evenly, which leaves every integral
    unchanged.
    """
    x = [ZERO] * prior.space.n_conditioning
    for rows, m in zip(_block_rows(prior), prior.masses):
        if len(rows) > 1:
            for ev in events:
                vals = {sigma(ev, i) for i in rows}
                if len(vals) > 1:
                    raise NotIntegrable(
                        f"sigma({ev!r}|.) varies inside a prior block; the integral over that block is undefined"
                    )
        for i in rows:
            x[i] = m / len(rows)
    return x


class _Weighted:
    """``sum_i x_i sigma(E|H_i)``, memoized by the atoms of ``E``."""

    def __init__(self, x: Sequence[Fraction], sigma: Strategy):
        self.x = x
        self.sigma = sigma
        self.memo: dict[int, Fraction] = {}

    def __call__(self, ev: Event) -> Fraction:
        hit = self.memo.get(ev.mask)
        if hit is None:
            hit = self.memo[ev.mask] = sum((xi * self.sigma(ev, i) for i, xi in enumerate(self.x) if xi), ZERO)
        return hit


def _fd_lower(
    x: Sequence[Fraction], sigma: Strategy, F: Event, K: Event, with_aux: bool = False, w: _Weighted | None = None
) -> tuple[Fraction, str, dict]:
    if K <= F:
        return ONE, "sure", {}
    w = w or _Weighted(x, sigma)
    rows = _rows_meeting(K)
    fk = F & K
    hull = _hull(K)
    if hull == K:
        pk = w(K)
        if pk > 0:
            return w(fk) / pk, "row-positive-ratio", {"pi_K": pk}
        return min(sigma(F, i) for i in rows), "row-null-inf", {"pi_K": ZERO}
    pa = w(hull)
    aux: dict = {"A": rows, "pi_A": pa}
    if pa > 0:
        qk = w(K)
        aux["Q_K_given_A"] = qk / pa
        if qk > 0:
            return w(fk) / qk, "hull-positive-ratio", aux
    else:
        a = [sigma(fk, i) for i in rows]
        b = [sigma(~F & K, i) for i in rows]
        q = [sigma(K, i) for i in rows]
        aux["Q_K_given_A"] = min(q)
        if min(q) > 0:
            # conditional priors on a null hull range over a simplex; the ratio is
            # quasi-linear, so its minimum sits at a vertex (a single row)
            if with_aux:
                aux.update(_fd_simplex_aux(a, b))
            return min(ai / qi for ai, qi in zip(a, q)), "hull-null-vertex-min", aux
    lo, tag, extra = _null_formula(sigma, F, K)
    aux.update(extra)
    return lo, "deep-" + tag, aux


def _fd_simplex_aux(a: list[Fraction], b: list[Fraction]) -> dict:
    k = len(a)

    def build():
        lp = RationalLP(k)
        lp.add_eq([1] * k, 1)
        return lp

    L = _two_stage(build, a, b, "max")
    U_c = _two_stage(build, b, a, "min")
    lo_fk, up_fck = min(a), max(b)
    c1 = lo_fk / (lo_fk + U_c) if lo_fk + U_c else None
    c2 = L / (L + up_fck) if L + up_fck else None
    return {"L_fd": L, "U_fd_complement": U_c, "candidates": (c1, c2)}


def fully_dis_envelope(
    prior: Prior, sigma: Strategy, F: Event, K: Event, with_aux: bool = False
) -> EnvelopeResult:
    """Envelope over the fully disintegrable extensions.

    ``with_aux=True`` also reports ``L^fd``/``U^fd`` on the null-hull branch.
    """
    _check_k(K)
    memo = _memo(prior, sigma)
    w = memo.get("fd-weights")
    if prior.is_on_cells:
        if w is None:
            w = memo["fd-weights"] = _Weighted(_cell_prior(prior, sigma, ()), sigma)
        x = w.x
    else:
        # the split of a coarse block is the same every time, but the constancy check is per query
        x = _cell_prior(prior, sigma, (F & K, ~F & K, K, F, ~F))
        if w is None:
            w = memo["fd-weights"] = _Weighted(x, sigma)
    if with_aux:
        lo, tag, aux = _fd_lower(x, sigma, F, K, True, w)
        lo_c, tag_c, aux_c = _fd_lower(x, sigma, ~F, K, True, w)
    else:
        low = lambda G, C: _fd_lower(x, sigma, G, C, False, w)  # noqa: E731
        lo, tag, aux = _lower_cached(prior, sigma, "fd", F, K, low)
        lo_c, tag_c, aux_c = _lower_cached(prior, sigma, "fd", ~F, K, low)
    return EnvelopeResult(lo, 1 - lo_c, tag, tag_c, dict(aux, complement=aux_c))


# -- (fully) strongly conglomerable extensions on finite instances ---------------------------


def sc_envelope_finite(prior: Prior, sigma: Strategy, F: Event) -> EnvelopeResult:
    pi = BlockMeasure.from_prior(prior)
    X = sigma.row(F)
    return EnvelopeResult(lower_stieltjes(X, pi), upper_stieltjes(X, pi), "lower-S-integral", "upper-S-integral")


def prior_allocations(prior: Prior):
    """Extreme points of the set of row priors extending ``prior``: each block's mass on one row."""
    choices = [rows if m else rows[:1] for rows, m in zip(_block_rows(prior), prior.masses)]
    n = prior.space.n_conditioning
    for pick in product(*choices):
        x = [ZERO] * n
        for i, m in zip(pick, prior.masses):
            x[i] += m
        yield x


def fsc_envelope_finite(prior: Prior, sigma: Strategy, F: Event, K: Event) -> EnvelopeResult:
    """Minimum over row priors extending ``prior`` of the fully disintegrable lower envelope."""
    _check_k(K)
    best_lo, best_hi = None, None
    for x in prior_allocations(prior):
        lo = _fd_lower(x, sigma, F, K)[0]
        hi = 1 - _fd_lower(x, sigma, ~F, K)[0]
        if best_lo is None or lo < best_lo[0]:
            best_lo = (lo, x)
        if best_hi is None or hi > best_hi[0]:
            best_hi = (hi, x)
    return EnvelopeResult(
        best_lo[0], best_hi[0], "allocation-min", "allocation-max", {"lower_allocation": best_lo[1], "upper_allocation": best_hi[1]}
    )
