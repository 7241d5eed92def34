"""Countably infinite conditioning partitions described by finitely many profiles.

The indices of the conditioning partition are split into finitely many *named* indices,
each with its own prior mass and likelihood row, and finitely many infinite *profiles*.
Profiles are grouped into *cells* carrying a diffuse prior weight: every finite set of
indices inside a cell is prior-null.  Along each profile the likelihood of a set of
observable columns is a bounded sequence known only through a :class:`TailSpec`.

Events are atom sets of the quotient grid whose rows are the named indices followed by
the profiles, so ``event_of`` works with the row and column labels.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from envctl.algebra import AtomSpace, EmptyConditioning, Event, full_space, iter_bits
from envctl.assessment import LayeredConditional, Prior, as_fraction
from envctl.capacity import BlockMeasure, lower_stieltjes, upper_stieltjes
from envctl.envelopes import EnvelopeResult, NotIntegrable
from envctl.fixtures import FiniteInstance
from envctl.lp import RationalLP

ZERO = Fraction(0)
ONE = Fraction(1)


class NotDescribable(ValueError):
    """The query needs information the profile description does not carry."""


class InconsistentCandidate(ValueError):
    pass


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class TailSpec:
    """Summary of a bounded sequence ``s_1, s_2, ...`` indexed by a profile's members.

    ``exceptions`` lists explicitly known early terms.  ``inf_value``/``sup_value`` are the
    bounds of the whole sequence and the ``*_attained`` flags say whether some term
    reaches them.  With ``tail_constant`` every term outside ``exceptions`` equals ``liminf``.
    """

    exceptions: tuple[tuple[int, Fraction], ...]
    liminf: Fraction
    limsup: Fraction
    inf_value: Fraction
    sup_value: Fraction
    inf_attained: bool
    sup_attained: bool
    tail_constant: bool = False

    def __post_init__(self):
        exc = self.exceptions.items() if isinstance(self.exceptions, Mapping) else self.exceptions
        exc = tuple(sorted((int(k), as_fraction(v)) for k, v in exc))
        object.__setattr__(self, "exceptions", exc)
        for name in ("liminf", "limsup", "inf_value", "sup_value"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        lo, hi = self.inf_value, self.sup_value
        if any(k < 1 for k, _ in exc) or len({k for k, _ in exc}) != len(exc):
            raise ModelError("exception indices must be distinct and start at 1")
        if not 0 <= lo <= self.liminf <= self.limsup <= hi <= 1:
            raise ModelError("need 0 <= inf <= liminf <= limsup <= sup <= 1")
        if any(not lo <= v <= hi for _, v in exc):
            raise ModelError("an exception lies outside [inf, sup]")
        # an infimum that no term reaches is approached along a subsequence
        if not self.inf_attained and (lo != self.liminf or any(v == lo for _, v in exc)):
            raise ModelError("an unattained infimum must equal the liminf and no listed term")
        if not self.sup_attained and (hi != self.limsup or any(v == hi for _, v in exc)):
            raise ModelError("an unattained supremum must equal the limsup and no listed term")
        if self.tail_constant:
            vals = [v for _, v in exc] + [self.liminf]
            if self.liminf != self.limsup or lo != min(vals) or hi != max(vals):
                raise ModelError("an eventually constant tail fixes liminf, limsup, inf and sup")
            if not (self.inf_attained and self.sup_attained):
                raise ModelError("an eventually constant sequence attains its bounds")

    @classmethod
    def constant(cls, value) -> TailSpec:
        v = as_fraction(value)
        return cls((), v, v, v, v, True, True, True)

    @classmethod
    def eventually_constant(cls, exceptions: Mapping[int, Fraction], value) -> TailSpec:
        v = as_fraction(value)
        vals = [as_fraction(x) for x in exceptions.values()] + [v]
        return cls(tuple(exceptions.items()), v, v, min(vals), max(vals), True, True, True)

    def complement(self) -> TailSpec:
        """The spec of ``1 - s``."""
        return TailSpec(
            tuple((k, 1 - v) for k, v in self.exceptions),
            1 - self.limsup,
            1 - self.liminf,
            1 - self.sup_value,
            1 - self.inf_value,
            self.sup_attained,
            self.inf_attained,
            self.tail_constant,
        )

    def value_at(self, k: int) -> Fraction:
        if not self.tail_constant:
            raise NotDescribable("individual terms are known only for eventually constant tails")
        return dict(self.exceptions).get(k, self.liminf)

    @property
    def converges(self) -> bool:
        return self.liminf == self.limsup


@dataclass(frozen=True)
class Cell:
    label: str
    profiles: tuple[int, ...]  # quotient rows
    weight: Fraction


@dataclass(frozen=True)
class ProfileModel:
    space: AtomSpace
    n_named: int
    named_mass: tuple[Fraction, ...]
    named_rows: tuple[tuple[Fraction, ...], ...]
    cells: tuple[Cell, ...]
    specs: tuple[dict, ...]  # per profile: column mask -> TailSpec
    cell_of: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        sp = self.space
        m = sp.n_observable
        if len(self.named_mass) != self.n_named or len(self.named_rows) != self.n_named:
            raise ModelError("one mass and one likelihood row per named index")
        for row in self.named_rows:
            if len(row) != m or any(x < 0 for x in row) or sum(row) != 1:
                raise ModelError("named likelihood rows must be probability vectors over the columns")
        owner = [-1] * sp.n_conditioning
        for t, c in enumerate(self.cells):
            for r in c.profiles:
                if r < self.n_named or owner[r] != -1:
                    raise ModelError(f"cell {c.label!r} must hold profiles not used by another cell")
                owner[r] = t
        if any(owner[r] == -1 for r in range(self.n_named, sp.n_conditioning)):
            raise ModelError("every profile belongs to exactly one cell")
        weights = [c.weight for c in self.cells]
        if any(x < 0 for x in list(self.named_mass) + weights) or sum(self.named_mass) + sum(weights) != 1:
            raise ModelError("named masses and cell weights must be nonnegative and sum to 1")
        if len(self.specs) != sp.n_conditioning - self.n_named:
            raise ModelError("one spec table per profile")
        object.__setattr__(self, "cell_of", tuple(owner))

    @classmethod
    def build(
        cls,
        columns: Sequence[str],
        named: Mapping[str, tuple] | None,
        profiles: Mapping[str, Mapping],
        cells: Sequence[tuple[str, Sequence[str], object]],
    ) -> ProfileModel:
        """``named`` maps a label to ``(mass, likelihood row)``; ``profiles`` maps a label to
        ``{columns: TailSpec}`` where ``columns`` is a column label or a tuple of them."""
        named = dict(named or {})
        rows = list(named) + list(profiles)
        sp = full_space(len(rows), len(columns), row_labels=rows, col_labels=list(columns))
        col_index = {c: j for j, c in enumerate(columns)}

        def col_mask(key) -> int:
            labels = [key] if isinstance(key, str) else list(key)
            try:
                return sum(1 << col_index[c] for c in set(labels))
            except KeyError as e:
                raise ModelError(f"unknown column {e.args[0]!r}") from None

        specs = []
        for label, table in profiles.items():
            specs.append({col_mask(k): v for k, v in table.items()})
        row_index = {r: i for i, r in enumerate(rows)}
        cell_objs = []
        for label, members, w in cells:
            try:
                idx = tuple(row_index[p] for p in members)
            except KeyError as e:
                raise ModelError(f"cell {label!r} names unknown profile {e.args[0]!r}") from None
            cell_objs.append(Cell(label, idx, as_fraction(w)))
        return cls(
            sp,
            len(named),
            tuple(as_fraction(v[0]) for v in named.values()),
            tuple(tuple(as_fraction(x) for x in v[1]) for v in named.values()),
            tuple(cell_objs),
            tuple(specs),
        )

    # -- structure -----------------------------------------------------------------------

    @property
    def n_rows(self) -> int:
        return self.space.n_conditioning

    def is_profile(self, r: int) -> bool:
        return r >= self.n_named

    def columns_in_row(self, ev: Event, r: int) -> int:
        sp = self.space
        out = 0
        for k in iter_bits(ev.mask & sp.row_masks[r]):
            out |= 1 << sp.col_of(k)
        return out

    def spec(self, r: int, cols: int) -> TailSpec:
        """Spec of ``sigma(F|H_i)`` along row ``r`` for an event meeting it in ``cols``."""
        full = (1 << self.space.n_observable) - 1
        if not self.is_profile(r):
            row = self.named_rows[r]
            return TailSpec.constant(sum((row[j] for j in iter_bits(cols)), ZERO))
        if cols == 0:
            return TailSpec.constant(0)
        if cols == full:
            return TailSpec.constant(1)
        table = self.specs[r - self.n_named]
        if cols in table:
            return table[cols]
        if full ^ cols in table:
            return table[full ^ cols].complement()
        label = self.space.row_labels[r]
        cl = [self.space.col_labels[j] for j in iter_bits(cols)]
        raise NotDescribable(f"no tail specification for columns {cl} on profile {label!r}")

    def row_spec(self, ev: Event, r: int) -> TailSpec:
        return self.spec(r, self.columns_in_row(ev, r))

    def prior_blocks(self) -> list[tuple[Fraction, tuple[int, ...]]]:
        """Blocks of the describable prior algebra: named singletons and cells."""
        return [(self.named_mass[r], (r,)) for r in range(self.n_named)] + [(c.weight, c.profiles) for c in self.cells]

    def quotient_measure(self) -> BlockMeasure:
        return BlockMeasure(
            self.space.row_labels,
            tuple(sum(1 << r for r in rows) for _, rows in self.prior_blocks()),
            tuple(m for m, _ in self.prior_blocks()),
        )

    def _row_event(self, K: Event) -> bool:
        sp = self.space
        return all(K.mask & sp.row_masks[r] in (0, sp.row_masks[r]) for r in range(self.n_rows))


def _blocks_in(blocks, rows: set[int]) -> list[tuple[Fraction, tuple[int, ...]]] | None:
    """Blocks inside ``rows``; ``None`` if some block is split by them."""
    out = []
    for m, b in blocks:
        inside = [r in rows for r in b]
        if all(inside):
            out.append((m, b))
        elif any(inside):
            return None
    return out


# -- inf/sup along profiles ---------------------------------------------------------------


def profile_inf_sup(model: ProfileModel, F: Event, K: Event) -> tuple[Fraction, Fraction]:
    """``inf`` and ``sup`` of ``sigma(F|H_i)`` over the indices ``H_i`` inside ``K``."""
    if K.is_empty:
        raise EmptyConditioning("conditioning event must be nonempty")
    if not model._row_event(K):
        raise NotDescribable("K must be a union of named indices and profiles")
    specs = [model.row_spec(F, r) for r in model.space.rows_meeting(K)]
    return min(s.inf_value for s in specs), max(s.sup_value for s in specs)


def _low(model: ProfileModel, F: Event, r: int) -> Fraction:
    """Value of ``sigma(F|.)`` on row ``r`` once finitely many indices are discarded."""
    return model.row_spec(F, r).liminf


def _high(model: ProfileModel, F: Event, r: int) -> Fraction:
    return model.row_spec(F, r).limsup


# -- joints and strongly conglomerable envelopes ------------------------------------------


def sc_envelope(model: ProfileModel, F: Event) -> EnvelopeResult:
    """Lower and upper Stieltjes integrals of ``sigma(F|.)`` against the prior."""
    rows = range(model.n_rows)
    pi = model.quotient_measure()
    lo = lower_stieltjes([_low(model, F, r) for r in rows], pi)
    hi = upper_stieltjes([_high(model, F, r) for r in rows], pi)
    return EnvelopeResult(lo, hi, "lower-S-integral", "upper-S-integral")


def _lower_joint(model: ProfileModel, F: Event) -> Fraction:
    # a diffuse cell counts only when F swallows it; named indices count with sigma
    sp = model.space
    total = sum((m * model.row_spec(F, r).liminf for m, (r,) in model.prior_blocks()[: model.n_named]), ZERO)
    for c in model.cells:
        if all(F.mask & sp.row_masks[r] == sp.row_masks[r] for r in c.profiles):
            total += c.weight
    return total


def joint_bounds_countable(model: ProfileModel, F: Event) -> EnvelopeResult:
    """Envelope of the joint probabilities of ``F``, with the S-integrals in ``aux["sc"]``."""
    lo = _lower_joint(model, F)
    hi = 1 - _lower_joint(model, ~F)
    sc = sc_envelope(model, F)
    if not lo <= sc.lower <= sc.upper <= hi:
        raise ArithmeticError(f"sandwich violated: {lo} {sc.lower} {sc.upper} {hi}")
    return EnvelopeResult(lo, hi, "joint-lower", "joint-upper", {"sc": sc.interval})


def _limit_vector(model: ProfileModel, r: int, target_cols: int, target: Fraction) -> list[Fraction] | None:
    """A column distribution compatible with every spec of row ``r`` giving ``target`` to ``target_cols``."""
    m = model.space.n_observable
    lp = RationalLP(m)
    lp.add_eq([1] * m, 1)
    lp.add_eq({j: 1 for j in iter_bits(target_cols)}, target)
    if model.is_profile(r):
        for cols, s in model.specs[r - model.n_named].items():
            lp.add_ge({j: 1 for j in iter_bits(cols)}, s.liminf)
            lp.add_le({j: 1 for j in iter_bits(cols)}, s.limsup)
    res = lp.feasible_point()
    return res.x if res.ok else None


def sc_lower_joint(model: ProfileModel, F: Event) -> list[Fraction]:
    """A strongly conglomerable joint on the quotient atoms attaining the lower S-integral of ``F``.

    Each cell sends its weight to the profile with the smallest liminf and splits it over
    the columns along a limit point of the likelihood that realizes that liminf.
    """
    sp = model.space
    x = [ZERO] * sp.n_atoms
    for r in range(model.n_named):
        for j in range(sp.n_observable):
            x[sp.atom_index(r, j)] = model.named_mass[r] * model.named_rows[r][j]
    for c in model.cells:
        r = min(c.profiles, key=lambda p: _low(model, F, p))
        cols = model.columns_in_row(F, r)
        q = _limit_vector(model, r, cols, _low(model, F, r))
        if q is None:
            raise NotDescribable(f"the specs of profile {sp.row_labels[r]!r} admit no matching limit point")
        for j in range(sp.n_observable):
            x[sp.atom_index(r, j)] += c.weight * q[j]
    return x


@dataclass
class ConglomerabilityReport:
    ok: bool
    witness: tuple | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _subevents(space: AtomSpace, mask: int):
    sub = mask
    while True:
        yield Event(space, sub)
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _block_bounds(model: ProfileModel, F: Event, rows: Sequence[int]) -> tuple[Fraction, Fraction]:
    """Essential inf and sup of ``sigma(F|.)`` over a block: finite exclusions are free."""
    return min(_low(model, F, r) for r in rows), max(_high(model, F, r) for r in rows)


def check_strong_conglomerability(model: ProfileModel, joint: Sequence) -> ConglomerabilityReport:
    """Test ``pi(B) inf sigma(F|.) <= P(F & B) <= pi(B) sup sigma(F|.)`` for every describable pair.

    ``joint`` gives a mass per quotient atom.  Checking the blocks of the prior algebra
    suffices: unions of blocks add the inequalities up, and finite index sets are null.
    """
    sp = model.space
    x = [as_fraction(v) for v in joint]
    if len(x) != sp.n_atoms or any(v < 0 for v in x) or sum(x) != 1:
        raise InconsistentCandidate("the joint must be a probability vector over the quotient atoms")

    def mass(ev: Event) -> Fraction:
        return sum((x[k] for k in iter_bits(ev.mask)), ZERO)

    for m, rows in model.prior_blocks():
        B = Event(sp, sum(sp.row_masks[r] for r in rows))
        if mass(B) != m:
            raise InconsistentCandidate(f"joint gives {mass(B)} to a prior block of mass {m}")
        if not model.is_profile(rows[0]):
            (r,) = rows
            for j in range(sp.n_observable):
                if x[sp.atom_index(r, j)] != m * model.named_rows[r][j]:
                    raise InconsistentCandidate(f"joint disagrees with the likelihood of {sp.row_labels[r]!r}")
        for F in _subevents(sp, B.mask):
            lo, hi = _block_bounds(model, F, rows)
            if not m * lo <= mass(F) <= m * hi:
                return ConglomerabilityReport(False, (F, B), f"P(F&B) = {mass(F)} outside [{m * lo}, {m * hi}]")
    return ConglomerabilityReport(True)


def check_full_strong_conglomerability(model: ProfileModel, Q: LayeredConditional) -> ConglomerabilityReport:
    """The conditional form of the test for every describable ``K`` in the prior algebra.

    ``Q`` is a full conditional probability on the quotient atoms; each profile atom stands
    for the tail of that profile.
    """
    sp = model.space
    if Q.space != sp:
        raise InconsistentCandidate("candidate lives on a different space")
    blocks = model.prior_blocks()
    for m, rows in blocks:
        B = Event(sp, sum(sp.row_masks[r] for r in rows))
        if Q(B, sp.omega) != m:
            raise InconsistentCandidate(f"candidate gives {Q(B, sp.omega)} to a prior block of mass {m}")
    for r in range(model.n_named):
        H = sp.H(r)
        for j in range(sp.n_observable):
            if Q(sp.atom(r, j), H) != model.named_rows[r][j]:
                raise InconsistentCandidate(f"candidate disagrees with the likelihood of {sp.row_labels[r]!r}")
    for pick in range(1, 1 << len(blocks)):
        K = Event(sp, sum(sp.row_masks[r] for t in iter_bits(pick) for r in blocks[t][1]))
        for t in iter_bits(pick):
            rows = blocks[t][1]
            B = Event(sp, sum(sp.row_masks[r] for r in rows))
            pb = Q(B, K)
            for F in _subevents(sp, B.mask):
                lo, hi = _block_bounds(model, F, rows)
                v = Q(F, K)
                if not pb * lo <= v <= pb * hi:
                    return ConglomerabilityReport(False, (F, B, K), f"Q(F&B|K) = {v} outside [{pb * lo}, {pb * hi}]")
    return ConglomerabilityReport(True)


# -- fully disintegrable envelope ------------------------------------------------------------


def _integral(model: ProfileModel, F: Event, blocks, strict: bool) -> Fraction:
    """Lower S-integral of ``sigma(F|.)`` over ``blocks``; ``strict`` demands integrability."""
    lo = hi = ZERO
    for m, rows in blocks:
        if not m:
            continue
        a, b = _block_bounds(model, F, rows)
        lo += m * a
        hi += m * b
    if strict and lo != hi:
        raise NotIntegrable(f"sigma({F!r}|.) has lower integral {lo} and upper integral {hi}")
    return lo


def _ratio_inf(model: ProfileModel, r: int, FK: Event, K: Event) -> Fraction | None:
    """``inf_i sigma(F&K|H_i) / sigma(K|H_i)`` along row ``r``; ``None`` when a term divides by zero."""
    k_cols = model.columns_in_row(K, r)
    fk_cols = model.columns_in_row(FK, r)
    if not model.is_profile(r):
        den = model.spec(r, k_cols).inf_value
        return model.spec(r, fk_cols).inf_value / den if den else None
    den = model.spec(r, k_cols)
    if den.inf_value == 0 and den.inf_attained:
        return None
    if fk_cols == 0:
        return ZERO
    if fk_cols == k_cols:
        return ONE
    if k_cols == (1 << model.space.n_observable) - 1:
        return model.spec(r, fk_cols).inf_value
    raise NotDescribable(f"ratio of likelihoods along profile {model.space.row_labels[r]!r} is not specified")


def _null_formula(model: ProfileModel, F: Event, K: Event) -> tuple[Fraction, str]:
    fk, fck = F & K, ~F & K
    sp = model.space
    ratios = []
    for r in sp.rows_meeting(K):
        a = bool(fk.mask & sp.row_masks[r])
        b = bool(fck.mask & sp.row_masks[r])
        if b and not a:
            return ZERO, "null-I3-zero"
        if a and b:
            q = _ratio_inf(model, r, fk, K)
            if q is None:
                return ZERO, "null-I2-zero"
            ratios.append(q)
    if not ratios:
        return ONE, "sure"
    return min(ratios), "null-I2-min"


def _fd_lower(model: ProfileModel, blocks, F: Event, K: Event, strict: bool) -> tuple[Fraction, str]:
    sp = model.space
    if K <= F:
        return ONE, "sure"
    fk = F & K
    rows = sp.rows_meeting(K)
    if model._row_event(K):
        inside = _blocks_in(blocks, set(rows))
        if inside is None:
            raise NotDescribable("K splits a cell of the prior algebra")
        pk = sum((m for m, _ in inside), ZERO)
        if pk > 0:
            return _integral(model, fk, inside, strict) / pk, "row-positive-ratio"
        return min(model.row_spec(F, r).inf_value for r in rows), "row-null-inf"
    hull = [(m, b) for m, b in blocks if any(r in rows for r in b)]
    pa = sum((m for m, _ in hull), ZERO)
    if pa > 0:
        qk = _integral(model, K, hull, True)
        if qk > 0:
            return _integral(model, fk, hull, True) / qk, "hull-positive-ratio"
    else:
        hull_rows = [r for _, b in hull for r in b]
        if all(model.row_spec(K, r).inf_value > 0 for r in hull_rows):
            vals = [_ratio_inf(model, r, fk, K) for r in hull_rows]
            return min(vals), "hull-null-vertex-min"
    lo, tag = _null_formula(model, F, K)
    return lo, "deep-" + tag


def fd_envelope_countable(model: ProfileModel, F: Event, K: Event) -> EnvelopeResult:
    """Envelope over the fully disintegrable extensions of the model's prior and likelihood."""
    if K.is_empty:
        raise EmptyConditioning("conditioning event must be nonempty")
    blocks = model.prior_blocks()
    lo, tag = _fd_lower(model, blocks, F, K, True)
    lo_c, tag_c = _fd_lower(model, blocks, ~F, K, True)
    return EnvelopeResult(lo, 1 - lo_c, tag, tag_c)


# -- fully strongly conglomerable lower envelope -----------------------------------------------


def allocations(model: ProfileModel):
    """Vertices of the prior extensions to the profiles: each cell's weight on one profile."""
    named = [(model.named_mass[r], (r,)) for r in range(model.n_named)]
    choices = [c.profiles if c.weight else c.profiles[:1] for c in model.cells]
    for pick in product(*choices):
        masses = {r: ZERO for c in model.cells for r in c.profiles}
        for c, r in zip(model.cells, pick):
            masses[r] += c.weight
        yield named + [(masses[r], (r,)) for r in sorted(masses)]


def fsc_lower_certified(model: ProfileModel, F: Event, K: Event) -> tuple[Fraction, dict[str, Fraction]]:
    """Minimum over allocations of the fully disintegrable lower envelope, with the minimizer.

    Once every profile is measurable, the integral of a non-convergent likelihood depends
    on how the extension spreads mass along the profile; the minimum takes its liminf.
    """
    if K.is_empty:
        raise EmptyConditioning("conditioning event must be nonempty")
    best = None
    for blocks in allocations(model):
        v = _fd_lower(model, blocks, F, K, False)[0]
        if best is None or v < best[0]:
            best = (v, blocks)
    labels = model.space.row_labels
    return best[0], {labels[rows[0]]: m for m, rows in best[1]}


def fsc_lower(model: ProfileModel, F: Event, K: Event) -> Fraction:
    return fsc_lower_certified(model, F, K)[0]


def fsc_envelope(model: ProfileModel, F: Event, K: Event) -> EnvelopeResult:
    lo, alloc = fsc_lower_certified(model, F, K)
    lo_c, alloc_c = fsc_lower_certified(model, ~F, K)
    return EnvelopeResult(lo, 1 - lo_c, "allocation-min", "allocation-max", {"lower_allocation": alloc, "upper_allocation": alloc_c})


# -- truncation to a finite instance ------------------------------------------------------------


@dataclass(frozen=True)
class Truncation:
    instance: FiniteInstance
    rows_of: dict[int, list[int]]  # quotient row -> finite rows

    def lift(self, ev: Event) -> Event:
        """The finite event meeting each finite row in the columns ``ev`` meets its quotient row."""
        sp = self.instance.space
        mask = 0
        for r, rows in self.rows_of.items():
            cols = [j for j in range(ev.space.n_observable) if ev.mask >> ev.space.atom_index(r, j) & 1]
            for i in rows:
                for j in cols:
                    mask |= 1 << sp.atom_index(i, j)
        return Event(sp, mask)


def truncate(model: ProfileModel, m: int) -> Truncation:
    """Keep exception terms with index ``<= m`` as null rows and one row per profile for the tail.

    Needs eventually constant specs for every single column of every profile (one column
    may be left out and recovered by complement).  The tail rows of a cell form one prior
    block carrying the cell weight.
    """
    sp = model.space
    n_cols = sp.n_observable
    row_labels: list[str] = []
    lam: list[list[Fraction]] = []
    groups: list[list[int]] = []
    masses: list[Fraction] = []
    rows_of: dict[int, list[int]] = {}
    for r in range(model.n_named):
        rows_of[r] = [len(row_labels)]
        groups.append([len(row_labels)])
        masses.append(model.named_mass[r])
        row_labels.append(sp.row_labels[r])
        lam.append(list(model.named_rows[r]))
    tails: dict[int, int] = {}
    for r in range(model.n_named, model.n_rows):
        specs = [model.spec(r, 1 << j) for j in range(n_cols)]
        if not all(s.tail_constant for s in specs):
            raise NotDescribable(f"profile {sp.row_labels[r]!r} has a tail that is not eventually constant")
        idx = sorted({k for s in specs for k, _ in s.exceptions if k <= m})
        rows_of[r] = []
        for k in idx:
            rows_of[r].append(len(row_labels))
            groups.append([len(row_labels)])
            masses.append(ZERO)
            row_labels.append(f"{sp.row_labels[r]}[{k}]")
            lam.append([s.value_at(k) for s in specs])
        tails[r] = len(row_labels)
        rows_of[r].append(len(row_labels))
        row_labels.append(f"{sp.row_labels[r]}[tail]")
        lam.append([s.liminf for s in specs])
    for c in model.cells:
        groups.append([tails[r] for r in c.profiles])
        masses.append(c.weight)
    for row in lam:
        if sum(row) != 1:
            raise ModelError("column specs of a profile do not add up to a probability")
    fsp = full_space(len(row_labels), n_cols, row_labels=row_labels, col_labels=list(sp.col_labels))
    prior = Prior.on_groups(fsp, groups, masses)
    return Truncation(FiniteInstance.build(fsp, prior, lam), rows_of)


# -- models used by the tests and the CLI ------------------------------------------------------


def ultrafilter_model() -> ProfileModel:
    """Odd and even indices as separate cells; all prior weight on the odd one.

    ``sigma(E1|H_i) = 1/2 + 1/(2i)``: along the odd indices ``i = 2k - 1`` it starts at 1
    and decreases to 1/2; along the even indices ``i = 2k`` it starts at 3/4.
    """
    half = Fraction(1, 2)
    odd = TailSpec({1: 1}, half, half, half, 1, False, True)
    even = TailSpec({1: Fraction(3, 4)}, half, half, half, Fraction(3, 4), False, True)
    return ProfileModel.build(
        ["E1", "E2"],
        None,
        {"B": {"E1": odd}, "Bc": {"E1": even}},
        [("odd", ["B"], 1), ("even", ["Bc"], 0)],
    )


def parity_model() -> ProfileModel:
    """One diffuse cell holding the odd and even indices; ``E1`` occurs exactly on the evens."""
    return ProfileModel.build(
        ["E1", "E2"],
        None,
        {"odd": {"E1": TailSpec.constant(0)}, "even": {"E1": TailSpec.constant(1)}},
        [("all", ["odd", "even"], 1)],
    )
