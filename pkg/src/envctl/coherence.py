"""Coherence checking and extension intervals for finite conditional assessments.

Every check works through a sequence of zero-layer linear systems over atoms: each layer
assigns a probability to the atoms of the conditioning events not yet covered, subject to
``P(F&K) = v P(K)`` for every assessed ``F|K`` still pending.  Entries whose ``K`` receives
positive mass are settled; the rest move to the next layer.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from envctl.algebra import AtomSpace, EmptyConditioning, Event, iter_bits
from envctl.assessment import LayeredConditional, Prior, Strategy, as_fraction
from envctl.lp import FeasibleTableau, RationalLP


class IncoherentBase(ValueError):
    pass


class ValueOutsideInterval(ValueError):
    pass


@dataclass(frozen=True)
class Entry:
    F: Event
    K: Event
    value: Fraction


@dataclass(frozen=True)
class ConditionalAssessment:
    space: AtomSpace
    entries: tuple[Entry, ...] = ()

    def __post_init__(self):
        fixed = []
        for e in self.entries:
            if not isinstance(e, Entry):
                e = Entry(*e)
            v = as_fraction(e.value)
            if e.K.is_empty:
                raise EmptyConditioning("assessed conditioning events must be nonempty")
            if not 0 <= v <= 1:
                raise ValueError(f"assessed value {v} outside [0, 1]")
            fixed.append(Entry(e.F, e.K, v))
        object.__setattr__(self, "entries", tuple(fixed))

    def with_entry(self, F: Event, K: Event, value) -> ConditionalAssessment:
        return ConditionalAssessment(self.space, self.entries + (Entry(F, K, as_fraction(value)),))

    def extended(self, extra: Iterable[Entry]) -> ConditionalAssessment:
        return ConditionalAssessment(self.space, self.entries + tuple(extra))

    def __len__(self) -> int:
        return len(self.entries)


def assessment_from_prior_strategy(prior: Prior, sigma: Strategy) -> ConditionalAssessment:
    """``{pi, sigma}`` as a finite list: block masses given Omega and atom masses given their row."""
    sp = prior.space
    entries = [Entry(b, sp.omega, m) for b, m in zip(prior.sub.blocks, prior.masses)]
    for k, (i, _) in enumerate(sp.atoms):
        entries.append(Entry(Event(sp, 1 << k), sp.H(i), sigma.atom_values[k]))
    return ConditionalAssessment(sp, tuple(entries))


def _layer_lp(entries: Sequence[Entry], atoms: list[int], norm_mask: int) -> RationalLP:
    pos = {a: t for t, a in enumerate(atoms)}
    lp = RationalLP(len(atoms))
    vmask = sum(1 << a for a in atoms)
    for e in entries:
        km = e.K.mask & vmask
        if not km:
            continue
        row: dict[int, Fraction] = {}
        fk = e.F.mask & km
        for a in iter_bits(km):
            row[pos[a]] = (1 if fk >> a & 1 else 0) - e.value
        lp.add_eq(row, 0)
    lp.add_eq({pos[a]: 1 for a in iter_bits(norm_mask & vmask)}, 1)
    return lp


def _mass(x: list[Fraction], atoms: list[int], mask: int) -> Fraction:
    return sum((x[t] for t, a in enumerate(atoms) if mask >> a & 1), Fraction(0))


def _maximal_cover(tab: FeasibleTableau, entries: Sequence[Entry], atoms: list[int]) -> list[Fraction]:
    """Average of solutions maximizing the mass of each pending conditioning event."""
    sols = []
    positive = 0
    seen = set()
    for e in entries:
        km = e.K.mask
        if km in seen or km & positive:
            seen.add(km)
            continue
        seen.add(km)
        res = tab.maximize([1 if km >> a & 1 else 0 for a in atoms])
        if res.value and res.value > 0:
            sols.append(res.x)
            positive |= sum(1 << a for t, a in enumerate(atoms) if res.x[t] > 0)
    if not sols:
        return tab.point()
    w = Fraction(1, len(sols))
    return [w * sum(col) for col in zip(*sols)]


def _split(entries: Sequence[Entry], x: list[Fraction], atoms: list[int]) -> list[Entry]:
    support = sum(1 << a for t, a in enumerate(atoms) if x[t] > 0)
    return [e for e in entries if not e.K.mask & support]


@dataclass
class CoherenceResult:
    coherent: bool
    layers: list[list[Fraction]] = field(default_factory=list)
    witness: LayeredConditional | None = None
    failed_layer: int | None = None
    pending: list[Entry] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.coherent


def _union_k(entries: Sequence[Entry]) -> int:
    m = 0
    for e in entries:
        m |= e.K.mask
    return m


def check_coherence(a: ConditionalAssessment, space: AtomSpace | None = None) -> CoherenceResult:
    """Decide coherence; on success the witness is a layered extension agreeing with every entry."""
    space = space or a.space
    n = space.n_atoms
    remaining = list(a.entries)
    layers: list[list[Fraction]] = []
    while remaining:
        h0 = _union_k(remaining)
        atoms = list(iter_bits(h0))
        tab = _layer_lp(remaining, atoms, h0).phase_one()
        if tab is None:
            return CoherenceResult(False, layers, None, len(layers), remaining)
        x = _maximal_cover(tab, remaining, atoms)
        vec = [Fraction(0)] * n
        for t, at in enumerate(atoms):
            vec[at] = x[t]
        layers.append(vec)
        remaining = _split(remaining, x, atoms)
    return CoherenceResult(True, layers, _close_layers(space, layers))


def _close_layers(space: AtomSpace, layers: list[list[Fraction]]) -> LayeredConditional:
    n = space.n_atoms
    covered = 0
    for vec in layers:
        covered |= sum(1 << k for k in range(n) if vec[k] > 0)
    left = space.full_mask & ~covered
    out = [tuple(v) for v in layers]
    if left:
        w = Fraction(1, bin(left).count("1"))
        out.append(tuple(w if left >> k & 1 else Fraction(0) for k in range(n)))
    return LayeredConditional(space, tuple(out))


class ExtensionOracle:
    """Extension intervals for one coherent assessment, caching the layer descent per ``K``.

    For the lower bound of ``F|K`` the descent keeps ``K`` at zero mass for as long as the
    pending system allows, settling as many entries as possible on the way; the final
    layer then minimizes ``P(F&K)`` under the normalization ``P(K) = 1``.
    """

    def __init__(self, a: ConditionalAssessment):
        self.a = a
        self.space = a.space
        self._coherence = check_coherence(a)
        if not self._coherence:
            raise IncoherentBase(f"assessment is incoherent (layer {self._coherence.failed_layer} infeasible)")
        self._final: dict[int, tuple[list[int], FeasibleTableau]] = {}
        self._lower: dict[tuple[int, int], Fraction] = {}

    def final_system(self, K: Event) -> tuple[list[int], FeasibleTableau]:
        hit = self._final.get(K.mask)
        if hit is not None:
            return hit
        km = K.mask
        remaining = list(self.a.entries)
        while remaining:
            free = _union_k(remaining) & ~km
            if not free:
                break
            atoms = list(iter_bits(free))
            tab = _layer_lp(remaining, atoms, free).phase_one()
            if tab is None:
                break
            x = _maximal_cover(tab, remaining, atoms)
            remaining = _split(remaining, x, atoms)
        atoms = list(iter_bits(_union_k(remaining) | km))
        tab = _layer_lp(remaining, atoms, km).phase_one()
        if tab is None:  # impossible for a coherent base
            raise IncoherentBase("no layer can give the target conditioning event positive mass")
        self._final[km] = (atoms, tab)
        return atoms, tab

    def lower(self, F: Event, K: Event) -> Fraction:
        if K.is_empty:
            raise EmptyConditioning("conditioning event must be nonempty")
        fk = F.mask & K.mask
        if fk == K.mask:
            return Fraction(1)
        # only F & K matters, so queries sharing it share the answer
        key = (fk, K.mask)
        hit = self._lower.get(key)
        if hit is None:
            atoms, tab = self.final_system(K)
            hit = self._lower[key] = tab.minimize([1 if fk >> a & 1 else 0 for a in atoms]).value
        return hit

    def interval(self, F: Event, K: Event) -> tuple[Fraction, Fraction]:
        lo = self.lower(F, K)
        hi = 1 - self.lower(~F, K)
        return lo, hi

    def witness(self, F: Event, K: Event, value) -> LayeredConditional:
        v = as_fraction(value)
        lo, hi = self.interval(F, K)
        if not lo <= v <= hi:
            raise ValueOutsideInterval(f"{v} is outside [{lo}, {hi}]")
        res = check_coherence(self.a.with_entry(F, K, v))
        if not res:
            raise IncoherentBase(f"value {v} in [{lo}, {hi}] failed to extend")
        return res.witness


def extension_interval(a: ConditionalAssessment, F: Event, K: Event) -> tuple[Fraction, Fraction]:
    return ExtensionOracle(a).interval(F, K)


def witness_extension(a: ConditionalAssessment, F: Event, K: Event, value) -> LayeredConditional:
    return ExtensionOracle(a).witness(F, K, value)
