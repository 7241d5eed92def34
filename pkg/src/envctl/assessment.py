"""Priors, statistical models, strategies and layered full conditional probabilities."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction

from envctl.algebra import AtomSpace, EmptyConditioning, Event, Subalgebra, iter_bits


class AssessmentError(ValueError):
    pass


class EventNotInPriorAlgebra(AssessmentError):
    pass


def as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError(f"refusing binary float {x!r}; pass a Fraction or a 'p/q' string")
    return Fraction(x)


@dataclass(frozen=True)
class Prior:
    """A probability on a subalgebra whose blocks are unions of conditioning cells."""

    sub: Subalgebra
    masses: tuple[Fraction, ...]

    def __post_init__(self):
        masses = tuple(as_fraction(m) for m in self.masses)
        object.__setattr__(self, "masses", masses)
        if len(masses) != len(self.sub.blocks):
            raise AssessmentError("one mass per prior block")
        if any(m < 0 for m in masses):
            raise AssessmentError("prior masses must be nonnegative")
        if sum(masses) != 1:
            raise AssessmentError(f"prior masses sum to {sum(masses)}, not 1")
        if not self.sub.is_row_algebra:
            raise AssessmentError("prior blocks must be unions of conditioning cells")

    @classmethod
    def on_cells(cls, space: AtomSpace, masses: Sequence) -> Prior:
        return cls(Subalgebra.cells(space), tuple(masses))

    @classmethod
    def on_groups(cls, space: AtomSpace, groups: Sequence[Sequence[int]], masses: Sequence) -> Prior:
        return cls(Subalgebra.from_row_groups(space, groups), tuple(masses))

    @property
    def space(self) -> AtomSpace:
        return self.sub.space

    @cached_property
    def block_rows(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.sub.block_rows(t)) for t in range(len(self.sub)))

    @property
    def is_on_cells(self) -> bool:
        return all(len(rows) == 1 for rows in self.block_rows)

    def prob(self, ev: Event) -> Fraction:
        if not self.sub.contains(ev):
            raise EventNotInPriorAlgebra(f"{ev!r} is not a union of prior blocks")
        return sum((self.masses[t] for t in self.sub.blocks_in(ev)), Fraction(0))

    def block_of_row(self, i: int) -> int:
        row = self.space.row_masks[i]
        for t, b in enumerate(self.sub.blocks):
            if b.mask & row:
                return t
        raise AssessmentError(f"row {i} not covered")  # unreachable for valid subalgebras


@dataclass(frozen=True)
class StatisticalModel:
    """Likelihood rows ``lambda(E_j|H_i)``; incompatible entries must be zero."""

    space: AtomSpace
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(as_fraction(x) for x in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        sp = self.space
        if len(rows) != sp.n_conditioning or any(len(r) != sp.n_observable for r in rows):
            raise AssessmentError("model shape does not match the atom space")
        for i, r in enumerate(rows):
            if any(x < 0 for x in r):
                raise AssessmentError(f"negative likelihood in row {sp.row_labels[i]}")
            if sum(r) != 1:
                raise AssessmentError(f"row {sp.row_labels[i]} sums to {sum(r)}, not 1")
            for j, x in enumerate(r):
                if x and not sp.compat[i][j]:
                    raise AssessmentError(f"mass on empty cell {sp.row_labels[i]}&{sp.col_labels[j]}")


@dataclass(frozen=True)
class Strategy:
    """``sigma(.|H_i)`` for every cell, stored as the mass each atom gets under its own row."""

    space: AtomSpace
    atom_values: tuple[Fraction, ...]

    @cached_property
    def _memo(self) -> dict[int, Fraction]:
        return {}

    def __call__(self, ev: Event, i: int) -> Fraction:
        # rows are disjoint, so the masked atoms identify the cell
        m = ev.mask & self.space.row_masks[i]
        hit = self._memo.get(m)
        if hit is None:
            hit = self._memo[m] = sum((self.atom_values[k] for k in iter_bits(m)), Fraction(0))
        return hit

    def row(self, ev: Event) -> list[Fraction]:
        """``sigma(ev|H_i)`` for every ``i``."""
        return [self(ev, i) for i in range(self.space.n_conditioning)]


def strategy_from_model(space: AtomSpace, model: StatisticalModel) -> Strategy:
    vals = tuple(model.rows[i][j] for i, j in space.atoms)
    return Strategy(space, vals)


@dataclass(frozen=True)
class LayeredConditional:
    """A full conditional probability as a sequence of probability vectors with disjoint supports.

    ``P(F|K)`` is read off the first layer giving ``K`` positive mass.
    """

    space: AtomSpace
    layers: tuple[tuple[Fraction, ...], ...]
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        layers = tuple(tuple(as_fraction(x) for x in layer) for layer in self.layers)
        object.__setattr__(self, "layers", layers)
        if self.check:
            problem = _layer_problem(self.space, layers)
            if problem:
                raise AssessmentError(problem[1])

    @classmethod
    def from_dicts(cls, space: AtomSpace, layers: Sequence[dict[int, Fraction]], check: bool = True):
        n = space.n_atoms
        return cls(space, tuple(tuple(Fraction(d.get(k, 0)) for k in range(n)) for d in layers), check)

    def layer_mass(self, k: int, ev: Event) -> Fraction:
        vec = self.layers[k]
        return sum((vec[a] for a in iter_bits(ev.mask)), Fraction(0))

    def first_layer(self, K: Event) -> int:
        for k in range(len(self.layers)):
            if self.layer_mass(k, K) > 0:
                return k
        raise AssessmentError(f"no layer gives {K!r} positive mass")

    def evaluate(self, F: Event, K: Event) -> Fraction:
        if K.is_empty:
            raise EmptyConditioning("conditioning event must be nonempty")
        k = self.first_layer(K)
        return self.layer_mass(k, F & K) / self.layer_mass(k, K)

    __call__ = evaluate

    def conditional_vector(self, K: Event) -> list[Fraction]:
        """``P(a|K)`` for every atom ``a``."""
        k = self.first_layer(K)
        vec = self.layers[k]
        tot = self.layer_mass(k, K)
        return [vec[a] / tot if K.mask >> a & 1 else Fraction(0) for a in range(self.space.n_atoms)]


def evaluate_layered(P: LayeredConditional, F: Event, K: Event) -> Fraction:
    return P.evaluate(F, K)


def _layer_problem(space: AtomSpace, layers) -> tuple[str, str] | None:
    n = space.n_atoms
    used = 0
    for k, layer in enumerate(layers):
        if len(layer) != n:
            return "shape", f"layer {k} has {len(layer)} entries for {n} atoms"
        if any(x < 0 for x in layer):
            return "C2", f"layer {k} has a negative mass"
        if sum(layer) != 1:
            return "C2", f"layer {k} has total mass {sum(layer)}, not 1"
        supp = sum(1 << a for a, x in enumerate(layer) if x > 0)
        if supp & used:
            return "support", f"layer {k} reuses atoms supported by an earlier layer"
        used |= supp
    if used != space.full_mask:
        return "support", "some atoms are never reached by any layer"
    return None


EXHAUSTIVE_ATOMS = 14


@dataclass
class ValidationReport:
    ok: bool
    condition: str | None = None
    witness: tuple | None = None
    message: str = ""
    exhaustive: bool = True

    def __bool__(self) -> bool:
        return self.ok


def validate_full_conditional(
    P: LayeredConditional | Callable[[Event, Event], Fraction], space: AtomSpace | None = None
) -> ValidationReport:
    """Check (C1)-(C3) on the whole finite algebra; returns the first violation found.

    For a callable this tests (C1) and additivity on every pair of events.  Given those,
    (C3) is equivalent to consistency between each ``P(.|H)`` and ``P(.|H - b)`` for single
    atoms ``b`` with ``P(H - b|H) > 0``; chaining one-atom removals reaches every subevent.
    Layered forms are additive by construction, so only their layer invariants and
    (C3) are examined.  Past ``EXHAUSTIVE_ATOMS`` atoms the ``2**n`` sweep is skipped for
    layered forms, whose layer invariants already imply all three conditions; the report
    then has ``exhaustive=False``.
    """
    if isinstance(P, LayeredConditional):
        space = P.space
        problem = _layer_problem(space, P.layers)
        if problem:
            return ValidationReport(False, problem[0], None, problem[1])
        if space.n_atoms > EXHAUSTIVE_ATOMS:
            return ValidationReport(True, exhaustive=False)
        evaluate = P.evaluate
    else:
        if space is None:
            raise TypeError("space is required when validating a plain callable")
        evaluate = P
    n = space.n_atoms
    full = space.full_mask
    atoms = [Event(space, 1 << a) for a in range(n)]
    vecs: dict[int, list[Fraction]] = {}
    for hm in range(1, full + 1):
        H = Event(space, hm)
        if isinstance(P, LayeredConditional):
            vec = P.conditional_vector(H)
        else:
            vec = [Fraction(evaluate(atoms[a], H)) for a in range(n)]
            if any(x < 0 for x in vec) or sum(vec) != 1:
                return ValidationReport(False, "C2", (space.omega, H), f"P(.|{H!r}) is not a probability")
            for em in range(full + 1):
                E = Event(space, em)
                v = Fraction(evaluate(E, H))
                if v != Fraction(evaluate(E & H, H)):
                    return ValidationReport(False, "C1", (E, H), f"P(E|H) != P(E&H|H) for E={E!r}, H={H!r}")
                if v != sum((vec[a] for a in iter_bits(em)), Fraction(0)):
                    return ValidationReport(False, "C2", (E, H), f"P(.|{H!r}) is not additive at {E!r}")
        if any(vec[a] for a in range(n) if not hm >> a & 1):
            return ValidationReport(False, "C1", (space.omega, H), f"P(.|{H!r}) charges atoms outside H")
        vecs[hm] = vec
    for hm, vec in vecs.items():
        for b in iter_bits(hm):
            gm = hm & ~(1 << b)
            if not gm:
                continue
            pg = sum((vec[a] for a in iter_bits(gm)), Fraction(0))
            if pg == 0:
                continue
            sub = vecs[gm]
            for a in iter_bits(gm):
                if vec[a] != pg * sub[a]:
                    G, H = Event(space, gm), Event(space, hm)
                    return ValidationReport(
                        False, "C3", (G, atoms[a], H), f"P(E&F|H) != P(E|H)P(F|E&H) for E={G!r}, F={atoms[a]!r}, H={H!r}"
                    )
    return ValidationReport(True)


def _row_subsets(space: AtomSpace, i: int):
    row = space.row_masks[i]
    sub = row
    while True:
        yield Event(space, sub)
        if sub == 0:
            return
        sub = (sub - 1) & row


def extends_assessment(P, prior: Prior, sigma: Strategy) -> bool:
    """True iff ``P`` reproduces the prior on its blocks and ``sigma`` on every cell."""
    space = prior.space
    omega = space.omega
    for t, b in enumerate(prior.sub.blocks):
        if P(b, omega) != prior.masses[t]:
            return False
    for i in range(space.n_conditioning):
        H = space.H(i)
        for F in _row_subsets(space, i):
            if P(F, H) != sigma(F, i):
                return False
    return True


def canonical_extension(prior: Prior, sigma: Strategy) -> LayeredConditional:
    """A product-form extension of ``{prior, sigma}``.

    Layer 0 spreads each block's mass evenly over its cells and multiplies by ``sigma``;
    cells left without mass get a uniform layer of their own, and atoms still uncovered
    end up in a final uniform layer.
    """
    space = prior.space
    n = space.n_atoms
    cell_mass = [Fraction(0)] * space.n_conditioning
    for t in range(len(prior.sub)):
        rows = prior.sub.block_rows(t)
        for i in rows:
            cell_mass[i] = prior.masses[t] / len(rows)
    layers = []
    layer0 = [cell_mass[i] * sigma.atom_values[k] for k, (i, _) in enumerate(space.atoms)]
    layers.append(layer0)
    null_cells = [i for i in range(space.n_conditioning) if cell_mass[i] == 0]
    if null_cells:
        w = Fraction(1, len(null_cells))
        layers.append([w * sigma.atom_values[k] if i in null_cells else Fraction(0) for k, (i, _) in enumerate(space.atoms)])
    covered = [any(layer[k] > 0 for layer in layers) for k in range(n)]
    left = [k for k in range(n) if not covered[k]]
    if left:
        w = Fraction(1, len(left))
        layers.append([w if k in left else Fraction(0) for k in range(n)])
    return LayeredConditional(space, tuple(tuple(x) for x in layers))
