"""Finite event algebras generated by a conditioning partition and an observable partition.

Atoms are the nonempty cells ``H_i & E_j`` of a compatibility grid.  Every event is a
bitmask over those atoms, so Boolean operations are integer operations.
"""

from __future__ import annotations

import re
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field


class AlgebraError(ValueError):
    pass


class EmptyRowOrColumn(AlgebraError):
    pass


class BadIndex(AlgebraError):
    pass


class EmptyConditioning(AlgebraError):
    pass


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class AtomSpace:
    """The atom grid of ``<L u E>``: rows are cells ``H_i``, columns are cells ``E_j``.

    Atoms are indexed row-major over the true entries of ``compat``.
    """

    compat: tuple[tuple[bool, ...], ...]
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    atoms: tuple[tuple[int, int], ...] = field(init=False, repr=False, compare=False)
    row_masks: tuple[int, ...] = field(init=False, repr=False, compare=False)
    col_masks: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        atoms = []
        for i, row in enumerate(self.compat):
            for j, ok in enumerate(row):
                if ok:
                    atoms.append((i, j))
        index = {a: k for k, a in enumerate(atoms)}
        rows = [0] * self.n_conditioning
        cols = [0] * self.n_observable
        for k, (i, j) in enumerate(atoms):
            rows[i] |= 1 << k
            cols[j] |= 1 << k
        object.__setattr__(self, "atoms", tuple(atoms))
        object.__setattr__(self, "row_masks", tuple(rows))
        object.__setattr__(self, "col_masks", tuple(cols))
        object.__setattr__(self, "_index", index)

    @property
    def n_conditioning(self) -> int:
        return len(self.compat)

    @property
    def n_observable(self) -> int:
        return len(self.compat[0]) if self.compat else 0

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.atoms)) - 1

    @property
    def omega(self) -> Event:
        return Event(self, self.full_mask)

    @property
    def empty(self) -> Event:
        return Event(self, 0)

    def H(self, i: int) -> Event:
        if not 0 <= i < self.n_conditioning:
            raise BadIndex(f"no conditioning cell with index {i}")
        return Event(self, self.row_masks[i])

    def E(self, j: int) -> Event:
        if not 0 <= j < self.n_observable:
            raise BadIndex(f"no observable cell with index {j}")
        return Event(self, self.col_masks[j])

    def atom_index(self, i: int, j: int) -> int | None:
        return self._index.get((i, j))

    def atom(self, i: int, j: int) -> Event:
        k = self._index.get((i, j))
        if k is None:
            raise BadIndex(f"H{i + 1} & E{j + 1} is empty")
        return Event(self, 1 << k)

    def event(self, atom_indices: Sequence[int]) -> Event:
        mask = 0
        for k in atom_indices:
            if not 0 <= k < self.n_atoms:
                raise BadIndex(f"atom index {k} out of range")
            mask |= 1 << k
        return Event(self, mask)

    def row_of(self, k: int) -> int:
        return self.atoms[k][0]

    def col_of(self, k: int) -> int:
        return self.atoms[k][1]

    def rows_meeting(self, ev: Event) -> list[int]:
        return [i for i, m in enumerate(self.row_masks) if m & ev.mask]

    def atom_label(self, k: int) -> str:
        i, j = self.atoms[k]
        return f"{self.row_labels[i]}&{self.col_labels[j]}"


def build_space(
    compat: Sequence[Sequence[bool]],
    row_labels: Sequence[str] | None = None,
    col_labels: Sequence[str] | None = None,
) -> AtomSpace:
    """Validate a compatibility matrix and return its :class:`AtomSpace`."""
    rows = tuple(tuple(bool(x) for x in r) for r in compat)
    if not rows or not rows[0]:
        raise EmptyRowOrColumn("compatibility matrix is empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise AlgebraError("compatibility matrix is ragged")
    for i, r in enumerate(rows):
        if not any(r):
            raise EmptyRowOrColumn(f"conditioning cell {i + 1} meets no observable cell")
    for j in range(width):
        if not any(r[j] for r in rows):
            raise EmptyRowOrColumn(f"observable cell {j + 1} meets no conditioning cell")
    rl = tuple(row_labels) if row_labels is not None else tuple(f"H{i + 1}" for i in range(len(rows)))
    cl = tuple(col_labels) if col_labels is not None else tuple(f"E{j + 1}" for j in range(width))
    if len(rl) != len(rows) or len(cl) != width:
        raise AlgebraError("label count does not match matrix shape")
    if len(set(rl) | set(cl)) != len(rl) + len(cl):
        raise AlgebraError("row and column labels must be distinct")
    return AtomSpace(rows, rl, cl)


def full_space(n_conditioning: int, n_observable: int, **labels) -> AtomSpace:
    return build_space([[True] * n_observable for _ in range(n_conditioning)], **labels)


@dataclass(frozen=True)
class Event:
    space: AtomSpace
    mask: int

    def _other(self, other: Event) -> int:
        if other.space is not self.space and other.space != self.space:
            raise AlgebraError("events live on different atom spaces")
        return other.mask

    def __and__(self, other: Event) -> Event:
        return Event(self.space, self.mask & self._other(other))

    def __or__(self, other: Event) -> Event:
        return Event(self.space, self.mask | self._other(other))

    def __sub__(self, other: Event) -> Event:
        return Event(self.space, self.mask & ~self._other(other))

    def __xor__(self, other: Event) -> Event:
        return Event(self.space, self.mask ^ self._other(other))

    def __invert__(self) -> Event:
        return Event(self.space, self.space.full_mask & ~self.mask)

    def __le__(self, other: Event) -> bool:
        return self.mask & ~self._other(other) == 0

    def __ge__(self, other: Event) -> bool:
        return other <= self

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.mask)

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    @property
    def is_omega(self) -> bool:
        return self.mask == self.space.full_mask

    def __repr__(self) -> str:
        if self.mask == 0:
            return "Event(∅)"
        if self.is_omega:
            return "Event(Ω)"
        return "Event({" + ", ".join(self.space.atom_label(k) for k in self) + "})"


# expression grammar: or-expr := and-expr ('|' and-expr)* ; and-expr := unary ('&' unary)*
_TOKEN = re.compile(r"\s*(?:(?P<op>[()&|~!¬∧∨])|(?P<name>[A-Za-z_Ωθ∅][\w.#'Ωθ]*))")
_WORD_OPS = {"and": "&", "or": "|", "not": "~"}
_OPS = {"∧": "&", "∨": "|", "¬": "~", "!": "~"}


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise AlgebraError(f"cannot parse event expression at {text[pos:]!r}")
        pos = m.end()
        tok = m.group("op") or m.group("name")
        tok = _OPS.get(tok, tok)
        tok = _WORD_OPS.get(tok.lower(), tok) if m.group("name") else tok
        out.append(tok)
    return out


def event_of(space: AtomSpace, expr: str, aliases: Mapping[str, Event] | None = None) -> Event:
    """Parse an expression over row/column labels into an :class:`Event`.

    ``&``/``∧``/``and``, ``|``/``∨``/``or`` and ``~``/``¬``/``not`` are accepted,
    as are ``Omega``/``Ω`` and ``empty``/``∅``.  ``aliases`` adds extra names.
    """
    names: dict[str, Event] = {"Omega": space.omega, "Ω": space.omega, "empty": space.empty, "∅": space.empty}
    for i, lab in enumerate(space.row_labels):
        names[lab] = space.H(i)
    for j, lab in enumerate(space.col_labels):
        names[lab] = space.E(j)
    if aliases:
        names.update(aliases)
    toks = _tokenize(expr)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take():
        nonlocal pos
        pos += 1
        return toks[pos - 1]

    def unary() -> Event:
        tok = take() if peek() is not None else None
        if tok is None:
            raise AlgebraError(f"unexpected end of expression {expr!r}")
        if tok == "~":
            return ~unary()
        if tok == "(":
            ev = disj()
            if peek() != ")":
                raise AlgebraError(f"unbalanced parentheses in {expr!r}")
            take()
            return ev
        if tok in names:
            return names[tok]
        if tok in "&|)":
            raise AlgebraError(f"unexpected {tok!r} in {expr!r}")
        raise BadIndex(f"unknown label {tok!r}")

    def conj() -> Event:
        ev = unary()
        while peek() == "&":
            take()
            ev = ev & unary()
        return ev

    def disj() -> Event:
        ev = conj()
        while peek() == "|":
            take()
            ev = ev | conj()
        return ev

    ev = disj()
    if pos != len(toks):
        raise AlgebraError(f"trailing tokens in {expr!r}")
    return ev


def gn_implies(first: tuple[Event, Event], second: tuple[Event, Event]) -> bool:
    """Goodman-Nguyen implication ``E|H <= F|K``: ``E&H <= F&K`` and ``~E&H >= ~F&K``."""
    (e, h), (f, k) = first, second
    if h.is_empty or k.is_empty:
        raise EmptyConditioning("conditioning event must be nonempty")
    return (e & h) <= (f & k) and ((~f) & k) <= ((~e) & h)


@dataclass(frozen=True)
class Subalgebra:
    """A finite subalgebra given by its atoms (``blocks``)."""

    space: AtomSpace
    blocks: tuple[Event, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.blocks) != len(self.labels):
            raise AlgebraError("one label per block")
        seen = 0
        for b in self.blocks:
            if b.is_empty:
                raise AlgebraError("subalgebra blocks must be nonempty")
            if b.mask & seen:
                raise AlgebraError("subalgebra blocks must be disjoint")
            seen |= b.mask
        if seen != self.space.full_mask:
            raise AlgebraError("subalgebra blocks must cover every atom")

    @classmethod
    def from_row_groups(
        cls, space: AtomSpace, groups: Sequence[Sequence[int]], labels: Sequence[str] | None = None
    ) -> Subalgebra:
        blocks = []
        for g in groups:
            m = 0
            for i in g:
                m |= space.H(i).mask
            blocks.append(Event(space, m))
        if labels is None:
            labels = ["+".join(space.row_labels[i] for i in g) for g in groups]
        return cls(space, tuple(blocks), tuple(labels))

    @classmethod
    def cells(cls, space: AtomSpace) -> Subalgebra:
        """The algebra generated by the conditioning partition itself."""
        return cls.from_row_groups(space, [[i] for i in range(space.n_conditioning)])

    def __len__(self) -> int:
        return len(self.blocks)

    def contains(self, ev: Event) -> bool:
        return all(b.mask & ev.mask in (0, b.mask) for b in self.blocks)

    def blocks_in(self, ev: Event) -> list[int]:
        """Indices of blocks contained in ``ev``."""
        return [t for t, b in enumerate(self.blocks) if b <= ev]

    def blocks_meeting(self, ev: Event) -> list[int]:
        return [t for t, b in enumerate(self.blocks) if b.mask & ev.mask]

    def hull(self, ev: Event) -> Event:
        """Smallest event of the subalgebra containing ``ev``."""
        m = 0
        for b in self.blocks:
            if b.mask & ev.mask:
                m |= b.mask
        return Event(self.space, m)

    def union(self, idx) -> Event:
        m = 0
        for t in idx:
            m |= self.blocks[t].mask
        return Event(self.space, m)

    def block_rows(self, t: int) -> list[int]:
        """Conditioning cells inside block ``t`` (requires a block made of full rows)."""
        b = self.blocks[t]
        rows = [i for i, m in enumerate(self.space.row_masks) if m & b.mask]
        if any(self.space.row_masks[i] & ~b.mask for i in rows):
            raise AlgebraError(f"block {self.labels[t]!r} is not a union of conditioning cells")
        return rows

    @property
    def is_row_algebra(self) -> bool:
        try:
            for t in range(len(self.blocks)):
                self.block_rows(t)
        except AlgebraError:
            return False
        return True

    def events(self) -> Iterator[Event]:
        n = len(self.blocks)
        for sel in range(1 << n):
            yield self.union(iter_bits(sel))


def set_partitions(items: list) -> Iterator[list[list]]:
    """All set partitions of ``items``, the all-singletons partition first."""
    if not items:
        yield []
        return
    *head, last = items
    for part in set_partitions(head):
        yield part + [[last]]
        for k in range(len(part)):
            yield part[:k] + [part[k] + [last]] + part[k + 1:]


def finite_partitions(sub: Subalgebra, max_count: int | None = None) -> Iterator[tuple[Event, ...]]:
    """Partitions of Omega into events of ``sub``; the finest (the blocks) comes first."""
    for n, part in enumerate(set_partitions(list(range(len(sub.blocks))))):
        if max_count is not None and n >= max_count:
            return
        yield tuple(sub.union(group) for group in part)
