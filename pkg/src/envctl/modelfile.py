"""YAML model files.

Three document shapes are recognised, by their top-level keys:

* finite (``space``, ``prior``, ``model``, optional ``assessments``)
* countable (``columns``, ``profiles``, ``cells``, optional ``named``)
* capacity (``capacity`` with ``ground``, ``values`` and optional ``integrands``)

Finite and countable documents may carry ``queries``.  Every rational is an integer or a
``"p/q"`` string; YAML floats are refused so that no binary rounding sneaks in.
"""

from __future__ import annotations

import re
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import yaml
from yaml.constructor import SafeConstructor

from envctl.algebra import AlgebraError, Event, build_space, event_of, iter_bits
from envctl.assessment import AssessmentError, Prior
from envctl.capacity import Capacity, CapacityError, mask_of
from envctl.countable import ModelError, ProfileModel, TailSpec
from envctl.fixtures import FiniteInstance

KINDS = ("coherent", "dis", "fully-dis", "sc", "fsc")
_RATIONAL = re.compile(r"\s*(-?\d+)\s*(?:/\s*(\d+))?\s*")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, field: str = ""):
        self.line = line
        self.field = field
        where = ", ".join(x for x in (f"line {line}" if line else "", field) if x)
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True)
class Query:
    F: str
    K: str = "Omega"
    kinds: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExtraEntry:
    F: str
    K: str
    value: Fraction


@dataclass(frozen=True)
class ModelFile:
    kind: str  # "finite", "countable" or "capacity"
    finite: FiniteInstance | None = None
    countable: ProfileModel | None = None
    capacity: Capacity | None = None
    integrands: tuple[tuple[str, tuple[Fraction, ...]], ...] = ()
    assessments: tuple[ExtraEntry, ...] = ()
    queries: tuple[Query, ...] = ()

    @property
    def space(self):
        if self.finite is not None:
            return self.finite.space
        if self.countable is not None:
            return self.countable.space
        return None

    def event(self, expr: str) -> Event:
        return event_of(self.space, expr)


# -- locations -------------------------------------------------------------------------------


def _line_map(node, path: tuple = (), out: dict | None = None) -> dict:
    out = {} if out is None else out
    out.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = SafeConstructor().construct_object(k) if isinstance(k, yaml.ScalarNode) else k.value
            out.setdefault(path + (str(key),), k.start_mark.line + 1)
            _line_map(v, path + (str(key),), out)
    elif isinstance(node, yaml.SequenceNode):
        for t, v in enumerate(node.value):
            _line_map(v, path + (str(t),), out)
    return out


class _Reader:
    def __init__(self, lines: dict):
        self.lines = lines

    def fail(self, path: tuple, message: str):
        probe = tuple(str(p) for p in path)
        while probe not in self.lines and probe:
            probe = probe[:-1]
        raise ParseError(message, self.lines.get(probe), ".".join(str(p) for p in path))

    def rational(self, x, path: tuple) -> Fraction:
        if isinstance(x, bool) or isinstance(x, float):
            self.fail(path, f"{x!r} is not an exact rational; write it as a 'p/q' string")
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            m = _RATIONAL.fullmatch(x)
            if m and m.group(2) != "0":
                return Fraction(int(m.group(1)), int(m.group(2) or 1))
        self.fail(path, f"expected an integer or a 'p/q' string, got {x!r}")

    def mapping(self, x, path: tuple) -> Mapping:
        if not isinstance(x, Mapping):
            self.fail(path, "expected a mapping")
        return x

    def seq(self, x, path: tuple) -> list:
        if not isinstance(x, list):
            self.fail(path, "expected a list")
        return x

    def labels(self, x, path: tuple) -> list[str]:
        out = [str(v) for v in self.seq(x, path)]
        if len(set(out)) != len(out):
            self.fail(path, "labels must be distinct")
        return out

    def get(self, d: Mapping, key: str, path: tuple, default=...):
        if key in d:
            return d[key]
        if default is ...:
            self.fail(path, f"missing field {key!r}")
        return default

    def flag(self, x, path: tuple) -> bool:
        if not isinstance(x, bool):
            self.fail(path, "expected true or false")
        return x


# -- sections --------------------------------------------------------------------------------


def _finite(r: _Reader, doc: Mapping) -> FiniteInstance:
    space = r.mapping(r.get(doc, "space", ()), ("space",))
    rows = r.labels(r.get(space, "rows", ("space",)), ("space", "rows"))
    cols = r.labels(r.get(space, "columns", ("space",)), ("space", "columns"))
    compat = space.get("compat")
    if compat is None:
        compat = [[1] * len(cols) for _ in rows]
    else:
        compat = r.seq(compat, ("space", "compat"))
        if len(compat) != len(rows):
            r.fail(("space", "compat"), f"expected {len(rows)} rows")
        for i, row in enumerate(compat):
            if len(r.seq(row, ("space", "compat", i))) != len(cols) or any(v not in (0, 1) for v in row):
                r.fail(("space", "compat", i), f"expected {len(cols)} entries, each 0 or 1")
    try:
        sp = build_space(compat, row_labels=rows, col_labels=cols)
    except AlgebraError as e:
        r.fail(("space",), str(e))

    groups, masses = [], []
    for t, blk in enumerate(r.seq(r.get(doc, "prior", ()), ("prior",))):
        path = ("prior", t)
        blk = r.mapping(blk, path)
        members = r.labels(r.get(blk, "rows", path), path + ("rows",))
        unknown = [x for x in members if x not in rows]
        if unknown:
            r.fail(path + ("rows",), f"unknown row label {unknown[0]!r}")
        groups.append([rows.index(x) for x in members])
        masses.append(r.rational(r.get(blk, "mass", path), path + ("mass",)))
    try:
        prior = Prior.on_groups(sp, groups, masses)
    except (AlgebraError, AssessmentError) as e:
        r.fail(("prior",), str(e))

    model = {str(k): v for k, v in r.mapping(r.get(doc, "model", ()), ("model",)).items()}
    if set(model) != set(rows):
        r.fail(("model",), "the model needs exactly one likelihood row per row label")
    lam = []
    for lab in rows:
        vals = r.seq(model[lab], ("model", lab))
        if len(vals) != len(cols):
            r.fail(("model", lab), f"expected {len(cols)} values")
        lam.append([r.rational(v, ("model", lab, j)) for j, v in enumerate(vals)])
    try:
        return FiniteInstance.build(sp, prior, lam)
    except AssessmentError as e:
        r.fail(("model",), str(e))


def _tailspec(r: _Reader, x, path: tuple) -> TailSpec:
    if not isinstance(x, Mapping):
        return TailSpec.constant(r.rational(x, path))
    exc = r.mapping(x.get("exceptions", {}), path + ("exceptions",))
    exceptions = {}
    for k, v in exc.items():
        if isinstance(k, bool) or not isinstance(k, int):
            r.fail(path + ("exceptions", k), "exception indices are positive integers")
        exceptions[k] = r.rational(v, path + ("exceptions", k))
    try:
        if "limit" in x:
            extra = set(x) - {"limit", "exceptions"}
            if extra:
                r.fail(path, f"unexpected field {sorted(extra)[0]!r} next to 'limit'")
            return TailSpec.eventually_constant(exceptions, r.rational(x["limit"], path + ("limit",)))
        fields = ("liminf", "limsup", "inf", "sup")
        vals = [r.rational(r.get(x, f, path), path + (f,)) for f in fields]
        flags = [r.flag(r.get(x, f, path, True), path + (f,)) for f in ("inf_attained", "sup_attained")]
        return TailSpec(tuple(exceptions.items()), *vals, *flags)
    except ModelError as e:
        r.fail(path, str(e))


def _countable(r: _Reader, doc: Mapping) -> ProfileModel:
    cols = r.labels(r.get(doc, "columns", ()), ("columns",))
    named = {}
    for lab, entry in r.mapping(doc.get("named", {}) or {}, ("named",)).items():
        path = ("named", lab)
        entry = r.mapping(entry, path)
        row = r.seq(r.get(entry, "row", path), path + ("row",))
        named[str(lab)] = (
            r.rational(r.get(entry, "mass", path), path + ("mass",)),
            [r.rational(v, path + ("row", j)) for j, v in enumerate(row)],
        )
    profiles = {}
    for lab, table in r.mapping(r.get(doc, "profiles", ()), ("profiles",)).items():
        path = ("profiles", lab)
        specs = {}
        for key, spec in r.mapping(table, path).items():
            labels = tuple(s.strip() for s in str(key).split(","))
            specs[labels if len(labels) > 1 else labels[0]] = _tailspec(r, spec, path + (key,))
        profiles[str(lab)] = specs
    cells = []
    for t, c in enumerate(r.seq(r.get(doc, "cells", ()), ("cells",))):
        path = ("cells", t)
        c = r.mapping(c, path)
        cells.append(
            (
                str(r.get(c, "label", path)),
                r.labels(r.get(c, "profiles", path), path + ("profiles",)),
                r.rational(r.get(c, "weight", path), path + ("weight",)),
            )
        )
    try:
        return ProfileModel.build(cols, named, profiles, cells)
    except (ModelError, AlgebraError) as e:
        r.fail(("profiles",), str(e))


def _capacity(r: _Reader, doc: Mapping) -> tuple[Capacity, tuple]:
    cap = r.mapping(doc["capacity"], ("capacity",))
    ground = r.labels(r.get(cap, "ground", ("capacity",)), ("capacity", "ground"))
    table = {}
    for key, v in r.mapping(cap.get("values", {}) or {}, ("capacity", "values")).items():
        path = ("capacity", "values", key)
        subset = [s.strip() for s in str(key).split(",") if s.strip()]
        try:
            m = mask_of(ground, subset)
        except CapacityError as e:
            r.fail(path, str(e))
        table[m] = r.rational(v, path)
    vals = [Fraction(0)] * (1 << len(ground))
    vals[-1] = Fraction(1)
    for m, v in table.items():
        vals[m] = v
    try:
        capacity = Capacity(tuple(ground), tuple(vals))
    except CapacityError as e:
        r.fail(("capacity", "values"), str(e))
    integrands = []
    for name, xs in r.mapping(cap.get("integrands", {}) or {}, ("capacity", "integrands")).items():
        path = ("capacity", "integrands", name)
        xs = r.mapping(xs, path)
        if set(map(str, xs)) != set(ground):
            r.fail(path, "an integrand gives one value per ground element")
        integrands.append((str(name), tuple(r.rational(xs[g], path + (g,)) for g in ground)))
    return capacity, tuple(integrands)


def _event(r: _Reader, sp, expr, path: tuple) -> str:
    if not isinstance(expr, str):
        r.fail(path, "expected an event expression")
    try:
        ev = event_of(sp, expr)
    except AlgebraError as e:
        r.fail(path, str(e))
    if path[-1] == "K" and ev.is_empty:
        r.fail(path, "conditioning event is empty")
    return expr


def _queries(r: _Reader, doc: Mapping, sp) -> tuple[Query, ...]:
    out = []
    for t, q in enumerate(r.seq(doc.get("queries", []) or [], ("queries",))):
        path = ("queries", t)
        q = r.mapping(q, path)
        kinds = q.get("kinds", [])
        kinds = [kinds] if isinstance(kinds, str) else r.seq(kinds, path + ("kinds",))
        for k in kinds:
            if k not in KINDS:
                r.fail(path + ("kinds",), f"unknown envelope kind {k!r}; choose from {', '.join(KINDS)}")
        out.append(
            Query(
                _event(r, sp, r.get(q, "F", path), path + ("F",)),
                _event(r, sp, q.get("K", "Omega"), path + ("K",)),
                tuple(kinds),
            )
        )
    return tuple(out)


def _assessments(r: _Reader, doc: Mapping, sp) -> tuple[ExtraEntry, ...]:
    out = []
    for t, a in enumerate(r.seq(doc.get("assessments", []) or [], ("assessments",))):
        path = ("assessments", t)
        a = r.mapping(a, path)
        v = r.rational(r.get(a, "value", path), path + ("value",))
        if not 0 <= v <= 1:
            r.fail(path + ("value",), "assessed values lie in [0, 1]")
        out.append(
            ExtraEntry(_event(r, sp, r.get(a, "F", path), path + ("F",)), _event(r, sp, r.get(a, "K", path), path + ("K",)), v)
        )
    return tuple(out)


def parse(text: str) -> ModelFile:
    try:
        node = yaml.compose(text)
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ParseError(str(getattr(e, "problem", e)), mark.line + 1 if mark else None) from None
    if node is None or not isinstance(doc, Mapping):
        raise ParseError("a model file is a YAML mapping")
    r = _Reader(_line_map(node))
    if "capacity" in doc:
        cap, integrands = _capacity(r, doc)
        return ModelFile("capacity", capacity=cap, integrands=integrands)
    if "profiles" in doc:
        model = _countable(r, doc)
        if doc.get("assessments"):
            r.fail(("assessments",), "extra assessments are supported on finite models only")
        return ModelFile("countable", countable=model, queries=_queries(r, doc, model.space))
    if "space" in doc:
        inst = _finite(r, doc)
        return ModelFile(
            "finite", finite=inst, assessments=_assessments(r, doc, inst.space), queries=_queries(r, doc, inst.space)
        )
    raise ParseError("expected one of the top-level keys 'space', 'profiles' or 'capacity'")


def load(path: str | Path) -> ModelFile:
    return parse(Path(path).read_text(encoding="utf-8"))


# -- serialization ---------------------------------------------------------------------------


def _q(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _spec_doc(s: TailSpec):
    exc = {k: _q(v) for k, v in s.exceptions}
    if s.tail_constant:
        return _q(s.liminf) if not exc else {"limit": _q(s.liminf), "exceptions": exc}
    out = {"liminf": _q(s.liminf), "limsup": _q(s.limsup), "inf": _q(s.inf_value), "sup": _q(s.sup_value)}
    out.update(inf_attained=s.inf_attained, sup_attained=s.sup_attained)
    if exc:
        out["exceptions"] = exc
    return out


def to_document(mf: ModelFile) -> dict:
    if mf.kind == "capacity":
        cap = mf.capacity
        values = {",".join(cap.ground[b] for b in iter_bits(m)): _q(v) for m, v in enumerate(cap.values) if 0 < m < cap.full and v}
        out = {"ground": list(cap.ground), "values": values}
        if mf.integrands:
            out["integrands"] = {n: {g: _q(x) for g, x in zip(cap.ground, xs)} for n, xs in mf.integrands}
        return {"capacity": out}
    if mf.kind == "finite":
        inst = mf.finite
        sp = inst.space
        doc = {
            "space": {
                "rows": list(sp.row_labels),
                "columns": list(sp.col_labels),
                "compat": [[int(c) for c in row] for row in sp.compat],
            },
            "prior": [
                {"rows": [sp.row_labels[i] for i in rows], "mass": _q(m)}
                for rows, m in zip(inst.prior.block_rows, inst.prior.masses)
            ],
            "model": {sp.row_labels[i]: [_q(x) for x in row] for i, row in enumerate(inst.model.rows)},
        }
        if mf.assessments:
            doc["assessments"] = [{"F": a.F, "K": a.K, "value": _q(a.value)} for a in mf.assessments]
    else:
        m = mf.countable
        sp = m.space
        doc = {"columns": list(sp.col_labels)}
        if m.n_named:
            doc["named"] = {
                sp.row_labels[r]: {"mass": _q(m.named_mass[r]), "row": [_q(x) for x in m.named_rows[r]]}
                for r in range(m.n_named)
            }
        doc["profiles"] = {
            sp.row_labels[m.n_named + t]: {
                ",".join(sp.col_labels[j] for j in iter_bits(cols)): _spec_doc(s) for cols, s in table.items()
            }
            for t, table in enumerate(m.specs)
        }
        doc["cells"] = [
            {"label": c.label, "profiles": [sp.row_labels[r] for r in c.profiles], "weight": _q(c.weight)} for c in m.cells
        ]
    if mf.queries:
        doc["queries"] = []
        for q in mf.queries:
            entry = {"F": q.F, "K": q.K}
            if q.kinds:
                entry["kinds"] = list(q.kinds)
            doc["queries"].append(entry)
    return doc


def serialize(mf: ModelFile) -> str:
    return yaml.safe_dump(to_document(mf), sort_keys=False, allow_unicode=True, default_flow_style=None)
