"""Command-line front end.

Exit codes: 0 success, 1 incoherent assessment or oracle disagreement, 2 usage or parse
error, 3 a query outside what the closed forms can answer.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from envctl.algebra import AlgebraError, Event, iter_bits
from envctl.capacity import (
    Capacity,
    CapacityError,
    choquet,
    core_vertices,
    expectation,
    inner_measure,
    is_n_monotone,
    is_totally_monotone,
    mobius,
)
from envctl.coherence import ConditionalAssessment, Entry, ExtensionOracle, assessment_from_prior_strategy, check_coherence
from envctl.countable import NotDescribable, fd_envelope_countable, fsc_envelope, joint_bounds_countable, sc_envelope, truncate
from envctl.envelopes import (
    NotIntegrable,
    conditional_envelope,
    dis_extension_envelope,
    fsc_envelope_finite,
    fully_dis_envelope,
    index_sets,
    sc_envelope_finite,
)
from envctl.fixtures import BadGrid, bayes_convergence
from envctl.modelfile import KINDS, ModelFile, ParseError, load

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_UNSUPPORTED = 0, 1, 2, 3
CORE_ENUMERATION_CAP = 8


class UsageError(ValueError):
    pass


def rational(text: str) -> Fraction:
    """argparse type for ``p/q`` arguments; decimal points are refused."""
    if "." in text or "e" in text.lower():
        raise argparse.ArgumentTypeError(f"{text!r}: write rationals as p/q")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{text!r} is not a rational") from None


def fmt(x: Fraction) -> str:
    return str(x)


def dec(x: Fraction) -> str:
    return f"{float(x):.6f}"


def _plain(obj):
    """Make reports JSON-friendly: fractions become ``p/q`` strings."""
    if isinstance(obj, Fraction):
        return fmt(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (frozenset, set)):
        return sorted(obj)
    return obj


def table(header: list[str], rows: list[list[str]]) -> str:
    cols = [header] + rows
    widths = [max(len(r[c]) for r in cols) for c in range(len(header))]
    lines = ["  ".join(s.ljust(w) for s, w in zip(r, widths)).rstrip() for r in cols]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(_plain(payload), indent=2))
    else:
        print(text)


# -- envelope ----------------------------------------------------------------------------------


@dataclass
class QueryReport:
    kind: str
    F: str
    K: str
    lower: Fraction | None = None
    upper: Fraction | None = None
    case_tag: str = ""
    upper_tag: str = ""
    index_sets: dict | None = None
    witness: dict = field(default_factory=dict)
    oracle: dict | None = None
    error: str = ""

    def as_dict(self) -> dict:
        d = asdict(self)
        if self.lower is not None:
            d["lower_decimal"], d["upper_decimal"] = dec(self.lower), dec(self.upper)
        return {k: v for k, v in d.items() if v not in (None, "", {})}


def _labels(space, rows) -> list[str]:
    return [space.row_labels[i] for i in rows]


def _entries(mf: ModelFile) -> ConditionalAssessment:
    inst = mf.finite
    base = assessment_from_prior_strategy(inst.prior, inst.sigma)
    return base.extended(Entry(mf.event(a.F), mf.event(a.K), a.value) for a in mf.assessments)


def _finite_result(mf: ModelFile, kind: str, F: Event, K: Event, oracle: ExtensionOracle | None):
    inst = mf.finite
    prior, sigma = inst.prior, inst.sigma
    if mf.assessments:
        if kind != "coherent":
            raise UsageError(f"kind {kind!r} covers the prior and strategy only; drop the extra assessments")
        lo, hi = oracle.interval(F, K)
        return lo, hi, "lp-extension", "lp-extension", {}
    if kind == "coherent":
        res = conditional_envelope(prior, sigma, F, K, with_aux=True)
    elif kind == "dis":
        res = dis_extension_envelope(prior, sigma, F, K)
    elif kind == "fully-dis":
        res = fully_dis_envelope(prior, sigma, F, K, with_aux=True)
    elif kind == "sc":
        if not K.is_omega:
            raise NotDescribable("the sc envelope is unconditional; use fsc for a conditioning event")
        res = sc_envelope_finite(prior, sigma, F)
    else:
        res = fsc_envelope_finite(prior, sigma, F, K)
    aux = dict(res.aux)
    for key in ("lower_allocation", "upper_allocation"):
        if key in aux:
            aux[key] = {inst.space.row_labels[i]: m for i, m in enumerate(aux[key]) if m}
    return res.lower, res.upper, res.case_tag, res.upper_tag, aux


def _countable_result(mf: ModelFile, kind: str, F: Event, K: Event):
    model = mf.countable
    if kind == "fully-dis":
        res = fd_envelope_countable(model, F, K)
    elif kind == "fsc":
        res = fsc_envelope(model, F, K)
    elif kind in ("sc", "coherent"):
        if not K.is_omega:
            raise NotDescribable(f"countable {kind} envelopes are available for unconditional events only")
        res = sc_envelope(model, F) if kind == "sc" else joint_bounds_countable(model, F)
    else:
        raise NotDescribable("the disintegrable envelope of a countable model is not finitely describable here")
    return res.lower, res.upper, res.case_tag, res.upper_tag, dict(res.aux)


def run_queries(mf: ModelFile, kinds_override: list[str] | None, with_oracle: bool) -> list[QueryReport]:
    if mf.kind == "capacity":
        raise UsageError("a capacity file has no queries; use the capacity subcommand")
    if not mf.queries:
        raise UsageError("the model file lists no queries")
    oracle = None
    if mf.kind == "finite" and (with_oracle or mf.assessments):
        oracle = ExtensionOracle(_entries(mf))
    out = []
    for q in mf.queries:
        F, K = mf.event(q.F), mf.event(q.K)
        for kind in kinds_override or q.kinds or ["coherent"]:
            rep = QueryReport(kind, q.F, q.K)
            try:
                if mf.kind == "finite":
                    lo, hi, tag, utag, aux = _finite_result(mf, kind, F, K, oracle)
                    i1, i2, i3 = index_sets(F, K)
                    sp = mf.space
                    rep.index_sets = {"I1": _labels(sp, i1), "I2": _labels(sp, i2), "I3": _labels(sp, i3)}
                else:
                    lo, hi, tag, utag, aux = _countable_result(mf, kind, F, K)
            except (NotDescribable, NotIntegrable) as e:
                rep.error = f"{type(e).__name__}: {e}"
                out.append(rep)
                continue
            rep.lower, rep.upper, rep.case_tag, rep.upper_tag, rep.witness = lo, hi, tag, utag, aux
            if with_oracle and oracle is not None:
                lp = oracle.interval(F, K)
                relation = "equal" if kind == "coherent" else "within"
                agree = (lo, hi) == lp if relation == "equal" else lp[0] <= lo and hi <= lp[1]
                rep.oracle = {"lp": list(lp), "relation": relation, "agree": agree}
            out.append(rep)
    return out


def cmd_envelope(args) -> int:
    mf = load(args.file)
    reports = run_queries(mf, [args.kind] if args.kind else None, args.oracle)
    rows = []
    for r in reports:
        if r.error:
            rows.append([r.kind, f"{r.F} | {r.K}", "-", "-", r.error, ""])
            continue
        flag = "" if r.oracle is None else ("ok" if r.oracle["agree"] else "MISMATCH")
        rows.append([r.kind, f"{r.F} | {r.K}", fmt(r.lower), fmt(r.upper), f"{r.case_tag} ({dec(r.lower)} .. {dec(r.upper)})", flag])
    emit(args, {"file": str(args.file), "queries": [r.as_dict() for r in reports]},
         table(["kind", "query", "lower", "upper", "case", "oracle"], rows))
    if any(r.oracle is not None and not r.oracle["agree"] for r in reports):
        return EXIT_VIOLATION
    if any(r.error for r in reports):
        return EXIT_UNSUPPORTED
    return EXIT_OK


# -- check -------------------------------------------------------------------------------------


def _layer_dump(space, vec) -> dict:
    return {space.atom_label(k): v for k, v in enumerate(vec) if v}


def cmd_check(args) -> int:
    mf = load(args.file)
    if mf.kind == "capacity":
        cap = mf.capacity
        emit(args, {"file": str(args.file), "kind": "capacity", "ok": True},
             f"capacity on {len(cap.ground)} elements: normalized and monotone")
        return EXIT_OK
    note = ""
    if mf.kind == "countable":
        model = mf.countable
        specs = [s for table in model.specs for s in table.values()]
        if not all(s.tail_constant for s in specs):
            emit(args, {"file": str(args.file), "kind": "countable", "coherent": None, "note": "tail specs are consistent"},
                 "tail specs are consistent; tails that are not eventually constant admit no finite check")
            return EXIT_OK
        cut = max((k for s in specs for k, _ in s.exceptions), default=0)
        inst = truncate(model, cut).instance
        a = assessment_from_prior_strategy(inst.prior, inst.sigma)
        space = inst.space
        note = f"checked on the truncation after index {cut}"
    else:
        a = _entries(mf)
        space = mf.space
    res = check_coherence(a)
    payload = {"file": str(args.file), "kind": mf.kind, "coherent": res.coherent, "entries": len(a)}
    if note:
        payload["note"] = note
    lines = [f"{len(a)} entries: {'coherent' if res else 'INCOHERENT'}" + (f" ({note})" if note else "")]
    if res:
        payload["layers"] = len(res.witness.layers)
        lines.append(f"witness with {len(res.witness.layers)} layer(s)")
        if args.witness:
            payload["witness"] = [_layer_dump(space, v) for v in res.witness.layers]
            for t, v in enumerate(res.witness.layers):
                lines.append(f"  layer {t}: " + ", ".join(f"{k}={fmt(x)}" for k, x in _layer_dump(space, v).items()))
    else:
        pending = [{"F": repr(e.F), "K": repr(e.K), "value": e.value} for e in res.pending]
        payload.update(failed_layer=res.failed_layer, violated=pending)
        lines.append(f"no probability on layer {res.failed_layer} satisfies the pending entries:")
        lines += [f"  P({p['F']} | {p['K']}) = {fmt(p['value'])}" for p in pending]
    emit(args, payload, "\n".join(lines))
    return EXIT_OK if res else EXIT_VIOLATION


# -- bayes -------------------------------------------------------------------------------------


def cmd_bayes(args) -> int:
    rows = bayes_convergence(args.grid, args.n, args.theta1, args.theta2, args.levels)
    payload = {
        "n": args.n,
        "theta1": args.theta1,
        "theta2": args.theta2,
        "limit": rows[0].limit,
        "rows": [
            {"k": r.k, "posterior": r.posterior, "error": r.error, "predictive": r.predictive,
             "posterior_decimal": dec(r.posterior), "error_decimal": dec(r.error)}
            for r in rows
        ],
    }
    text = table(
        ["k", "posterior", "limit", "abs error", "P(X=n)"],
        [[str(r.k), dec(r.posterior), dec(r.limit), f"{float(r.error):.3e}", dec(r.predictive)] for r in rows],
    )
    emit(args, payload, f"limit {fmt(rows[0].limit)}\n{text}")
    return EXIT_OK


# -- capacity ----------------------------------------------------------------------------------


def _subset(cap: Capacity, m: int) -> str:
    return "{" + ",".join(cap.ground[b] for b in iter_bits(m)) + "}"


def _witness_text(w) -> str:
    return " ".join("{" + ",".join(sorted(s)) + "}" for s in w)


def _capacity_of(mf: ModelFile) -> tuple[Capacity, list[tuple[str, tuple]]]:
    if mf.kind == "capacity":
        return mf.capacity, list(mf.integrands)
    if mf.kind == "finite":
        inst = mf.finite
        sp = inst.space
        cols = [(f"sigma({sp.col_labels[j]}|.)", tuple(inst.sigma.row(sp.E(j)))) for j in range(sp.n_observable)]
        return inner_measure(inst.prior), cols
    return inner_measure(mf.countable.quotient_measure()), []


def cmd_capacity(args) -> int:
    mf = load(args.file)
    cap, integrands = _capacity_of(mf)
    mass = mobius(cap)
    subsets = list(range(1, cap.full + 1))
    payload = {
        "ground": list(cap.ground),
        "values": {_subset(cap, m): cap.values[m] for m in subsets},
        "mobius": {_subset(cap, m): mass.mass[m] for m in subsets},
    }
    lines = [table(["subset", "value", "mobius"], [[_subset(cap, m), fmt(cap.values[m]), fmt(mass.mass[m])] for m in subsets])]
    if args.analyze:
        total = is_totally_monotone(cap)
        payload["totally_monotone"] = total
        lines.append(f"totally monotone: {'yes' if total else 'NO'}")
        verdicts = {}
        for n in range(2, max(cap.size, 2) + 1):
            rep = is_n_monotone(cap, n)
            verdicts[n] = {"ok": rep.ok, "method": rep.method, "witness": rep.witness}
            lines.append(f"{n}-monotone: {'yes' if rep else 'NO'}" + ("" if rep else f" (witness {_witness_text(rep.witness)})"))
        payload["n_monotone"] = verdicts
        if not verdicts[2]["ok"]:
            lines.append("core vertices: not enumerated (the capacity is not 2-monotone)")
        elif cap.size > CORE_ENUMERATION_CAP:
            lines.append(f"core vertices: not enumerated above {CORE_ENUMERATION_CAP} elements")
        else:
            verts = core_vertices(cap)
            payload["core_vertices"] = [dict(zip(cap.ground, v)) for v in verts]
            lines.append(f"core vertices ({len(verts)}):")
            lines += ["  " + ", ".join(f"{g}={fmt(x)}" for g, x in zip(cap.ground, v)) for v in verts]
            payload["choquet"] = {}
            for name, xs in integrands:
                c = choquet(xs, cap)
                low = min(expectation(xs, v) for v in verts)
                payload["choquet"][name] = {"choquet": c, "core_min": low}
                lines.append(f"choquet {name}: {fmt(c)} (min over core {fmt(low)})")
    emit(args, payload, "\n".join(lines))
    return EXIT_OK


# -- entry point -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="envctl", description="Envelopes of extensions of a prior and a strategy.")
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("check", parents=[common], help="coherence of the assessment in a model file")
    p.add_argument("file")
    p.add_argument("--witness", action="store_true", help="print the layers of the coherent extension")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("envelope", parents=[common], help="envelopes for the queries of a model file")
    p.add_argument("file")
    p.add_argument("--kind", choices=KINDS, help="override the kinds listed with each query")
    p.add_argument("--oracle", action="store_true", help="cross-check finite queries against the LP oracle")
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("bayes", parents=[common], help="grid posterior against its uniform-prior limit")
    p.add_argument("--grid", type=int, required=True, metavar="k")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta1", type=rational, required=True, metavar="p/q")
    p.add_argument("--theta2", type=rational, required=True, metavar="p/q")
    p.add_argument("--levels", type=int, default=1, help="number of grid doublings to tabulate")
    p.set_defaults(func=cmd_bayes)

    p = sub.add_parser("capacity", parents=[common], help="Mobius masses and monotonicity of a capacity")
    p.add_argument("file")
    p.add_argument("--analyze", action="store_true", help="add monotonicity verdicts, core vertices and Choquet values")
    p.set_defaults(func=cmd_capacity)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except (ParseError, UsageError, BadGrid, CapacityError, AlgebraError, OSError) as e:
        print(f"envctl: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NotDescribable, NotIntegrable) as e:
        print(f"envctl: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
