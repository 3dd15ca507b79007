"""Command-line entry point: ``ghz-lhv <subcommand> [options]``.

Exit codes: 0 success, 2 validation/usage error, 1 internal error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import lhv, lp, qm, stats
from .polarization import MAIN_CONTEXTS, all_contexts, parse_context

log = logging.getLogger("ghz_lhv")

FORMATS = ("text", "csv", "json")


class UsageError(ValueError):
    pass


def fmt_decimal(x) -> str:
    """Round to 6 decimals and drop trailing zeros."""
    s = f"{float(x):.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def fmt_exact(p: Fraction, denom: int) -> str:
    """``p`` written over ``denom`` when that is exact, else reduced."""
    num = p * denom
    if num.denominator == 1:
        return f"{num.numerator}/{denom}"
    return str(p)


def common_denominator(m: lhv.ModelDistribution) -> int:
    d = 1
    for w in m.weights.values():
        d = d * w.denominator // math.gcd(d, w.denominator)
    return d


def load_model(source: str) -> lhv.ModelDistribution:
    if source == "pinned":
        return lhv.canonical_model()
    if source == "uniform":
        return lhv.ModelDistribution.uniform()
    if source == "pan-lr":
        return lhv.pan_lr_model()
    path = Path(source)
    if not path.exists():
        raise UsageError(f"model source {source!r} is neither pinned/uniform/pan-lr nor an existing file")
    if path.suffix == ".json":
        try:
            doc = json.loads(path.read_text())
            weights = {lhv.InstructionSet.parse(k): Fraction(v) for k, v in doc["witness_sets"].items()}
        except (KeyError, ValueError, TypeError) as exc:
            raise lhv.TableFormatError(f"{path}: not a fit result: {exc}") from None
        return lhv.ModelDistribution(weights)
    return lhv.load_table(path).distribution()


def _contexts(names):
    if not names:
        return None
    return [parse_context(n) for n in names]


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


# -- subcommands -------------------------------------------------------------

def cmd_predict(args) -> int:
    m = load_model(args.model)
    ctxs = _contexts(args.context) or all_contexts()
    denom = common_denominator(m)
    dists = [lhv.outcome_distribution(m, c) for c in ctxs]
    if args.format == "json":
        doc = {"model": args.model, "experiments": [
            {"context": d.context.name,
             "outcomes": {o.label: float(p) for o, p in d.items()},
             "exact": {o.label: fmt_exact(p, denom) for o, p in d.items()}}
            for d in dists]}
        _emit(args, _json(doc))
    elif args.format == "csv":
        rows = [(d.context.name, o.label, fmt_exact(p, denom), fmt_decimal(p)) for d in dists for o, p in d.items()]
        _emit(args, _csv(rows, ("context", "outcome", "exact", "value")))
    else:
        lines = []
        for d in dists:
            lines.append(f"[{d.context.name}]")
            lines += [f"{o.label} {fmt_exact(p, denom)} {fmt_decimal(p)}" for o, p in d.items()]
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_qm(args) -> int:
    ctxs = _contexts(args.context) or all_contexts()
    dists = [qm.qm_outcome_distribution(c) for c in ctxs]
    exps = {c.name: qm.expectation_product(c) for c in ctxs}
    if args.format == "json":
        doc = {"experiments": [{"context": d.context.name, "outcomes": d.to_dict(),
                                "expectation": exps[d.context.name]} for d in dists]}
        _emit(args, _json(doc))
    elif args.format == "csv":
        rows = [(d.context.name, o.label, fmt_decimal(p)) for d in dists for o, p in d.items()]
        _emit(args, _csv(rows, ("context", "outcome", "value")))
    else:
        lines = []
        for d in dists:
            lines.append(f"[{d.context.name}] E = {fmt_decimal(exps[d.context.name])}")
            lines += [f"{o.label} {fmt_decimal(p)}" for o, p in d.items()]
        _emit(args, "\n".join(lines) + "\n")
    return 0


def _comparison(args):
    records = stats.ingest_records(args.data) if args.data else stats.pan_records()
    m = load_model(args.model)
    model_d = {c.name: lhv.outcome_distribution(m, c) for c in MAIN_CONTEXTS}
    qm_d = {c.name: qm.qm_outcome_distribution(c) for c in MAIN_CONTEXTS}
    return records, model_d, qm_d, stats.compare_models(records, model_d, qm_d)


def _comparison_csv(report) -> str:
    rows = [(r.context.name, fmt_decimal(r.model_deviation), fmt_decimal(r.qm_deviation), r.winner)
            for r in report.rows]
    rows.append(("average", fmt_decimal(report.model_average), fmt_decimal(report.qm_average), report.winner))
    return _csv(rows, ("context", "model_dev", "qm_dev", "winner"))


def cmd_compare(args) -> int:
    _, _, _, report = _comparison(args)
    if args.format == "json":
        _emit(args, _json(report.to_json()))
    elif args.format == "csv":
        _emit(args, _comparison_csv(report))
    else:
        lines = ["context  measured  sigma  model  qm     model_dev  qm_dev  model_z  qm_z   winner"]
        for r in report.rows:
            z = lambda v: "-" if v is None else f"{v:+.2f}"
            sig = "-" if r.sigma is None else fmt_decimal(r.sigma)
            lines.append(f"{r.context.name:<8} {r.measured:<9.4f} {sig:<6} {r.model_fraction:<6.4f} "
                         f"{r.qm_fraction:<6.4f} {r.model_deviation:<10.4f} {r.qm_deviation:<7.4f} "
                         f"{z(r.model_z):<8} {z(r.qm_z):<6} {r.winner}")
        lines.append(f"average deviation: model {fmt_decimal(report.model_average)}, "
                     f"qm {fmt_decimal(report.qm_average)}; winner: {report.winner}")
        if report.spurious_sum is not None:
            lines.append(f"summed spurious fraction (yyx, yxy, xyy): {fmt_decimal(report.spurious_sum)}")
        lines.append("note: a joint aggregate is applied to each context that lacks its own data")
        _emit(args, "\n".join(lines) + "\n")
    return 0


def _fit_targets(args):
    ctxs = _contexts(args.context)
    if args.targets == "qm":
        return [qm.qm_outcome_distribution(c) for c in (ctxs or MAIN_CONTEXTS)]
    records = stats.ingest_records(args.targets)
    targets = [r.distribution() for r in records if r.outcomes is not None]
    if ctxs:
        targets = [t for t in targets if t.context in ctxs]
    if not targets:
        raise UsageError("no per-outcome target distributions found")
    return targets


def cmd_fit(args) -> int:
    result = lp.fit_distribution(_fit_targets(args), args.metric)
    if result.certificate:
        log.warning("fit certificate: %s", result.certificate)
    doc = result.to_json()
    if args.table_out:
        ws = set(result.model.weights.values())
        if len(result.model.support) != lhv.TABLE_SIZE or ws != {Fraction(1, lhv.TABLE_SIZE)}:
            raise UsageError("fitted model is not a uniform 32-set table; use the JSON summary instead")
        lhv.save_table(lhv.UniformTable(frozenset(result.model.support)), args.table_out,
                       [f"fit result, metric {args.metric}, objective {fmt_decimal(result.objective)}"])
    if args.format == "json":
        _emit(args, _json(doc))
    elif args.format == "csv":
        rows = [(k, fmt_decimal(v)) for k, v in doc["residuals"].items()]
        _emit(args, _csv(rows, ("context:outcome", "residual")))
    else:
        lines = [f"metric {args.metric}: optimum {fmt_decimal(result.objective)} "
                 f"(rounded model {fmt_decimal(result.rounded_objective)})"]
        lines += [f"  {s} {w}" for s, w in result.model.weights.items()]
        if result.certificate:
            lines.append(f"certificate: {result.certificate}")
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_search(args) -> int:
    c = lhv.TableConstraints.load(args.constraints) if args.constraints else lhv.h1_constraints()
    res = lhv.search_tables(c, limit=args.limit, time_budget=args.time_budget)
    if res.truncated:
        log.warning("time budget exhausted; result is partial")
    if args.format == "json":
        doc = {"count": len(res), "truncated": res.truncated,
               "tables": [[s.text for s in t.sorted_members] for t in res]}
        _emit(args, _json(doc))
    elif args.format == "csv":
        rows = [(k, s.text) for k, t in enumerate(res) for s in t.sorted_members]
        _emit(args, _csv(rows, ("table", "instruction_set")))
    else:
        blocks = [lhv.dump_table(t, [f"solution {k + 1}"]) for k, t in enumerate(res)]
        head = f"# {len(res)} table(s){' (partial)' if res.truncated else ''}\n"
        _emit(args, head + "\n".join(blocks))
    return 0


def cmd_sample(args) -> int:
    if args.n < 1:
        raise UsageError(f"--n must be at least 1, got {args.n}")
    m = load_model(args.model)
    r = stats.monte_carlo_sample(m, parse_context(args.context), args.n, args.seed)
    exact = lhv.outcome_distribution(m, r.context)
    if args.format == "json":
        _emit(args, _json(r.to_json()))
    elif args.format == "csv":
        rows = [(r.context.name, o.label, c, fmt_decimal(c / r.n), fmt_decimal(exact.probs[o]))
                for o, c in r.counts.items()]
        _emit(args, _csv(rows, ("context", "outcome", "count", "fraction", "exact")))
    else:
        lines = [f"[{r.context.name}] n={r.n} seed={r.seed}"]
        lines += [f"{o.label} {c} {fmt_decimal(c / r.n)} (exact {fmt_decimal(exact.probs[o])})"
                  for o, c in r.counts.items()]
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_mermin(args) -> int:
    bound, witness = lp.max_linear_functional(lp.mermin_weights())
    if args.qm:
        exps = {n: qm.expectation_product(n) for n in lp.MERMIN_SIGNS}
        value, exact, source = lp.mermin_value(exps), None, "qm"
    else:
        m = load_model(args.model)
        exps_exact = {n: lhv.model_expectation_exact(m, n) for n in lp.MERMIN_SIGNS}
        exact = lp.mermin_value(exps_exact)
        value, source = float(exact), args.model
        exps = {n: float(v) for n, v in exps_exact.items()}
    if args.format == "json":
        doc = {"source": source, "value": float(value), "exact": None if exact is None else str(exact),
               "expectations": exps, "lhv_bound": bound, "bound_witness": witness.text}
        _emit(args, _json(doc))
    elif args.format == "csv":
        rows = [(source, float(value), bound)]
        _emit(args, _csv(rows, ("source", "value", "lhv_bound")))
    else:
        _emit(args, f"mermin {round(float(value), 12)!r}\n"
                    f"expectations: " + ", ".join(f"{k}={fmt_decimal(v)}" for k, v in exps.items()) + "\n"
                    f"instruction-set maximum {bound} (attained by {witness.text})\n")
    return 0


def cmd_report(args) -> int:
    if not args.out:
        raise UsageError("report needs --out DIR")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    records, model_d, qm_d, report = _comparison(args)
    bars = stats.bar_chart_rows(MAIN_CONTEXTS, model_d, qm_d, records)
    header = ("context", "outcome", "series", "value")
    (outdir / "bars.csv").write_text(_csv([(b.context, b.outcome, b.series, fmt_decimal(b.value)) for b in bars], header))
    agg = stats.aggregate_bar_rows(report)
    (outdir / "aggregate_bars.csv").write_text(_csv([(b.context, b.outcome, b.series, fmt_decimal(b.value)) for b in agg], header))
    (outdir / "comparison.csv").write_text(_comparison_csv(report))
    (outdir / "comparison.json").write_text(_json(report.to_json()))
    sys.stdout.write(f"wrote bars.csv, aggregate_bars.csv, comparison.csv, comparison.json to {outdir}\n")
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="ghz-lhv", description="Instruction-set and GHZ predictions for three-photon x/y experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    model_help = "pinned | uniform | pan-lr | table file | fit JSON"

    s = sub.add_parser("predict", parents=[common], help="exact outcome fractions of a model")
    s.add_argument("--model", default="pinned", help=model_help)
    s.add_argument("--context", action="append", help="e.g. yyx (repeatable; default all 8)")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("qm", parents=[common], help="GHZ-state predictions")
    s.add_argument("--context", action="append")
    s.set_defaults(func=cmd_qm)

    s = sub.add_parser("compare", parents=[common], help="model vs QM against measured aggregates")
    s.add_argument("--data", help="experiment JSON (default: bundled aggregates)")
    s.add_argument("--model", default="pinned", help=model_help)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("fit", parents=[common], help="best instruction-set model for target distributions")
    s.add_argument("--targets", required=True, help="experiment JSON with per-outcome fractions, or 'qm'")
    s.add_argument("--metric", choices=lp.METRICS, default="L1")
    s.add_argument("--context", action="append")
    s.add_argument("--table-out", metavar="PATH", help="also write the model as a table file")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("search-table", parents=[common], help="reconstruct 32-set tables from constraints")
    s.add_argument("--constraints", help="constraint JSON (default: the 6/2 profile)")
    s.add_argument("--limit", type=int, default=1)
    s.add_argument("--time-budget", type=float, default=None, metavar="SECONDS")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("sample", parents=[common], help="Monte Carlo coincidence counts")
    s.add_argument("--model", default="pinned", help=model_help)
    s.add_argument("--context", default="yyx")
    s.add_argument("--n", type=int, default=10000)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("mermin", parents=[common], help="Mermin value of a model or the GHZ state")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--model", default="pinned", help=model_help)
    g.add_argument("--qm", action="store_true")
    s.set_defaults(func=cmd_mermin)

    s = sub.add_parser("report", parents=[common], help="write figure data and comparison tables")
    s.add_argument("--data")
    s.add_argument("--model", default="pinned", help=model_help)
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        src = type(exc).__module__.rsplit(".", 1)[-1]
        prefix = f"ghz-lhv {args.command}" if src in ("builtins", "cli") else f"ghz-lhv {args.command}: {src}"
        print(f"{prefix}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal failure path
        print(f"ghz-lhv {args.command}: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
