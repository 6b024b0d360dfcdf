"""Command-line front end: run, verify, sweep, gen and counterexample.

Exit status: 0 success, 1 violation found, 2 input error, 3 mechanism
precondition failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import fileformat
from .analysis import (
    beta_witness,
    efficiency_witness,
    empirical_beta,
    empirical_efficiency,
    flat_witness,
    revenue_report,
    utility,
    welfare_report,
)
from .mechanisms import NAMES, Mechanism, PreconditionError, alpha_apg, gidm_revised
from .model import AuctionInstance, build_apg, informed_set
from .numbers import format_exact, to_fraction
from .verifier import (
    DISTRIBUTIONS,
    TOPOLOGIES,
    CounterexampleError,
    MechanismFailure,
    audit_corpus,
    gen_corpus,
    gen_instance,
    reconstruct_gidm_counterexample,
    search_counterexamples,
)
from .verifier.counterexample import CANONICAL, ID, cut_instance

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3

CORPUS_ENV = "DIFFAUCTION_CORPUS_SIZE"
DEFAULT_CORPUS = 1000

RUN_COLUMNS = (
    "mechanism", "instance", "winners", "allocation", "net_payments", "utilities",
    "welfare", "optimal_welfare", "efficiency", "revenue", "normalized_revenue",
)
VERIFY_COLUMNS = (
    "mechanism", "seed", "instances", "deviations", "sp_violations", "ir_violations",
    "first_sp", "first_ir",
)
SWEEP_COLUMNS = ("mechanism", "parameter", "value", "instances", "efficiency", "beta")

# Random corpus shape per mechanism: (n values, k values, topologies, unit demand).
CORPUS_DEFAULTS = {
    "alpha-apg": (range(2, 9), [1], list(TOPOLOGIES), False),
    "gapg": (range(2, 7), [2, 4, 6, 9], list(TOPOLOGIES), False),
    "gapg-topk": (range(2, 7), [2, 3, 4], list(TOPOLOGIES), True),
    "gidm": (range(2, 7), [1, 2, 3], ["path", "star", "random-tree"], True),
}


class InputError(Exception):
    """Bad command-line input (exit status 2)."""


def _fmt(x) -> str:
    return "" if x is None else format_exact(x)


def _ints(text: str) -> list[int]:
    """``"3"``, ``"2,4,6"`` or ``"2-8"``."""
    out: list[int] = []
    try:
        for part in text.split(","):
            if "-" in part.strip()[1:]:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers such as 3, 2,4,6 or 2-8, got {text!r}") from None
    return out


def _fractions(text: str) -> list[Fraction]:
    try:
        return [to_fraction(p) for p in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected numbers such as 0.5 or 0.25,0.5 or 1/3, got {text!r}") from None


def _names(text: str, allowed: Sequence[str], what: str) -> list[str]:
    out = [p.strip() for p in text.split(",")]
    for p in out:
        if p not in allowed:
            raise argparse.ArgumentTypeError(f"unknown {what} {p!r}; choose from {', '.join(allowed)}")
    return out


def _corpus_size(value: int | None) -> int:
    if value is not None:
        return value
    raw = os.environ.get(CORPUS_ENV)
    if raw is None:
        return DEFAULT_CORPUS
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{CORPUS_ENV} must be an integer, got {raw!r}") from None


def _mechanism(name: str, alpha: Fraction | None, reading: str) -> Mechanism:
    if name == "alpha-apg" and alpha is None:
        raise InputError("alpha-apg needs --alpha (or an alpha field in the instance file)")
    return Mechanism(name, alpha if name == "alpha-apg" else None, reading)


def _pairs(instance: AuctionInstance, values: dict[int, object]) -> str:
    return ";".join(f"{instance.name(i)}:{_fmt(values[i])}" for i in sorted(values))


def _write_csv(path: str, columns: Sequence[str], rows: list[dict]) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


# ---------------------------------------------------------------- run


def cmd_run(args: argparse.Namespace) -> int:
    instance, file_alpha = fileformat.load(args.instance)
    alpha = args.alpha[0] if args.alpha else file_alpha
    mech = _mechanism(args.mechanism, alpha, args.reading)
    outcome = mech(instance)
    welfare = welfare_report(instance, outcome)
    revenue = revenue_report(instance, outcome)
    informed = sorted(informed_set(instance))
    utilities = {i: utility(instance, i, outcome) for i in informed}
    apg = build_apg(instance)

    out = sys.stdout
    out.write(f"mechanism: {mech.label}\n")
    out.write(f"instance: {args.instance}\n")
    out.write(f"items: {instance.k}\n")
    out.write("aligned path: " + " ".join(instance.name(i) for i in apg.order) + "\n")
    groups = {}
    if mech.name == "alpha-apg":
        groups = alpha_apg(instance, mech.alpha)[1].group
    for i in apg.order:
        tag = f" ({groups[i].label})" if i in groups else ""
        out.write(
            f"  {instance.name(i)}: items {outcome.items(i)}, net payment {_fmt(outcome.paid(i))}, "
            f"utility {_fmt(utilities[i])}{tag}\n"
        )
    if mech.name == "gidm":
        _, state = gidm_revised(instance)
        out.write("trace:\n")
        for line in state.lines(instance):
            out.write(f"  {line}\n")
    winners = sorted(outcome.winners)
    out.write("winners: " + (" ".join(instance.name(i) for i in winners) or "none") + "\n")
    out.write(f"welfare: {_fmt(welfare.achieved)} of {_fmt(welfare.optimal)} (ratio {_fmt(welfare.ratio)})\n")
    out.write(f"revenue: {_fmt(revenue.revenue)}")
    if revenue.normalized is not None:
        out.write(f" (normalized {_fmt(revenue.normalized)})")
    out.write("\n")

    if args.out:
        row = {
            "mechanism": mech.label,
            "instance": args.instance,
            "winners": ";".join(instance.name(i) for i in winners),
            "allocation": _pairs(instance, {i: outcome.items(i) for i in informed}),
            "net_payments": _pairs(instance, {i: outcome.paid(i) for i in informed}),
            "utilities": _pairs(instance, utilities),
            "welfare": _fmt(welfare.achieved),
            "optimal_welfare": _fmt(welfare.optimal),
            "efficiency": _fmt(welfare.ratio),
            "revenue": _fmt(revenue.revenue),
            "normalized_revenue": _fmt(revenue.normalized),
        }
        _write_csv(args.out, RUN_COLUMNS, [row])
    return EXIT_OK


# ---------------------------------------------------------------- verify


def _random_corpus(name: str, args: argparse.Namespace, count: int) -> list[AuctionInstance]:
    ns, ks, topologies, unit = CORPUS_DEFAULTS[name]
    params = dict(
        n=list(args.n or ns),
        k=list(args.k or ks),
        topology=list(args.topology or topologies),
        distribution=list(args.distribution or ["int", "quarter"]),
        value_cap=args.value_cap,
        max_out_degree=args.max_out_degree,
        unit_demand=unit,
    )
    if name == "alpha-apg" and params["k"] != [1]:
        raise InputError("alpha-apg sells a single item; --k must be 1")
    return list(gen_corpus(count, args.seed, **params))


def _describe_sp(instance: AuctionInstance, report) -> str:
    dev = report.deviation
    nbrs = ",".join(instance.name(j) for j in sorted(dev.neighbors)) or "none"
    vals = ",".join(_fmt(v) for v in dev.valuations)
    return (
        f"buyer {instance.name(report.buyer)} reports values ({vals}) neighbors {{{nbrs}}}: "
        f"utility {_fmt(report.truthful_utility)} -> {_fmt(report.deviant_utility)}"
    )


def _describe_ir(instance: AuctionInstance, report) -> str:
    why = "" if report.rival is None else f" when buyer {instance.name(report.rival.buyer)} deviates"
    return f"buyer {instance.name(report.buyer)} has utility {_fmt(report.utility)}{why}"


def cmd_verify(args: argparse.Namespace) -> int:
    if args.scenario == "fig2":
        if args.mechanism != "gidm":
            raise InputError("--scenario fig2 is the GIDM counter-example; use --mechanism gidm")
        corpus = [reconstruct_gidm_counterexample()]
    elif args.instance:
        corpus = [fileformat.load(args.instance)[0]]
    else:
        count = _corpus_size(args.count)
        if count < 1:
            raise InputError("the corpus is empty; pass --count of at least 1")
        corpus = None

    alphas = args.alpha or ([fileformat.load(args.instance)[1]] if args.instance else [])
    if args.mechanism == "alpha-apg" and not [a for a in alphas if a is not None]:
        raise InputError("alpha-apg needs --alpha")
    settings = alphas if args.mechanism == "alpha-apg" else [None]

    rows, status = [], EXIT_OK
    for alpha in settings:
        mech = _mechanism(args.mechanism, alpha, args.reading)
        instances = corpus if corpus is not None else _random_corpus(args.mechanism, args, count)
        started = time.perf_counter()
        summary = audit_corpus(mech, instances, workers=args.workers)
        elapsed = time.perf_counter() - started
        first_sp = first_ir = ""
        if summary.sp_violations:
            idx, rep = summary.sp_violations[0]
            first_sp = f"instance {idx}: " + _describe_sp(instances[idx], rep)
        if summary.ir_violations:
            idx, rep = summary.ir_violations[0]
            first_ir = f"instance {idx}: " + _describe_ir(instances[idx], rep)
        print(f"mechanism: {mech.label}")
        print(f"  instances checked: {summary.instances}")
        print(f"  deviations evaluated: {summary.deviations}")
        print(f"  strategy-proofness violations: {len(summary.sp_violations)}")
        print(f"  individual-rationality violations: {len(summary.ir_violations)}")
        if first_sp:
            print(f"  first profitable deviation: {first_sp}")
        if first_ir:
            print(f"  first IR violation: {first_ir}")
        print(f"  time: {elapsed:.1f}s")
        if summary.violations:
            status = EXIT_VIOLATION
        rows.append({
            "mechanism": mech.label,
            "seed": args.seed,
            "instances": summary.instances,
            "deviations": summary.deviations,
            "sp_violations": len(summary.sp_violations),
            "ir_violations": len(summary.ir_violations),
            "first_sp": first_sp,
            "first_ir": first_ir,
        })
    if args.out:
        _write_csv(args.out, VERIFY_COLUMNS, rows)
    return status


# ---------------------------------------------------------------- sweep


def cmd_sweep(args: argparse.Namespace) -> int:
    count = _corpus_size(args.count)
    n = args.sweep_n
    cap = args.value_cap
    rows = []
    if args.mechanism == "alpha-apg":
        if not args.alpha:
            raise InputError("sweeping alpha-apg needs --alpha, e.g. --alpha 0.25,0.5,0.75")
        for alpha in args.alpha:
            mech = _mechanism("alpha-apg", alpha, args.reading)
            corpus = list(gen_corpus(
                count, args.seed, n=n, k=1, topology=list(args.topology or TOPOLOGIES),
                distribution=list(args.distribution or ["int", "quarter"]), value_cap=cap,
                max_out_degree=args.max_out_degree,
            ))
            if args.witnesses:
                corpus += [efficiency_witness(alpha, n, cap), beta_witness(n, cap)]
            if not corpus:
                raise InputError("the sweep corpus is empty; raise --count or keep the witnesses")
            rows.append({
                "mechanism": "alpha-apg", "parameter": "alpha", "value": _fmt(alpha),
                "instances": len(corpus),
                "efficiency": _fmt(empirical_efficiency(mech, corpus)),
                "beta": _fmt(empirical_beta(mech, corpus, cap)),
            })
    elif args.mechanism == "gapg":
        for k in args.k or [1, 4, 9]:
            mech = _mechanism("gapg", None, args.reading)
            corpus = list(gen_corpus(
                count, args.seed, n=n, k=k, topology=list(args.topology or TOPOLOGIES),
                distribution=list(args.distribution or ["int", "quarter"]), value_cap=cap,
                max_out_degree=args.max_out_degree,
            ))
            if args.witnesses:
                corpus.append(flat_witness(k, n, cap))
            if not corpus:
                raise InputError("the sweep corpus is empty; raise --count or keep the witnesses")
            rows.append({
                "mechanism": "gapg", "parameter": "k", "value": str(k),
                "instances": len(corpus),
                "efficiency": _fmt(empirical_efficiency(mech, corpus)),
                "beta": "",
            })
    else:
        raise InputError("sweep supports alpha-apg (over --alpha) and gapg (over --k)")
    _write_csv(args.out or "-", SWEEP_COLUMNS, rows)
    return EXIT_OK


# ---------------------------------------------------------------- gen


def cmd_gen(args: argparse.Namespace) -> int:
    count = args.count or 1
    if count < 1:
        raise InputError("--count must be at least 1")
    n = (args.n or [5])[0]
    k = (args.k or [1])[0]
    topology = (args.topology or ["random-graph"])[0]
    distribution = (args.distribution or ["int"])[0]
    docs = []
    for idx in range(count):
        inst = gen_instance(
            n, k, topology, distribution, seed=args.seed + idx, value_cap=args.value_cap,
            max_out_degree=args.max_out_degree, unit_demand=args.unit_demand,
        )
        docs.append(fileformat.dumps(inst, args.alpha[0] if args.alpha else None))
    if count == 1 and not args.out:
        sys.stdout.write(docs[0])
    elif count == 1:
        Path(args.out).write_text(docs[0])
    else:
        if not args.out:
            raise InputError("--count above 1 needs --out DIR")
        folder = Path(args.out)
        folder.mkdir(parents=True, exist_ok=True)
        for idx, doc in enumerate(docs):
            (folder / f"instance-{args.seed + idx:05d}.json").write_text(doc)
        print(f"wrote {count} instances to {folder}")
    return EXIT_OK


# ---------------------------------------------------------------- counterexample


def cmd_counterexample(args: argparse.Namespace) -> int:
    if args.search:
        found = 0
        for vals in search_counterexamples(args.max_value):
            found += 1
            print(" ".join(f"{x}={vals[x]}" for x in sorted(vals)))
        print(f"{found} valuation profile(s) reproduce the story")
        return EXIT_OK if found else EXIT_VIOLATION

    try:
        instance = reconstruct_gidm_counterexample()
    except CounterexampleError as exc:
        print(f"counter-example does not reproduce: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    d = ID["d"]
    print("valuations: " + " ".join(f"{x}={CANONICAL[x]}" for x in CANONICAL))
    for title, inst in (("truthful", instance), ("d withholds the auction", cut_instance(instance))):
        outcome, state = gidm_revised(inst)
        print(f"{title}:")
        for line in state.lines(inst):
            print(f"  {line}")
        print(f"  d: items {outcome.items(d)}, pays {_fmt(outcome.paid(d))}, utility {_fmt(utility(inst, d, outcome))}")
    if args.out:
        Path(args.out).write_text(fileformat.dumps(instance))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diffauction", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def mechanism_opts(p: argparse.ArgumentParser, required: bool = True) -> None:
        p.add_argument("--mechanism", "-m", choices=NAMES, required=required)
        p.add_argument("--alpha", type=_fractions, help="alpha value(s), comma separated")
        p.add_argument("--reading", choices=("kth", "max"), default="kth",
                       help="statistic used by gapg-topk (default: kth)")

    def corpus_opts(p: argparse.ArgumentParser) -> None:
        p.add_argument("--count", type=int, help=f"corpus size (default: ${CORPUS_ENV} or {DEFAULT_CORPUS})")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--n", type=_ints, help="buyer counts, e.g. 2-8")
        p.add_argument("--k", type=_ints, help="item counts, e.g. 2,4,6,9")
        p.add_argument("--topology", type=lambda s: _names(s, TOPOLOGIES, "topology"))
        p.add_argument("--distribution", type=lambda s: _names(s, DISTRIBUTIONS, "distribution"))
        p.add_argument("--value-cap", type=to_fraction, default=Fraction(10))
        p.add_argument("--max-out-degree", type=int, default=5)

    p = sub.add_parser("run", help="run a mechanism on an instance file")
    p.add_argument("instance")
    mechanism_opts(p)
    p.add_argument("--out", help="write a CSV row to this path ('-' for stdout)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="audit strategy-proofness and IR")
    mechanism_opts(p)
    corpus_opts(p)
    p.add_argument("--instance", help="audit one instance file instead of a random corpus")
    p.add_argument("--scenario", choices=("fig2",), help="audit the canned GIDM counter-example")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="write the summary as CSV")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="empirical efficiency and beta per parameter value")
    mechanism_opts(p)
    corpus_opts(p)
    p.add_argument("--sweep-n", type=int, default=5, help="buyers per instance (shared, default 5)")
    p.add_argument("--no-witnesses", dest="witnesses", action="store_false",
                   help="leave out the hand-built worst-case profiles")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="write random instance files")
    corpus_opts(p)
    p.add_argument("--alpha", type=_fractions)
    p.add_argument("--unit-demand", action="store_true")
    p.add_argument("--out", help="file (one instance) or directory (several)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("counterexample", help="replay the GIDM counter-example")
    p.add_argument("--search", action="store_true", help="enumerate integer valuations that reproduce it")
    p.add_argument("--max-value", type=int, default=10)
    p.add_argument("--out", help="also save the instance file here")
    p.set_defaults(func=cmd_counterexample)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (InputError, ValueError, OSError) as exc:
        # InstanceFormatError, InstanceError and DeviationLimitError are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MechanismFailure as exc:
        if isinstance(exc.cause, PreconditionError):
            print(f"precondition failed: {exc}", file=sys.stderr)
            return EXIT_PRECONDITION
        raise


if __name__ == "__main__":
    sys.exit(main())
