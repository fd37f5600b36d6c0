"""Command-line front end.

Exit codes: 0 success, 1 validation/decodability failure, 2 usage error,
3 size guard or timeout.  All numeric output is printed to six decimal
places with an explicit unit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from . import graphs, mis, oracle, rates, simulate
from .errors import (
    CompBcastError,
    EnumerationTimeout,
    GuardExceeded,
    InstanceFormatError,
    InvalidInstanceError,
)
from .model import (
    Instance,
    demand_table,
    load_instance,
    support,
    tuple_label,
    validate_instance,
)


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("COMPBCAST_THREADS", "1")))
    except ValueError:
        return 1


def _load(args) -> Instance:
    inst = load_instance(args.instance)
    report = validate_instance(inst)
    if not report.ok:
        raise InvalidInstanceError(report.violations)
    return inst


def _write_or_print(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_validate(args) -> int:
    try:
        inst = load_instance(args.instance)
    except InstanceFormatError as exc:
        print(f"malformed instance file: {exc}")
        return 1
    report = validate_instance(inst)
    print(str(report))
    return 0 if report.ok else 1


def cmd_graph(args) -> int:
    inst = _load(args)
    if args.union:
        g = graphs.broadcast_graph(inst)
    else:
        g = graphs.build_characteristic_graph(inst, args.user)
    _write_or_print(graphs.export_dot(g), args.output)
    return 0


def cmd_mis(args) -> int:
    inst = _load(args)
    if args.user is not None:
        g = graphs.build_characteristic_graph(inst, args.user)
    else:
        g = graphs.broadcast_graph(inst)
    family = mis.enumerate_mis(g, timeout_s=args.timeout)
    print(f"{len(family)} maximal independent sets of {g.label} graph:")
    print(family.pretty())
    return 0


def cmd_rate_ach(args) -> int:
    inst = _load(args)
    g = graphs.broadcast_graph(inst)
    family = mis.enumerate_mis(g)
    mode = "exhaustive" if args.exhaustive else ("heuristic" if args.heuristic else "auto")
    report = rates.optimize_achievable(inst, family, base=args.base, mode=mode, seed=args.seed)
    print(report.describe())
    cover = report.witness
    if cover is not None and cover.is_deterministic():
        print("witness assignment (tuple -> set):")
        for x, a in zip(support(inst), cover.assignment()):
            print(f"  {tuple_label(x)} -> {{{', '.join(tuple_label(v) for v in family.sets[a])}}}")
    return 0


def cmd_baseline(args) -> int:
    inst = _load(args)
    print(rates.slepian_wolf_baseline(inst, base=args.base).describe())
    if args.message:
        tables = [demand_table(m, inst.q, inst.num_datasets) for m in args.message]
        print(rates.explicit_message_rate(inst, tables, base=args.base).describe())
    return 0


def cmd_bound_prop1(args) -> int:
    inst = _load(args)
    print(rates.prop1_lower_bound(inst, args.interpretation, base=args.base).describe())
    return 0


def cmd_bound_genie(args) -> int:
    inst = _load(args)
    if args.all_orderings:
        best, values = rates.genie_best_ordering(inst, base=args.base)
        for perm in sorted(values):
            print(f"  ordering {','.join(map(str, perm))}: {values[perm]:.6f}")
        print(best.describe())
    else:
        ordering = [int(v) for v in args.ordering.split(",")]
        print(rates.genie_lower_bound(inst, ordering, base=args.base).describe())
    return 0


def cmd_scheme_compat(args) -> int:
    inst = _load(args)
    pair = tuple(int(v) for v in args.pair.split(","))
    if len(pair) != 2:
        raise ValueError(f"--pair wants two comma-separated user indices, got {args.pair!r}")
    scheme = rates.find_compatible_function(inst, pair, mode=args.mode)
    if scheme is None:
        print(f"no compatible function found for pair {pair} in mode {args.mode}")
        return 1
    print(f"compatible function for users {pair}: H = {scheme.entropy_qary:.6f} "
          f"{inst.q:g}-ary symbols")
    if scheme.coefficients is not None:
        terms = [f"{c}*X{j}" for j, c in enumerate(scheme.coefficients, start=1) if c]
        print("  Z = " + " + ".join(terms))
    else:
        print("  table: " + ",".join(str(v) for v in scheme.table))
    return 0


def _three_linear_schemes(inst: Instance):
    out = []
    for pair in ((1, 2), (2, 3), (1, 3)):
        scheme = rates.find_compatible_function(inst, pair, mode="linear")
        if scheme is None:
            raise ValueError(f"no linear compatible function for pair {pair}")
        out.append(scheme)
    return out


def cmd_scheme_split(args) -> int:
    inst = _load(args)
    try:
        s12, s23, s13 = _three_linear_schemes(inst)
        report = rates.split_scheme_rate(inst, s12, s23, s13, base=args.base)
    except ValueError as exc:
        print(f"splitting scheme not applicable: {exc}")
        return 1
    print(report.describe())
    return 0


def cmd_scheme_vector(args) -> int:
    inst = _load(args)
    with open(args.scheme, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    scheme = rates.build_vector_scheme(
        inst, int(doc["coordinate"]), doc["cells"], doc["messages"]
    )
    try:
        report = rates.vector_scheme_rate(inst, scheme, base=args.base)
    except ValueError as exc:
        print(f"vector scheme rejected: {exc}")
        return 1
    print(report.describe())
    return 0


def cmd_oracle(args) -> int:
    inst = _load(args)
    g = graphs.broadcast_graph(inst)
    report = oracle.oracle_search(inst, g, objective=args.objective, base=args.base)
    print(report.describe())
    print("optimal partition:")
    print(report.witness.pretty())
    return 0


def cmd_simulate(args) -> int:
    inst = _load(args)
    g = graphs.broadcast_graph(inst)
    family = mis.enumerate_mis(g)
    ach = rates.optimize_achievable(inst, family, base=inst.q)
    cover = ach.witness
    codebook_rate, bin_rate = args.codebook_rate, args.bin_rate
    if codebook_rate is None or bin_rate is None:
        auto_prime, auto_bin = simulate.suggest_rates(inst, family, cover, margin=args.margin)
        codebook_rate = auto_prime if codebook_rate is None else codebook_rate
        bin_rate = auto_bin if bin_rate is None else bin_rate
        bin_rate = min(bin_rate, codebook_rate)
    cfg = simulate.SimConfig(
        n=args.n,
        codebook_rate=codebook_rate,
        bin_rate=bin_rate,
        epsilon=args.epsilon,
        epsilon_prime=args.epsilon_prime,
        trials=args.trials,
        seed=args.seed,
    )
    report = simulate.binning_simulate(
        inst,
        family,
        cover,
        cfg,
        collect_traces=args.trace_out is not None,
        backend=args.backend,
        threads=args.threads,
    )
    print(report.describe())
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            fh.write(report.traces_csv())
        print(f"traces written to {args.trace_out}")
    return 0


def cmd_report(args) -> int:
    inst = _load(args)
    g = graphs.broadcast_graph(inst)
    family = mis.enumerate_mis(g)
    out = [
        rates.slepian_wolf_baseline(inst, base=args.base),
        rates.optimize_achievable(inst, family, base=args.base),
        rates.genie_best_ordering(inst, base=args.base)[0],
        rates.prop1_lower_bound(inst, "joint-demand", base=args.base),
        rates.prop1_lower_bound(inst, "residual-with-erasure", base=args.base),
    ]
    if len(support(inst)) <= 12:
        out.append(oracle.oracle_search(inst, g, objective="max-conditional", base=args.base))
    text = rates.reports_to_csv(out)
    _write_or_print(text, args.output)
    for r in out:
        print(r.describe())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compbcast",
        description="Rates, graphs and coding simulation for broadcast function computation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("instance", help="instance file (JSON)")
        p.set_defaults(fn=fn)
        return p

    add("validate", cmd_validate, help="check instance invariants")

    p = add("graph", cmd_graph, help="emit a characteristic graph as DOT")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--user", type=int, help="per-user graph (1-based)")
    group.add_argument("--union", action="store_true", help="broadcast (union) graph")
    p.add_argument("-o", "--output", help="write DOT here instead of stdout")

    p = add("mis", cmd_mis, help="enumerate maximal independent sets")
    p.add_argument("--user", type=int, help="per-user graph instead of the union graph")
    p.add_argument("--timeout", type=float, default=60.0)

    p = add("rate-ach", cmd_rate_ach, help="optimize the graph-cover broadcast rate")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--exhaustive", action="store_true")
    group.add_argument("--heuristic", action="store_true")
    p.add_argument("--base", type=float, default=2)
    p.add_argument("--seed", type=int, default=7)

    p = add("baseline", cmd_baseline, help="full-data-recovery baseline rate")
    p.add_argument("--base", type=float, default=2)
    p.add_argument("--message", action="append", help="explicit message expression (repeatable)")

    p = add("bound-prop1", cmd_bound_prop1, help="joint demand-summary entropy")
    p.add_argument(
        "--interpretation", choices=rates.PROP1_INTERPRETATIONS, default="joint-demand"
    )
    p.add_argument("--base", type=float, default=2)

    p = add("bound-genie", cmd_bound_genie, help="genie-aided lower bound")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--ordering", default=None, help="comma-separated user order")
    group.add_argument("--all-orderings", action="store_true")
    p.add_argument("--base", type=float, default=2)

    p = add("scheme-compat", cmd_scheme_compat, help="search a pairwise compatible function")
    p.add_argument("--pair", required=True, help="two user indices, e.g. 1,2")
    p.add_argument("--mode", choices=("linear", "exhaustive"), default="linear")

    p = add("scheme-split", cmd_scheme_split, help="three-user splitting scheme rate")
    p.add_argument("--base", type=float, default=None)

    p = add("scheme-vector", cmd_scheme_vector, help="evaluate a vector scheme file")
    p.add_argument("--scheme", required=True, help="scheme description (JSON)")
    p.add_argument("--base", type=float, default=None)

    p = add("oracle", cmd_oracle, help="exhaustive single-shot partition search")
    p.add_argument("--objective", choices=oracle.OBJECTIVES, default="max-conditional")
    p.add_argument("--base", type=float, default=2)

    p = add("simulate", cmd_simulate, help="Monte-Carlo compress-bin simulation")
    p.add_argument("--n", type=int, default=8, help="block length")
    p.add_argument("--codebook-rate", type=float, default=None)
    p.add_argument("--bin-rate", type=float, default=None)
    p.add_argument("--margin", type=float, default=0.2,
                   help="rate margin above thresholds when rates are not given")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--epsilon-prime", type=float, default=0.4)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=("compiled", "python"), default=None)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--trace-out", help="write per-trial CSV here")

    p = add("report", cmd_report, help="aggregate rate reports as CSV")
    p.add_argument("--base", type=float, default=2)
    p.add_argument("-o", "--output", help="write CSV here instead of stdout")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bound-genie" and not args.all_orderings and args.ordering is None:
        parser.error("bound-genie needs --ordering or --all-orderings")
    try:
        return args.fn(args)
    except (GuardExceeded, EnumerationTimeout) as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return 3
    except (InvalidInstanceError, InstanceFormatError) as exc:
        print(f"invalid instance: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError, CompBcastError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
