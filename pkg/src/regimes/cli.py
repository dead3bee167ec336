"""Command-line surface.

Reports go to stdout as deterministic key=value lines; diagnostics go to
stderr.  Exit codes: 0 success, 1 when a checked condition is false,
2 on usage or model errors.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from pathlib import Path

from . import admissible as adm
from . import data as dat
from . import grecursion as grec
from . import optimize as opt
from . import stability as stab
from .errors import RegimesError
from .model import ExactSource, consequence_direct
from .parser import ModelDocument, parse_model

CHECK_FAILED = 1
USAGE_ERROR = 2


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _emit(key: str, value) -> None:
    print(f"{key}={_fmt(value)}")


def _load(path: str) -> ModelDocument:
    return parse_model(Path(path).read_text(encoding="utf-8"))


def _response_functional(doc: ModelDocument, args):
    states = doc.diagram.states[doc.diagram.response]
    if getattr(args, "k", None):
        k = {}
        for part in args.k.split(","):
            if "=" not in part:
                raise RegimesError(f"--k expects state=value pairs, got {part!r}")
            state, value = part.split("=", 1)
            if state not in states:
                raise RegimesError(f"{state!r} is not a state of {doc.diagram.response}")
            k[state] = float(value)
        return k
    target = getattr(args, "target", None) or states[0]
    if target not in states:
        raise RegimesError(f"{target!r} is not a state of {doc.diagram.response}")
    return {s: 1.0 if s == target else 0.0 for s in states}


def _regime(doc: ModelDocument, name: str | None):
    if name is None or name == "obs":
        return "obs"
    return doc.strategy(name)


def cmd_evaluate(doc: ModelDocument, args) -> int:
    k = _response_functional(doc, args)
    _emit("consequence", consequence_direct(doc.diagram, _regime(doc, args.strategy), k))
    return 0


def cmd_grec(doc: ModelDocument, args) -> int:
    k = _response_functional(doc, args)
    strategy = doc.strategy(args.strategy)
    _emit("consequence", grec.g_recursion(ExactSource(doc.diagram), strategy, k))
    return 0


def _emit_stages(report) -> None:
    for s in report.stages:
        _emit(f"stage_{s.stage}", s.passed)
        if s.witness is not None:
            _emit(f"witness_{s.stage}", s.witness)


def cmd_stability(doc: ModelDocument, args) -> int:
    if args.numeric:
        strategies = [doc.strategy(s) for s in args.strategy]
        report = stab.check_simple_stability_numeric(doc.diagram, strategies)
        _emit("mode", "numeric")
    else:
        report = stab.check_simple_stability_graphical(doc.diagram)
        _emit("mode", "graphical")
    _emit_stages(report)
    _emit("simple_stability", report.overall)
    return 0 if report.overall else CHECK_FAILED


def cmd_seqrand(doc: ModelDocument, args) -> int:
    ok = stab.check_sequential_randomization(doc.diagram)
    _emit("sequential_randomization", ok)
    return 0 if ok else CHECK_FAILED


def cmd_seqirrel(doc: ModelDocument, args) -> int:
    strategies = [doc.strategy(s) for s in args.strategy]
    report = stab.check_sequential_irrelevance_numeric(doc.diagram, strategies)
    _emit_stages(report)
    for name in sorted(report.extended_positivity):
        _emit(f"extended_positivity_{name}", report.extended_positivity[name])
    _emit("sequential_irrelevance", report.overall)
    return 0 if report.overall else CHECK_FAILED


def cmd_positivity(doc: ModelDocument, args) -> int:
    report = stab.check_positivity(doc.diagram, doc.strategy(args.strategy))
    _emit("simple", report.simple)
    _emit("extended", report.extended)
    _emit("parent_child", report.parent_child)
    _emit("general", report.general)
    return 0 if report.simple else CHECK_FAILED


def cmd_graphsep(doc: ModelDocument, args) -> int:
    strategy = doc.strategy(args.strategy) if args.strategy else None
    report = grec.check_graphsep(doc.diagram, strategy)
    for i, ok in report.stages:
        _emit(f"i_{i}", ok)
    _emit("graphsep", report.overall)
    return 0 if report.overall else CHECK_FAILED


def cmd_verify_general(doc: ModelDocument, args) -> int:
    report = grec.verify_general_conditions(doc.diagram, doc.strategy(args.strategy))
    _emit("support_biconditional", report.support_biconditional)
    _emit("l_factors", report.l_factors)
    _emit("action_factors", report.action_factors)
    _emit("y_bridge", report.y_bridge)
    _emit("positivity", report.positivity)
    _emit("all", report.overall)
    if report.consequence_delta is not None:
        _emit("consequence_delta", report.consequence_delta)
    return 0 if report.overall else CHECK_FAILED


def _fmt_sequence(sets) -> str:
    return ";".join(",".join(s) for s in sets)


def cmd_admissible(doc: ModelDocument, args) -> int:
    diagram = doc.diagram
    strategy = doc.strategy(args.strategy) if args.strategy else None
    if args.order:
        order = tuple(args.order.split(","))
        seq = adm.compute_candidate_sequence(diagram, order, strategy)
        if args.improve and seq.admissible:
            seq = adm.improve_sequence(diagram, order, seq, strategy)
        _emit("ordering", ",".join(order))
        _emit("sequence", _fmt_sequence(seq.sets))
        _emit("admissible", seq.admissible)
        return 0 if seq.admissible else CHECK_FAILED
    hit = adm.search_admissible_ordering(diagram, strategy)
    if hit is None:
        _emit("ordering", "none")
        return CHECK_FAILED
    order, seq = hit
    if args.improve:
        seq = adm.improve_sequence(diagram, order, seq, strategy)
    _emit("ordering", ",".join(order))
    _emit("sequence", _fmt_sequence(seq.sets))
    return 0


def cmd_optimize(doc: ModelDocument, args) -> int:
    diagram = doc.diagram
    graphical = stab.check_simple_stability_graphical(diagram).overall
    mixed = grec.check_graphsep(diagram).overall
    if not graphical and not mixed:
        print(
            "optimize refused: the model passes neither the stability check "
            "nor the mixed-diagram check, so backward induction is not licensed",
            file=sys.stderr,
        )
        return USAGE_ERROR
    k = _response_functional(doc, args)
    sense = "min" if args.min else "max"
    strategy, value = opt.optimal_strategy(ExactSource(diagram), k, sense)
    _emit("sense", sense)
    _emit("value", value)
    for action in diagram.actions:
        pol = strategy.policies[action]
        for config in sorted(pol.table):
            row = pol.table[config]
            chosen = diagram.states[action][row.index(1.0)]
            key_cfg = ",".join(config) if config else "-"
            _emit(f"policy[{action}|{key_cfg}]", chosen)
    return 0


def cmd_simulate(doc: ModelDocument, args) -> int:
    dataset = dat.sample(doc.diagram, _regime(doc, args.regime), args.n, args.seed)
    Path(args.out).write_text(dataset.to_text(), encoding="utf-8")
    _emit("rows", dataset.n)
    _emit("seed", args.seed)
    _emit("out", args.out)
    return 0


def cmd_estimate(doc: ModelDocument, args) -> int:
    base = doc.diagram.base
    dataset = dat.Dataset.from_text(Path(args.data).read_text(encoding="utf-8"), base)
    source = dat.estimate_conditionals(dataset, base, args.alpha)
    if args.strategy:
        k = _response_functional(doc, args)
        value = grec.g_recursion(source, doc.strategy(args.strategy), k)
        _emit("consequence", value)
        return 0
    for i in range(1, base.n + 2):
        past = base.vars[: base.before_l(i)]
        for config in itertools.product(*(base.states[v] for v in past)):
            cond = source.l_conditional(i, config)
            key_cfg = ",".join(config) if config else "-"
            if cond is dat.UNDEFINED:
                _emit(f"cond[{i}|{key_cfg}]", "undefined")
            else:
                _emit(f"cond[{i}|{key_cfg}]", ",".join(format(p, ".12g") for p in cond))
    return 0


def _add_k_flags(sub):
    sub.add_argument("--target", help="response state whose probability is the consequence")
    sub.add_argument("--k", help="full response functional as state=value,...")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="regimes",
        description="Check identifiability conditions and evaluate dynamic "
        "treatment strategies on discrete influence diagrams.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--model", required=True, help="model document file")
        p.set_defaults(fn=fn)
        return p

    p = add("evaluate", cmd_evaluate, help="consequence by exact joint enumeration")
    p.add_argument("--strategy", help="strategy name (default: observational regime)")
    p.add_argument("--direct", action="store_true", help="force the enumeration oracle (the default)")
    _add_k_flags(p)

    p = add("grec", cmd_grec, help="consequence by backward recursion")
    p.add_argument("--strategy", required=True)
    _add_k_flags(p)

    p = add("stability", cmd_stability, help="simple stability check")
    p.add_argument("--numeric", action="store_true")
    p.add_argument("--strategy", action="append", default=[])

    add("seqrand", cmd_seqrand, help="sequential randomization check")

    p = add("seqirrel", cmd_seqirrel, help="sequential irrelevance check")
    p.add_argument("--strategy", action="append", default=[])

    p = add("positivity", cmd_positivity, help="positivity variants for a strategy")
    p.add_argument("--strategy", required=True)

    p = add("graphsep", cmd_graphsep, help="mixed-diagram separation check")
    p.add_argument("--strategy")

    p = add("verify-general", cmd_verify_general, help="numeric licensing conditions")
    p.add_argument("--strategy", required=True)

    p = add("admissible", cmd_admissible, help="admissible ordering and sequence")
    p.add_argument("--order", help="comma-separated action ordering to check")
    p.add_argument("--improve", action="store_true")
    p.add_argument("--strategy")

    p = add("optimize", cmd_optimize, help="optimal strategy by backward induction")
    p.add_argument("--min", action="store_true")
    _add_k_flags(p)

    p = add("simulate", cmd_simulate, help="draw a dataset under a regime")
    p.add_argument("--regime", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add("estimate", cmd_estimate, help="frequency-estimate recursion ingredients")
    p.add_argument("--data", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--strategy")
    _add_k_flags(p)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        doc = _load(args.model)
        return args.fn(doc, args)
    except RegimesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
