"""``ftsynth`` command line.

Exit codes: 0 success, 1 model/criterion diagnostics, 2 I/O failure,
3 enumeration cap exceeded, 4 tree and oracle (or golden) disagree.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import analysis, oracle, render
from .dsl import load_criterion, load_model
from .errors import CapExceededError, FtError
from .model import failure_probabilities, nominal_probabilities
from .synthesis import generate_fault_tree

EXIT_OK, EXIT_DIAG, EXIT_IO, EXIT_CAP, EXIT_MISMATCH = 0, 1, 2, 3, 4


def _err(msg: str):
    print(msg, file=sys.stderr)


def _summary(mcs) -> list[str]:
    if not mcs:
        return ["0 cut sets"]
    return [f"{n} cut set{'s' if n != 1 else ''} of size {k}" for k, n in mcs.by_cardinality().items()]


def _load(models):
    bundle = load_model(*models)
    report = bundle.validate()
    if not report.ok:
        raise FtError(report)
    for d in report:
        _err(str(d))
    return bundle


class _Run:
    """Shared state of one command: loaded bundle, system, criterion, probabilities."""

    def __init__(self, args):
        self.args = args
        self.bundle = _load(args.models)
        self.system = self.bundle.system(getattr(args, "system", None))
        crit_path = getattr(args, "criterion", None)
        self.criterion = load_criterion(crit_path) if crit_path else None

    def probabilities(self) -> dict:
        side = {}
        if getattr(self.args, "probs", None):
            try:
                side = json.loads(Path(self.args.probs).read_text(encoding="utf-8"))
            except ValueError as exc:
                raise FtError("E_PROBS_FORMAT", f"{self.args.probs}: {exc}") from None
        model = failure_probabilities(self.system)
        for key, p in side.items():
            inst, _, state = key.partition(".")
            old = model.get((inst, state))
            if old is not None and old != p:
                _err(f"warning: W_PROB_OVERRIDE: {key} = {p!r} replaces model value {old!r}")
        return failure_probabilities(self.system, side)

    def tree(self):
        if self.criterion is None:
            raise FtError("E_NO_CRITERION", "--criterion is required")
        tree = generate_fault_tree(self.bundle, self.system.name, self.criterion,
                                   max_products=self.args.max_products)
        for d in tree.diagnostics:
            _err(f"*** {d}")
        return tree


def cmd_validate(args) -> int:
    bundle = _load(args.models)
    print(f"ok: {len(bundle.domains)} signals, {len(bundle.components)} components, "
          f"{len(bundle.systems)} systems")
    return EXIT_OK


def cmd_generate(args) -> int:
    run = _Run(args)
    probs = run.probabilities()
    tree = render.with_probabilities(run.tree(), probs)
    out = Path(args.out or f"{run.criterion.name}.json")
    out.write_text(render.export_json(tree), encoding="utf-8")
    if args.dot:
        Path(args.dot).write_text(render.render_dot(tree), encoding="utf-8")
    if args.galileo:
        Path(args.galileo).write_text(
            render.render_galileo(tree, probs, nominal_probabilities(run.system, probs)),
            encoding="utf-8")
    mcs = analysis.minimal_cut_sets(tree, args.max_products)
    for line in _summary(mcs):
        print(line)
    return EXIT_OK


def cmd_cutsets(args) -> int:
    run = _Run(args)
    mcs = analysis.minimal_cut_sets(run.tree(), args.max_products)
    for c in mcs:
        print(c)
    for line in _summary(mcs):
        print(line)
    if args.out:
        Path(args.out).write_text(render.cutsets_to_json(mcs, run.system.name, run.criterion.name),
                                  encoding="utf-8")
    return EXIT_OK


def cmd_oracle(args) -> int:
    run = _Run(args)
    if run.criterion is None:
        raise FtError("E_NO_CRITERION", "--criterion is required")
    probs = run.probabilities()
    complete = len(probs) == sum(len(c.failures) for c in run.system.instances.values())
    report = oracle.minimal_failure_scenarios(run.bundle, run.system.name, run.criterion,
                                              probs if complete else None, args.max_scenarios)
    for c in report.minimal:
        print(c)
    print(f"{report.satisfying} of {report.total} scenarios satisfy {run.criterion.name}")
    for line in _summary(report.minimal):
        print(line)
    if report.nominal_satisfies:
        _err("*** warning: W_NOMINAL_SATISFIES: criterion holds with every component nominal")
    if report.exact_probability is not None:
        print(f"exact probability: {report.exact_probability:.6e}")
    return EXIT_OK


def cmd_check(args) -> int:
    run = _Run(args)
    tree = run.tree()
    mcs = analysis.minimal_cut_sets(tree, args.max_products)
    status = EXIT_OK
    if tree.nominal_satisfies:
        print("SKIP: W_NOMINAL_SATISFIES, oracle comparison not applicable")
    else:
        report = oracle.minimal_failure_scenarios(run.bundle, run.system.name, run.criterion,
                                                  max_scenarios=args.max_scenarios)
        diff = oracle.check_equivalence(mcs, report)
        print(f"oracle: {diff}")
        if not diff.passed:
            status = EXIT_MISMATCH
    if args.golden:
        golden = render.cutsets_from_json(Path(args.golden).read_text(encoding="utf-8"))
        diff = oracle.check_equivalence(mcs, golden)
        print(f"golden: {str(diff).replace('oracle-only', 'golden-only')}")
        if not diff.passed:
            status = EXIT_MISMATCH
    return status


def cmd_quantify(args) -> int:
    run = _Run(args)
    probs = run.probabilities()
    mcs = analysis.minimal_cut_sets(run.tree(), args.max_products)
    result = analysis.quantify(mcs, probs)
    for line in _summary(mcs):
        print(line)
    print(f"rare-event approximation: {result.rare_event:.6e}")
    if args.exact:
        exact = oracle.exact_probability(run.bundle, run.system.name, run.criterion, probs,
                                         args.max_scenarios)
        print(f"exact probability: {exact:.6e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ftsynth",
                                     description="Fault-tree synthesis from component behavior models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, criterion=True):
        p.add_argument("models", nargs="+", help=".ftm model files")
        p.add_argument("--system", help="system to analyze (needed when the model defines several)")
        if criterion:
            p.add_argument("--criterion", help=".ftc failure criterion")
        p.add_argument("--probs", help="JSON file mapping 'instance.state' to probability")
        p.add_argument("--max-products", type=int, default=analysis.DEFAULT_MAX_PRODUCTS)
        p.add_argument("--max-scenarios", type=int, default=oracle.DEFAULT_MAX_SCENARIOS)

    p = sub.add_parser("validate", help="parse and validate model files")
    p.add_argument("models", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("generate", help="synthesize a fault tree and write artifacts")
    common(p)
    p.add_argument("--out", help="JSON export path (default: <criterion>.json)")
    p.add_argument("--dot", help="also write Graphviz DOT here")
    p.add_argument("--galileo", help="also write Galileo text here")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("cutsets", help="print minimal cut sets")
    common(p)
    p.add_argument("--out", help="write the cut sets as JSON (golden format)")
    p.set_defaults(func=cmd_cutsets)

    p = sub.add_parser("oracle", help="brute-force minimal failure scenarios")
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("check", help="compare synthesized cut sets with the oracle")
    common(p)
    p.add_argument("--golden", help="also compare with a golden cut-set file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("quantify", help="rare-event approximation of the top event")
    common(p)
    p.add_argument("--exact", action="store_true", help="also compute the exact probability")
    p.set_defaults(func=cmd_quantify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapExceededError as exc:
        _err(str(exc))
        return EXIT_CAP
    except FtError as exc:
        _err(str(exc))
        return EXIT_DIAG
    except OSError as exc:
        _err(f"error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
