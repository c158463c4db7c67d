"""Brute-force ground truth by forward simulation of every scenario.

A scenario puts each instance in exactly one of its states. Minimal failure
scenarios are read off the "listed instances failed, all others nominal"
scenarios; exact probabilities sum over all scenarios. Both come from a
single pass over the full scenario space.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Optional

from .analysis import CutSetCollection, minimize
from .errors import CapExceededError, FtError
from .expr import evaluate as eval_expr
from .model import Endpoint, FailureCriterion, ModelBundle, SystemModel, topological_order

DEFAULT_MAX_SCENARIOS = 10**7


class _Simulator:
    def __init__(self, system: SystemModel):
        self.system = system
        self.order = topological_order(system)
        sources = system.sources()
        self.plan = []
        for inst in self.order:
            comp = system.instances[inst]
            wiring = [(p.name, sources.get(Endpoint(inst, p.name)), Endpoint(inst, p.name))
                      for p in comp.inputs]
            self.plan.append((inst, comp, wiring, [p.name for p in comp.outputs]))

    def run(self, states: Mapping[str, str], givens: Mapping[Endpoint, str]) -> dict[Endpoint, str]:
        values: dict[Endpoint, str] = {}
        for inst, comp, wiring, outputs in self.plan:
            env = {}
            for port, src, ep in wiring:
                env[port] = values[src] if src is not None else givens[ep]
            state = comp.state(states.get(inst, comp.nominal.name))
            if state is None:
                raise FtError("E_UNKNOWN_STATE", f"{inst} has no state {states[inst]!r}")
            for port in outputs:
                values[Endpoint(inst, port)] = eval_expr(state.assignments[port], env)
        return values


def evaluate(bundle: ModelBundle, system_id: Optional[str], scenario: Mapping[str, str],
             givens: Mapping[Endpoint, str]) -> dict[Endpoint, str]:
    """Boundary-output values of the system in ``scenario``.

    Instances missing from ``scenario`` are taken to be nominal.
    """
    system = bundle.system(system_id)
    values = _Simulator(system).run(scenario, givens)
    return {ep: values[ep] for ep in system.boundary_outputs}


@dataclass(frozen=True)
class OracleReport:
    satisfying: int
    total: int
    minimal: CutSetCollection
    nominal_satisfies: bool
    exact_probability: Optional[float] = None
    total_probability: Optional[float] = None


def scenario_count(system: SystemModel) -> int:
    return math.prod(len(c.states) for c in system.instances.values())


def _enumerate(system: SystemModel, criterion: FailureCriterion, max_scenarios: int):
    n = scenario_count(system)
    if n > max_scenarios:
        raise CapExceededError("E_STATE_SPACE_TOO_LARGE",
                               f"{n} scenarios exceed the cap of {max_scenarios}")
    sim = _Simulator(system)
    insts = sim.order
    choices = [[s.name for s in system.instances[i].states] for i in insts]
    requirements = [(ep, set(values)) for ep, values in criterion.requirements.items()]
    for combo in itertools.product(*choices):
        states = dict(zip(insts, combo))
        values = sim.run(states, criterion.givens)
        yield states, all(values[ep] in allowed for ep, allowed in requirements)


def _check_probs(system: SystemModel, probs: Mapping) -> dict[tuple[str, str], float]:
    table = {}
    for inst, comp in system.instances.items():
        total = 0.0
        for st in comp.failures:
            key = (inst, st.name)
            p = probs.get(key, probs.get(f"{inst}.{st.name}"))
            if p is None:
                raise FtError("E_MISSING_PROB", f"no probability for {inst}.{st.name}")
            table[key] = p
            total += p
        table[(inst, comp.nominal.name)] = 1.0 - total
    return table


def minimal_failure_scenarios(bundle: ModelBundle, system_id: Optional[str],
                              criterion: FailureCriterion, probs: Optional[Mapping] = None,
                              max_scenarios: int = DEFAULT_MAX_SCENARIOS) -> OracleReport:
    """Enumerate every scenario; report minimal failure sets and, given ``probs``, exact probability."""
    system = bundle.system(system_id)
    nominal = {i: c.nominal.name for i, c in system.instances.items()}
    table = _check_probs(system, probs) if probs is not None else None
    failing, satisfying, total = [], 0, 0
    exact = mass = 0.0
    for states, ok in _enumerate(system, criterion, max_scenarios):
        total += 1
        if table is not None:
            p = math.prod(table[(i, s)] for i, s in states.items())
            mass += p
            if ok:
                exact += p
        if ok:
            satisfying += 1
            failing.append(frozenset((i, s) for i, s in states.items() if s != nominal[i]))
    minimal = CutSetCollection(minimize(failing))
    return OracleReport(
        satisfying=satisfying,
        total=total,
        minimal=minimal,
        nominal_satisfies=frozenset() in minimal.as_sets(),
        exact_probability=exact if table is not None else None,
        total_probability=mass if table is not None else None,
    )


def exact_probability(bundle: ModelBundle, system_id: Optional[str], criterion: FailureCriterion,
                      probs: Mapping, max_scenarios: int = DEFAULT_MAX_SCENARIOS) -> float:
    """Probability that the criterion holds, assuming independent instances."""
    return minimal_failure_scenarios(bundle, system_id, criterion, probs, max_scenarios).exact_probability


@dataclass(frozen=True)
class EquivalenceDiff:
    tree_only: CutSetCollection
    oracle_only: CutSetCollection

    @property
    def passed(self) -> bool:
        return not self.tree_only and not self.oracle_only

    def __str__(self) -> str:
        if self.passed:
            return "PASS"
        lines = ["FAIL"]
        lines += [f"  tree-only:   {c}" for c in self.tree_only]
        lines += [f"  oracle-only: {c}" for c in self.oracle_only]
        return "\n".join(lines)


def check_equivalence(tree_mcs: CutSetCollection, report) -> EquivalenceDiff:
    """Symmetric difference of two cut-set antichains. ``report`` may be an
    :class:`OracleReport` or another collection."""
    other = report.minimal if isinstance(report, OracleReport) else report
    a, b = CutSetCollection(tree_mcs).as_sets(), CutSetCollection(other).as_sets()
    return EquivalenceDiff(CutSetCollection(a - b), CutSetCollection(b - a))
