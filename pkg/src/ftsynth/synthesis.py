"""Backward fault-tree synthesis from component behavior.

Starting from each required boundary output, the generator asks of the
producing instance: which of your states can put a value from the target
set on this port, and under which inputs? Every state whose output
expression can reach the target contributes one OR branch:

* a failure state that reaches the target for all inputs is a bare basic event;
* a failure state that needs particular inputs is AND(event, input condition);
* the nominal state contributes its input condition alone.

Input conditions are the inverted expression as a union of boxes. A box
constrains inputs; a constrained input fed by another instance becomes a
recursive question to that producer, a constrained boundary input is
decided immediately against the criterion's given value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from . import analysis
from .errors import FtError, warning
from .expr import invert
from .model import (Endpoint, FailureCriterion, ModelBundle, SystemModel, check_criterion,
                    validate_component, validate_system)
from .tree import (FALSE, TRUE, AndGate, BasicEvent, FaultTree, Gate, NominalGuard, OrGate,
                   TrueLeaf, basic_events, is_false, iter_nodes)


@dataclass(frozen=True)
class CauseKey:
    instance: str
    port: str
    target: tuple[str, ...]  # canonical: declaration order of the port's domain


class _Builder:
    def __init__(self, system: SystemModel, criterion: FailureCriterion, guarded=frozenset()):
        self.system = system
        self.givens = dict(criterion.givens)
        self.sources = system.sources()
        self.guarded = guarded
        self.memo: dict[CauseKey, object] = {}
        self.owner: dict[int, str] = {}  # id(cause node) -> instance
        self._inverted: dict = {}

    def _invert(self, inst: str, state, port: str, target):
        comp = self.system.instances[inst]
        key = (comp.name, state.name, port, target)
        if key not in self._inverted:
            self._inverted[key] = invert(state.assignments[port], target, comp.input_domains())
        return self._inverted[key]

    def cause(self, key: CauseKey):
        if key in self.memo:
            return self.memo[key]
        comp = self.system.instances[key.instance]
        branches = []
        for state in comp.states:
            dnf = self._invert(key.instance, state, key.port, key.target)
            if not dnf:
                continue
            cond = self.condition(key.instance, dnf)
            if state.is_failure:
                event = BasicEvent(key.instance, state.name, state.probability)
                if dnf.is_full:
                    branches.append(event)
                else:
                    branches.append(AndGate((event, cond), label=f"{key.instance} in {state.name}"))
            elif key.instance in self.guarded:
                branches.append(AndGate((NominalGuard(key.instance), cond),
                                        label=f"{key.instance} in {state.name}"))
            else:
                branches.append(cond)
        node = OrGate(tuple(branches), label=f"{key.instance}.{key.port} in {{{', '.join(key.target)}}}")
        self.memo[key] = node
        self.owner[id(node)] = key.instance
        return node

    def condition(self, inst: str, dnf):
        alternatives = []
        for imp in dnf:
            parts, feasible = [], True
            upstream = []
            for port, allowed in imp.literals:
                ep = Endpoint(inst, port)
                src = self.sources.get(ep)
                if src is None:
                    if self.givens[ep] not in allowed:
                        feasible = False
                        break
                    parts.append(TRUE)
                else:
                    upstream.append((src, allowed))
            if not feasible:
                continue
            for src, allowed in upstream:
                domain = self.system.port(src).domain
                parts.append(self.cause(CauseKey(src.instance, src.port, domain.canonical(allowed))))
            alternatives.append(AndGate(tuple(parts), label=f"{inst} inputs {imp}"))
        return OrGate(tuple(alternatives), label=f"{inst} input condition")

    def requirement_roots(self, criterion: FailureCriterion):
        roots = []
        for ep, values in criterion.requirements.items():
            domain = self.system.port(ep).domain
            roots.append(self.cause(CauseKey(ep.instance, ep.port, domain.canonical(values))))
        return roots


def _shared_instances(root, owner: dict[int, str]) -> frozenset[str]:
    """Instances whose cause nodes can occur more than once in a single product.

    Counts, per instance, the largest number of its cause nodes that one
    product expansion can pick up: OR takes the maximum over children, AND
    the sum.
    """
    memo: dict[int, dict[str, int]] = {}

    def visit(node) -> dict[str, int]:
        key = id(node)
        if key in memo:
            return memo[key]
        counts: dict[str, int] = {}
        if isinstance(node, Gate):
            child_counts = [visit(c) for c in node.children]
            for cc in child_counts:
                for inst, n in cc.items():
                    if isinstance(node, AndGate):
                        counts[inst] = counts.get(inst, 0) + n
                    else:
                        counts[inst] = max(counts.get(inst, 0), n)
            if key in owner:
                counts[owner[key]] = counts.get(owner[key], 0) + 1
        memo[key] = counts
        return counts

    return frozenset(inst for inst, n in visit(root).items() if n > 1)


def simplify_tree(tree):
    """Rewrite to a fixpoint: drop neutral TRUE/FALSE children, collapse
    single-child gates, flatten nested gates of the same type, deduplicate
    equal children. Equal subtrees end up as one shared node.

    Accepts a :class:`FaultTree` or a bare node and returns the same kind.
    """
    if isinstance(tree, FaultTree):
        root = simplify_tree(tree.root)
        if isinstance(root, Gate) and root.children:
            root = replace(root, label=tree.top_label)
        return replace(tree, root=root)

    interned: dict = {}
    memo: dict[int, object] = {}

    def intern(node):
        return interned.setdefault(node, node)

    def simp(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if not isinstance(node, Gate):
            out = intern(node)
        else:
            is_and = isinstance(node, AndGate)
            kids = []
            for child in node.children:
                c = simp(child)
                if is_and:
                    if is_false(c):
                        kids = None
                        break
                    if isinstance(c, TrueLeaf):
                        continue
                    kids.extend(c.children if isinstance(c, AndGate) else [c])
                else:
                    if isinstance(c, TrueLeaf):
                        kids = None
                        break
                    if is_false(c):
                        continue
                    kids.extend(c.children if isinstance(c, OrGate) and c.children else [c])
            if kids is None:
                out = FALSE if is_and else TRUE
            else:
                kids = list(dict.fromkeys(kids))
                if not kids:
                    out = TRUE if is_and else FALSE
                elif len(kids) == 1:
                    out = kids[0]
                else:
                    out = intern(type(node)(tuple(kids), label=node.label))
        memo[key] = out
        return out

    return simp(tree)


def _drop_events(root, dead: set[tuple[str, str]], idle_guards: frozenset[str] = frozenset()):
    """Replace dead events by FALSE and guards of ``idle_guards`` instances by TRUE."""
    memo: dict[int, object] = {}

    def walk(node):
        key = id(node)
        if key not in memo:
            if isinstance(node, BasicEvent):
                memo[key] = FALSE if (node.instance, node.state) in dead else node
            elif isinstance(node, NominalGuard):
                memo[key] = TRUE if node.instance in idle_guards else node
            elif isinstance(node, Gate):
                memo[key] = type(node)(tuple(walk(c) for c in node.children), label=node.label)
            else:
                memo[key] = node
        return memo[key]

    return walk(root)


def generate_fault_tree(bundle: ModelBundle, system_id: Optional[str], criterion: FailureCriterion,
                        max_products: int = analysis.DEFAULT_MAX_PRODUCTS,
                        prune: bool = True) -> FaultTree:
    """Synthesize the fault tree of ``criterion`` on system ``system_id``.

    With ``prune`` set, basic events that occur in no minimal cut set are
    removed afterwards; the cut sets are unchanged by this.
    """
    system = bundle.system(system_id)
    report = validate_system(system)
    for comp in {c.name: c for c in system.instances.values()}.values():
        report += validate_component(comp)
    if not report.ok:
        raise FtError(report)
    report = check_criterion(system, criterion)
    if not report.ok:
        raise FtError(report)

    builder = _Builder(system, criterion)
    first = AndGate(tuple(builder.requirement_roots(criterion)), label=criterion.name)
    shared = _shared_instances(first, builder.owner)
    if shared:
        builder = _Builder(system, criterion, shared)
        first = AndGate(tuple(builder.requirement_roots(criterion)), label=criterion.name)

    tree = simplify_tree(FaultTree(first, criterion, system))
    mcs = analysis.minimal_cut_sets(tree, max_products)
    if isinstance(tree.root, TrueLeaf) or frozenset() in mcs.as_sets():
        diag = warning("W_NOMINAL_SATISFIES",
                       f"criterion {criterion.name} already holds with every component nominal")
        return replace(tree, diagnostics=(diag,))
    if prune:
        live = mcs.events()
        dead = {(e.instance, e.state) for e in basic_events(tree.root)} - live
        # a guard only excludes products that also fail its instance
        guards = {n.instance for n in iter_nodes(tree.root) if isinstance(n, NominalGuard)}
        idle = frozenset(guards - {inst for inst, _ in live})
        if dead or idle:
            tree = simplify_tree(replace(tree, root=_drop_events(tree.root, dead, idle)))
    return tree
