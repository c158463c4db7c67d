"""Minimal cut sets and first-order quantification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .errors import CapExceededError, FtError
from .tree import AndGate, BasicEvent, FaultTree, NominalGuard, OrGate, TrueLeaf

DEFAULT_MAX_PRODUCTS = 10**6

_GUARD = ""  # state name used for nominal guards inside products


class CutSet(frozenset):
    """A set of ``(instance, failure state)`` events."""

    def sort_key(self):
        return (len(self), sorted(self))

    def names(self) -> list[str]:
        return [f"{i}.{s}" for i, s in sorted(self)]

    def __str__(self) -> str:
        return "{" + ", ".join(self.names()) + "}"

    def __repr__(self) -> str:
        return f"CutSet({self})"


class CutSetCollection(tuple):
    """Canonically ordered antichain of cut sets (cardinality, then lexicographic)."""

    def __new__(cls, cut_sets: Iterable[Iterable[tuple[str, str]]] = ()):
        sets = {CutSet(c) for c in cut_sets}
        return super().__new__(cls, sorted(sets, key=CutSet.sort_key))

    def by_cardinality(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for c in self:
            counts[len(c)] = counts.get(len(c), 0) + 1
        return dict(sorted(counts.items()))

    def events(self) -> set[tuple[str, str]]:
        return {e for c in self for e in c}

    def as_sets(self) -> set[frozenset]:
        return {frozenset(c) for c in self}


def minimize(sets: Iterable[frozenset]) -> list[frozenset]:
    """Keep only sets with no proper subset in the collection."""
    unique = sorted(set(sets), key=len)
    kept: list[frozenset] = []
    for s in unique:
        if not any(k <= s for k in kept):
            kept.append(s)
    return kept


def _consistent(product: frozenset) -> bool:
    return len({inst for inst, _ in product}) == len(product)


def minimal_cut_sets(tree: Union[FaultTree, object],
                     max_products: int = DEFAULT_MAX_PRODUCTS) -> CutSetCollection:
    """Expand the tree into products of events and keep the minimal ones.

    Products that place one instance in two different states are dropped.
    Nominal guards take part in that check and are then projected away.
    """
    root = tree.root if isinstance(tree, FaultTree) else tree
    memo: dict[int, list[frozenset]] = {}

    def check(n: int):
        if n > max_products:
            raise CapExceededError("E_TREE_TOO_LARGE",
                                   f"expansion exceeds {max_products} products")

    def expand(node) -> list[frozenset]:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, BasicEvent):
            out = [frozenset({(node.instance, node.state)})]
        elif isinstance(node, NominalGuard):
            out = [frozenset({(node.instance, _GUARD)})]
        elif isinstance(node, TrueLeaf):
            out = [frozenset()]
        elif isinstance(node, OrGate):
            acc = []
            for child in node.children:
                acc.extend(expand(child))
                check(len(acc))
            out = minimize(acc)
        elif isinstance(node, AndGate):
            out = [frozenset()]
            for child in node.children:
                rhs = expand(child)
                check(len(out) * len(rhs))
                out = minimize(p | q for p in out for q in rhs if _consistent(p | q))
                if not out:
                    break
        else:
            raise TypeError(f"not a fault-tree node: {node!r}")
        memo[key] = out
        return out

    products = expand(root)
    events = (frozenset(e for e in p if e[1] != _GUARD) for p in products)
    return CutSetCollection(minimize(events))


@dataclass(frozen=True)
class Quantification:
    rare_event: float
    counts: dict[int, int]


def _lookup(probs: Mapping, event: tuple[str, str]) -> float:
    if event in probs:
        return probs[event]
    name = f"{event[0]}.{event[1]}"
    if name in probs:
        return probs[name]
    raise FtError("E_MISSING_PROB", f"no probability for {name}")


def quantify(mcs: CutSetCollection, probs: Mapping) -> Quantification:
    """Rare-event approximation: sum over cut sets of the product of event probabilities.

    ``probs`` may be keyed by ``(instance, state)`` or ``"instance.state"``.
    """
    total = 0.0
    for cut in mcs:
        p = 1.0
        for event in sorted(cut):
            p *= _lookup(probs, event)
        total += p
    return Quantification(total, CutSetCollection(mcs).by_cardinality())


def isolated_probability(mcs: CutSetCollection, probs: Mapping,
                         nominal: Mapping[str, float]) -> float:
    """Probability that exactly one cut set's events occur with every other instance nominal.

    ``nominal`` maps every instance to its nominal-state probability. Each
    such scenario satisfies the criterion and they are pairwise disjoint, so
    this is a lower bound on the exact top-event probability, while the
    rare-event sum is an upper bound.
    """
    total = 0.0
    for cut in mcs:
        listed = {inst for inst, _ in cut}
        p = 1.0
        for event in cut:
            p *= _lookup(probs, event)
        for inst, q in nominal.items():
            if inst not in listed:
                p *= q
        total += p
    return total
