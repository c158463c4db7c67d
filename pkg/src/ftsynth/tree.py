"""Fault-tree node types.

Nodes are immutable and compare structurally (labels and probabilities are
ignored), so equal subtrees can be shared. A tree is a rooted DAG.

Besides AND/OR gates and basic events there are two auxiliary leaves:

* :data:`TRUE` -- a satisfied condition; removed by simplification.
* :class:`NominalGuard` -- "this instance is in its nominal state". It is
  never a basic event and never appears in a cut set; it only rules out
  products that also place the same instance in a failure state. Guards
  are emitted only for instances whose behavior is consulted more than
  once along a single product (fan-out, several requirements).

An OR gate without children is the unsatisfiable condition :data:`FALSE`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import Diagnostic


class _Cached:
    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = hash((type(self).__name__,) + self._key())
            object.__setattr__(self, "_hash", h)
            return h


@dataclass(frozen=True, eq=True)
class BasicEvent(_Cached):
    instance: str
    state: str
    probability: Optional[float] = field(default=None, compare=False)

    def _key(self):
        return (self.instance, self.state)

    __hash__ = _Cached.__hash__

    @property
    def name(self) -> str:
        return f"{self.instance}.{self.state}"


@dataclass(frozen=True, eq=True)
class NominalGuard(_Cached):
    instance: str

    def _key(self):
        return (self.instance,)

    __hash__ = _Cached.__hash__

    @property
    def name(self) -> str:
        return f"{self.instance} nominal"


@dataclass(frozen=True, eq=True)
class TrueLeaf(_Cached):
    def _key(self):
        return ()

    __hash__ = _Cached.__hash__


@dataclass(frozen=True, eq=True)
class AndGate(_Cached):
    children: tuple
    label: str = field(default="", compare=False)

    def _key(self):
        return self.children

    __hash__ = _Cached.__hash__


@dataclass(frozen=True, eq=True)
class OrGate(_Cached):
    children: tuple
    label: str = field(default="", compare=False)

    def _key(self):
        return self.children

    __hash__ = _Cached.__hash__


TRUE = TrueLeaf()
FALSE = OrGate(())

Gate = (AndGate, OrGate)


def is_false(node) -> bool:
    return isinstance(node, OrGate) and not node.children


@dataclass(frozen=True)
class FaultTree:
    root: object
    criterion: object
    system: object
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def top_label(self) -> str:
        return self.criterion.name if self.criterion is not None else "TOP"

    @property
    def nominal_satisfies(self) -> bool:
        return any(d.code == "W_NOMINAL_SATISFIES" for d in self.diagnostics)


def iter_nodes(root):
    """Each distinct node once, parents before children (depth-first preorder)."""
    seen = set()
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        if isinstance(node, Gate):
            stack.extend(reversed(node.children))


def basic_events(root) -> list[BasicEvent]:
    return list(dict.fromkeys(n for n in iter_nodes(root) if isinstance(n, BasicEvent)))
