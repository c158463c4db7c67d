"""Per-state output expressions: evaluation, type checking and exact inversion.

Expressions are small immutable trees. Signal-valued nodes are literals,
port references and ``if``/``then``/``else``; everything else is boolean.
Inversion answers "which input valuations make this expression produce a
value in ``target``" by enumerating the (finite) valuation space and then
compressing the satisfying minterms into a union of boxes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import Diagnostic, FtError, error

__all__ = [
    "Literal", "PortRef", "Compare", "Not", "And", "Or", "AtLeast", "IfThenElse",
    "Expression", "BOOL", "evaluate", "referenced_ports", "check_types",
    "Implicant", "Dnf", "invert", "compress", "satisfying_valuations",
]


@dataclass(frozen=True)
class Literal:
    value: str
    domain: Optional[str] = None  # set only for qualified ``Domain.Value`` literals


@dataclass(frozen=True)
class PortRef:
    port: str


@dataclass(frozen=True)
class Compare:
    left: Union[Literal, PortRef]
    op: str  # "==" | "!="
    right: Union[Literal, PortRef]


@dataclass(frozen=True)
class Not:
    operand: "Expression"


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Or:
    items: tuple


@dataclass(frozen=True)
class AtLeast:
    k: int
    items: tuple


@dataclass(frozen=True)
class IfThenElse:
    cond: "Expression"
    then: "Expression"
    orelse: "Expression"


Expression = Union[Literal, PortRef, Compare, Not, And, Or, AtLeast, IfThenElse]

BOOL = "<bool>"


def evaluate(e: Expression, env: Mapping[str, str]):
    """Evaluate ``e`` under ``env`` (input port -> value).

    Returns a value name for signal expressions and a ``bool`` otherwise.
    """
    if isinstance(e, Literal):
        return e.value
    if isinstance(e, PortRef):
        try:
            return env[e.port]
        except KeyError:
            raise FtError("E_UNBOUND_PORT", f"no value bound for port {e.port!r}") from None
    if isinstance(e, Compare):
        equal = evaluate(e.left, env) == evaluate(e.right, env)
        return equal if e.op == "==" else not equal
    if isinstance(e, Not):
        return not evaluate(e.operand, env)
    if isinstance(e, And):
        return all(evaluate(x, env) for x in e.items)
    if isinstance(e, Or):
        return any(evaluate(x, env) for x in e.items)
    if isinstance(e, AtLeast):
        return sum(1 for x in e.items if evaluate(x, env)) >= e.k
    if isinstance(e, IfThenElse):
        return evaluate(e.then if evaluate(e.cond, env) else e.orelse, env)
    raise TypeError(f"not an expression: {e!r}")


def _children(e: Expression) -> tuple:
    if isinstance(e, Compare):
        return (e.left, e.right)
    if isinstance(e, Not):
        return (e.operand,)
    if isinstance(e, (And, Or, AtLeast)):
        return e.items
    if isinstance(e, IfThenElse):
        return (e.cond, e.then, e.orelse)
    return ()


def referenced_ports(e: Expression) -> list[str]:
    """Port names referenced by ``e``, in first-occurrence order."""
    seen: dict[str, None] = {}
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, PortRef):
            seen.setdefault(node.port, None)
        stack.extend(reversed(_children(node)))
    return list(seen)


def check_types(e: Expression, ports: Mapping[str, tuple[str, Sequence[str]]],
                expected: Union[str, tuple[str, Sequence[str]]],
                where: str = "") -> list[Diagnostic]:
    """Type-check ``e`` against the ``expected`` type.

    ``ports`` maps each *input* port name to ``(domain name, values)``.
    ``expected`` is :data:`BOOL` or a ``(domain name, values)`` pair.
    Returns one diagnostic per problem found; an empty list means well typed.
    """
    out: list[Diagnostic] = []
    prefix = f"{where}: " if where else ""

    def literal_ok(lit: Literal, dom: tuple[str, Sequence[str]]) -> bool:
        if lit.domain is not None and lit.domain != dom[0]:
            out.append(error("E_LITERAL_DOMAIN",
                             f"{prefix}literal {lit.domain}.{lit.value} used where {dom[0]} expected"))
            return False
        if lit.value not in dom[1]:
            out.append(error("E_LITERAL_DOMAIN",
                             f"{prefix}value {lit.value!r} is not a member of domain {dom[0]}"))
            return False
        return True

    def port_domain(ref: PortRef):
        if ref.port not in ports:
            out.append(error("E_BAD_PORT_REF",
                             f"{prefix}{ref.port!r} is not an input port of this component"))
            return None
        return ports[ref.port]

    def visit(node, want):
        if isinstance(node, Literal):
            if want == BOOL:
                out.append(error("E_TYPE", f"{prefix}signal literal {node.value!r} used as a condition"))
            else:
                literal_ok(node, want)
        elif isinstance(node, PortRef):
            dom = port_domain(node)
            if dom is None:
                return
            if want == BOOL:
                out.append(error("E_TYPE", f"{prefix}port {node.port!r} used as a condition"))
            elif dom[0] != want[0]:
                out.append(error("E_TYPE", f"{prefix}port {node.port!r} carries {dom[0]}, expected {want[0]}"))
        elif isinstance(node, Compare):
            if want != BOOL:
                out.append(error("E_TYPE", f"{prefix}comparison used where a {want[0]} value is expected"))
                return
            left, right = node.left, node.right
            if isinstance(left, Literal) and isinstance(right, Literal):
                out.append(error("E_TYPE", f"{prefix}comparison of two literals"))
                return
            if not isinstance(left, PortRef):
                left, right = right, left
            dom = port_domain(left)
            if dom is None:
                return
            if isinstance(right, PortRef):
                other = port_domain(right)
                if other is not None and other[0] != dom[0]:
                    out.append(error("E_TYPE",
                                     f"{prefix}comparing {left.port} ({dom[0]}) with {right.port} ({other[0]})"))
            elif isinstance(right, Literal):
                literal_ok(right, dom)
            else:
                out.append(error("E_TYPE", f"{prefix}comparison operands must be ports or literals"))
        elif isinstance(node, (Not, And, Or, AtLeast)):
            if want != BOOL:
                out.append(error("E_TYPE", f"{prefix}boolean expression used where a {want[0]} value is expected"))
                return
            if isinstance(node, AtLeast) and (node.k < 1 or not node.items):
                out.append(error("E_TYPE", f"{prefix}atleast needs k >= 1 and at least one operand"))
            for child in _children(node):
                visit(child, BOOL)
        elif isinstance(node, IfThenElse):
            if want == BOOL:
                out.append(error("E_TYPE", f"{prefix}if-then-else yields a signal, not a condition"))
                return
            visit(node.cond, BOOL)
            visit(node.then, want)
            visit(node.orelse, want)
        else:
            out.append(error("E_TYPE", f"{prefix}unknown expression node {node!r}"))

    visit(e, expected)
    return out


@dataclass(frozen=True)
class Implicant:
    """A box of input valuations: each listed port is restricted to a value set.

    Ports that do not appear are unconstrained.
    """

    literals: tuple[tuple[str, tuple[str, ...]], ...] = ()

    def allowed(self, port: str) -> Optional[tuple[str, ...]]:
        for name, values in self.literals:
            if name == port:
                return values
        return None

    def covers(self, env: Mapping[str, str]) -> bool:
        return all(env[name] in values for name, values in self.literals)

    def __str__(self) -> str:
        if not self.literals:
            return "{}"
        parts = ", ".join(f"{p}:{{{', '.join(vs)}}}" for p, vs in self.literals)
        return "{" + parts + "}"


@dataclass(frozen=True)
class Dnf:
    """Union of implicants over a fixed port universe."""

    implicants: tuple[Implicant, ...]
    ports: tuple[tuple[str, tuple[str, ...]], ...] = field(default=(), compare=False)

    def __iter__(self):
        return iter(self.implicants)

    def __len__(self) -> int:
        return len(self.implicants)

    def __bool__(self) -> bool:
        return bool(self.implicants)

    @property
    def is_full(self) -> bool:
        return any(not imp.literals for imp in self.implicants)

    def covers(self, env: Mapping[str, str]) -> bool:
        return any(imp.covers(env) for imp in self.implicants)


def _valuations(ports: Sequence[tuple[str, Sequence[str]]]):
    return itertools.product(*(values for _, values in ports))


def satisfying_valuations(e: Expression, target: Iterable[str],
                          ports: Sequence[tuple[str, Sequence[str]]]) -> set[tuple[str, ...]]:
    """All valuations of ``ports`` (as value tuples) on which ``e`` lands in ``target``."""
    target = set(target)
    names = [name for name, _ in ports]
    return {vals for vals in _valuations(ports)
            if evaluate(e, dict(zip(names, vals))) in target}


def invert(e: Expression, target: Iterable[str],
           ports: Sequence[tuple[str, Sequence[str]]]) -> Dnf:
    """Exact preimage of ``target`` under ``e`` as a :class:`Dnf`.

    ``ports`` lists ``(name, domain values)`` for every input port of the
    owning component; only the ports ``e`` actually references take part.
    """
    used = set(referenced_ports(e))
    relevant = tuple((name, tuple(values)) for name, values in ports if name in used)
    missing = used - {name for name, _ in relevant}
    if missing:
        raise FtError("E_UNBOUND_PORT", f"expression references unknown ports {sorted(missing)}")
    return compress(satisfying_valuations(e, target, relevant), relevant)


def compress(minterms: Iterable[Sequence[str]],
             ports: Sequence[tuple[str, Sequence[str]]]) -> Dnf:
    """Greedy deterministic box cover of ``minterms``.

    Each minterm is a value tuple aligned with ``ports``. The cover is exact
    (same denotation) but not necessarily minimal.
    """
    ports = tuple((name, tuple(values)) for name, values in ports)
    index = [{v: i for i, v in enumerate(values)} for _, values in ports]
    inside = {tuple(m) for m in minterms}
    order = sorted(inside, key=lambda m: tuple(index[i][v] for i, v in enumerate(m)))
    covered: set[tuple[str, ...]] = set()
    boxes = []
    for m in order:
        if m in covered:
            continue
        box = [[v] for v in m]
        for i, (_, values) in enumerate(ports):
            for v in values:
                if v in box[i]:
                    continue
                others = [box[j] if j != i else [v] for j in range(len(ports))]
                if all(p in inside for p in itertools.product(*others)):
                    box[i].append(v)
        box = [sorted(vs, key=index[i].__getitem__) for i, vs in enumerate(box)]
        covered.update(itertools.product(*box))
        boxes.append(box)

    implicants = []
    for box in boxes:
        lits = [(ports[i][0], tuple(vs)) for i, vs in enumerate(box)
                if len(vs) < len(ports[i][1])]
        lits.sort(key=lambda lit: lit[0])
        implicants.append(Implicant(tuple(lits)))
    pos = {name: i for i, (name, _) in enumerate(ports)}
    implicants.sort(key=lambda imp: tuple(
        (name, tuple(index[pos[name]][v] for v in vs)) for name, vs in imp.literals))
    return Dnf(tuple(dict.fromkeys(implicants)), ports)
