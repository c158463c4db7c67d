"""Text formats for models (``.ftm``) and failure criteria (``.ftc``).

Model files declare signal domains, component types and systems, and may
``import`` other model files. Parsing happens in two phases: a syntactic
pass per file (:func:`parse_file`) and a resolution pass that merges the
import closure and links names (:func:`resolve_imports`).

Grammar::

    file        := (import | signaldef | componentdef | systemdef)*
    import      := "import" STRING
    signaldef   := "signal" ID "{" ID ("," ID)* "}"
    componentdef:= "component" ID "{" portdecl* statedecl+ "}"
    portdecl    := ("input"|"output") ID ":" ID
    statedecl   := ("state"|"failure") ID ("prob" NUMBER)? "{" (ID "=" expr)* "}"
    expr        := "if" expr "then" expr "else" expr | or
    or          := and ("or" and)*
    and         := unary ("and" unary)*
    unary       := "not" unary | atom
    atom        := "atleast" "(" INT "," "[" expr ("," expr)* "]" ")"
                 | operand (("=="|"!=") operand)?
                 | "(" expr ")"
    operand     := ID ("." ID)?
    systemdef   := "system" ID "{" (instance|connect|bound)* "}"
    instance    := "instance" ID ":" ID
    connect     := "connect" ID "." ID "->" ID "." ID
    bound       := ("boundary_input"|"boundary_output") ID "." ID

    criterionfile := "criterion" ID "{" given* require+ "}"
    given       := "given" ID "." ID "=" ID
    require     := "require" ID "." ID "in" "{" ID ("," ID)* "}"

``//`` starts a line comment. Keywords are contextual except inside
expressions, where ``if then else or and not`` cannot name ports.
"""

from __future__ import annotations

import posixpath
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Union

from . import expr as ex
from .errors import Diagnostic, DslError, Location, error
from .model import (FAILURE, INPUT, NOMINAL, OUTPUT, ComponentType, Connection, Endpoint,
                    FailureCriterion, ModelBundle, Port, SignalDomain, StateDef, SystemModel)

__all__ = [
    "parse_file", "parse_model", "parse_criterion", "resolve_imports", "load_model",
    "load_criterion", "FileLoader", "format_bundle", "format_criterion", "format_expression",
    "SourceFile",
]

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n﻿]+|//[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<op>==|!=|->|[{}()\[\],:=.])
""", re.VERBOSE)

_EXPR_KEYWORDS = frozenset({"if", "then", "else", "or", "and", "not"})


@dataclass(frozen=True)
class Token:
    kind: str  # "id" | "number" | "string" | "op" | "eof"
    text: str
    loc: Location


def tokenize(text: str, origin: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            loc = Location(origin, line, pos - line_start + 1)
            raise DslError([error("E_SYNTAX", f"unexpected character {text[pos]!r}", loc)])
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), Location(origin, line, pos - line_start + 1)))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", Location(origin, line, pos - line_start + 1)))
    return tokens


# Syntax-level declarations. Locations never take part in equality, so two
# files that spell the same definition compare equal.

@dataclass(frozen=True)
class Name:
    ident: str
    qualifier: Optional[str] = None
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class SignalDecl:
    name: str
    values: tuple[str, ...]
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class PortDecl:
    direction: str
    name: str
    domain: str
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class StateDecl:
    kind: str
    name: str
    probability: Optional[float]
    assignments: tuple[tuple[str, object], ...]
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class ComponentDecl:
    name: str
    ports: tuple[PortDecl, ...]
    states: tuple[StateDecl, ...]
    loc: Optional[Location] = field(default=None, compare=False)


@dataclass(frozen=True)
class SystemDecl:
    name: str
    instances: tuple[tuple[str, str], ...]
    connections: tuple[Connection, ...]
    boundary_inputs: tuple[Endpoint, ...]
    boundary_outputs: tuple[Endpoint, ...]
    loc: Optional[Location] = field(default=None, compare=False)
    instance_locs: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class SourceFile:
    origin: str
    imports: tuple[tuple[str, Location], ...]
    decls: tuple


class _Parser:
    def __init__(self, text: str, origin: str):
        self.origin = origin
        self.tokens = tokenize(text, origin)
        self.pos = 0
        self.diags: list[Diagnostic] = []

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def fail(self, expected: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise DslError(self.diags + [error("E_SYNTAX", f"expected {expected}, found {found}", tok.loc)])

    def at(self, text: str) -> bool:
        return self.tok.kind in ("id", "op") and self.tok.text == text

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            tok = self.tok
            self.pos += 1
            return tok
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            self.fail(repr(text))
        return tok

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "id":
            self.fail(what)
        tok = self.tok
        self.pos += 1
        return tok

    def endpoint(self) -> Endpoint:
        inst = self.ident("instance name").text
        self.expect(".")
        return Endpoint(inst, self.ident("port name").text)

    def dup(self, kind: str, name: str, loc: Location):
        self.diags.append(error("E_DUP_NAME", f"duplicate {kind} {name!r}", loc))

    # model files

    def parse_file(self) -> SourceFile:
        imports, decls = [], []
        names: set[str] = set()
        while self.tok.kind != "eof":
            tok = self.tok
            if self.accept("import"):
                if self.tok.kind != "string":
                    self.fail("quoted file name")
                imports.append((self.tok.text[1:-1], self.tok.loc))
                self.pos += 1
                continue
            if tok.text == "signal":
                decl = self.signal()
            elif tok.text == "component":
                decl = self.component()
            elif tok.text == "system":
                decl = self.system()
            else:
                self.fail("'import', 'signal', 'component' or 'system'")
            if decl.name in names:
                self.dup("definition", decl.name, decl.loc)
            names.add(decl.name)
            decls.append(decl)
        if self.diags:
            raise DslError(self.diags)
        return SourceFile(self.origin, tuple(imports), tuple(decls))

    def signal(self) -> SignalDecl:
        self.expect("signal")
        name = self.ident("signal name")
        self.expect("{")
        values = []
        while True:
            v = self.ident("signal value")
            if v.text in values:
                self.dup("value", v.text, v.loc)
            else:
                values.append(v.text)
            if not self.accept(","):
                break
        self.expect("}")
        return SignalDecl(name.text, tuple(values), name.loc)

    def component(self) -> ComponentDecl:
        self.expect("component")
        name = self.ident("component name")
        self.expect("{")
        ports, states = [], []
        port_names, state_names = set(), set()
        while self.tok.text in ("input", "output") and self.tok.kind == "id" and self.peek().kind == "id":
            direction = self.ident().text
            pname = self.ident("port name")
            self.expect(":")
            dom = self.ident("signal name")
            if pname.text in port_names:
                self.dup("port", pname.text, pname.loc)
            port_names.add(pname.text)
            ports.append(PortDecl(direction, pname.text, dom.text, pname.loc))
        while self.tok.kind == "id" and self.tok.text in ("state", "failure"):
            st = self.state()
            if st.name in state_names:
                self.dup("state", st.name, st.loc)
            state_names.add(st.name)
            states.append(st)
        if not states:
            self.fail("'state' or 'failure'")
        self.expect("}")
        return ComponentDecl(name.text, tuple(ports), tuple(states), name.loc)

    def state(self) -> StateDecl:
        kind = NOMINAL if self.ident().text == "state" else FAILURE
        name = self.ident("state name")
        prob = None
        if self.accept("prob"):
            if self.tok.kind != "number":
                self.fail("probability")
            prob = float(self.tok.text)
            self.pos += 1
        self.expect("{")
        assigns = []
        seen = set()
        while not self.at("}"):
            port = self.ident("output port name or '}'")
            self.expect("=")
            e = self.expr()
            if port.text in seen:
                self.dup("assignment to", port.text, port.loc)
            seen.add(port.text)
            assigns.append((port.text, e))
        self.expect("}")
        return StateDecl(kind, name.text, prob, tuple(assigns), name.loc)

    def system(self) -> SystemDecl:
        self.expect("system")
        name = self.ident("system name")
        self.expect("{")
        instances, inst_locs, conns, b_in, b_out = [], [], [], [], []
        while not self.at("}"):
            if self.accept("instance"):
                inst = self.ident("instance name")
                self.expect(":")
                ctype = self.ident("component name")
                if any(i == inst.text for i, _ in instances):
                    self.dup("instance", inst.text, inst.loc)
                else:
                    instances.append((inst.text, ctype.text))
                    inst_locs.append(ctype.loc)
            elif self.accept("connect"):
                src = self.endpoint()
                self.expect("->")
                conns.append(Connection(src, self.endpoint()))
            elif self.accept("boundary_input"):
                b_in.append(self.endpoint())
            elif self.accept("boundary_output"):
                b_out.append(self.endpoint())
            else:
                self.fail("'instance', 'connect', 'boundary_input', 'boundary_output' or '}'")
        self.expect("}")
        return SystemDecl(name.text, tuple(instances), tuple(conns), tuple(b_in), tuple(b_out),
                          name.loc, tuple(inst_locs))

    # expressions

    def expr(self):
        if self.accept("if"):
            cond = self.expr()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            return ex.IfThenElse(cond, then, self.expr())
        return self.disjunction()

    def disjunction(self):
        items = [self.conjunction()]
        while self.accept("or"):
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else ex.Or(tuple(items))

    def conjunction(self):
        items = [self.unary()]
        while self.accept("and"):
            items.append(self.unary())
        return items[0] if len(items) == 1 else ex.And(tuple(items))

    def unary(self):
        if self.accept("not"):
            return ex.Not(self.unary())
        return self.atom()

    def atom(self):
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.at("atleast") and self.peek().text == "(":
            self.pos += 2
            if self.tok.kind != "number" or not self.tok.text.isdigit():
                self.fail("integer")
            k = int(self.tok.text)
            self.pos += 1
            self.expect(",")
            self.expect("[")
            items = [self.expr()]
            while self.accept(","):
                items.append(self.expr())
            self.expect("]")
            self.expect(")")
            return ex.AtLeast(k, tuple(items))
        left = self.operand()
        for op in ("==", "!="):
            if self.accept(op):
                return ex.Compare(left, op, self.operand())
        return left

    def operand(self) -> Name:
        tok = self.tok
        if tok.kind != "id" or tok.text in _EXPR_KEYWORDS:
            self.fail("expression")
        self.pos += 1
        if self.at(".") and self.peek().kind == "id":
            self.pos += 1
            value = self.ident().text
            return Name(value, tok.text, tok.loc)
        return Name(tok.text, None, tok.loc)

    # criterion files

    def criterion(self) -> FailureCriterion:
        self.expect("criterion")
        name = self.ident("criterion name")
        self.expect("{")
        givens: dict[Endpoint, str] = {}
        reqs: dict[Endpoint, tuple[str, ...]] = {}
        while self.at("given"):
            tok = self.expect("given")
            ep = self.endpoint()
            self.expect("=")
            value = self.ident("value").text
            if ep in givens:
                self.diags.append(error("E_DUP_GIVEN", f"{ep} given more than once", tok.loc))
            givens[ep] = value
        if not self.at("require"):
            self.fail("'require'" if not givens else "'given' or 'require'")
        while self.at("require"):
            tok = self.expect("require")
            ep = self.endpoint()
            self.expect("in")
            self.expect("{")
            values = []
            while True:
                v = self.ident("value")
                if v.text in values:
                    self.dup("value", v.text, v.loc)
                values.append(v.text)
                if not self.accept(","):
                    break
            self.expect("}")
            if ep in reqs:
                self.diags.append(error("E_DUP_REQUIRE", f"{ep} required more than once", tok.loc))
            reqs[ep] = tuple(dict.fromkeys(values))
        self.expect("}")
        if self.tok.kind != "eof":
            self.fail("end of file")
        if self.diags:
            raise DslError(self.diags)
        return FailureCriterion(name.text, givens, reqs)


def parse_file(text: str, origin: str = "<string>") -> SourceFile:
    """Syntactic pass over one model file; imports stay unresolved."""
    return _Parser(text, origin).parse_file()


def parse_criterion(text: str, origin: str = "<string>") -> FailureCriterion:
    """Parse a ``.ftc`` file. Value membership is checked later, against a system."""
    return _Parser(text, origin).criterion()


Loader = Union[Callable[[str], str], Mapping[str, str], "FileLoader"]


class FileLoader:
    """Resolve import names against a list of directories."""

    def __init__(self, *directories):
        self.directories = [Path(d) for d in directories]

    def locate(self, name: str) -> tuple[str, str]:
        for d in self.directories:
            path = d / name
            if path.is_file():
                return str(path.resolve()), path.read_text(encoding="utf-8")
        raise FileNotFoundError(name)

    def __call__(self, name: str) -> str:
        return self.locate(name)[1]


def _fetch(loader, name: str) -> tuple[str, str]:
    if hasattr(loader, "locate"):
        return loader.locate(name)
    key = posixpath.normpath(name)
    if isinstance(loader, Mapping):
        return key, loader[name]
    return key, loader(name)


def resolve_imports(root: SourceFile, loader: Optional[Loader] = None,
                    root_identity: Optional[str] = None) -> ModelBundle:
    """Load the import closure of ``root``, merge it and link every name.

    A file reached along several import paths is loaded once. The same
    name defined differently in two files is ``E_IMPORT_CONFLICT``.
    """
    diags: list[Diagnostic] = []
    order: list[SourceFile] = []
    done: set[str] = set()

    def visit(sf: SourceFile, identity: str, stack: tuple[str, ...]):
        stack = stack + (identity,)
        for name, loc in sf.imports:
            try:
                if loader is None:
                    raise LookupError(name)
                key, text = _fetch(loader, name)
            except (LookupError, OSError):
                diags.append(error("E_IMPORT_NOT_FOUND", f"cannot load import {name!r}", loc))
                continue
            if key in stack:
                diags.append(error("E_IMPORT_CYCLE", f"import cycle through {name!r}", loc))
                continue
            if key in done:
                continue
            done.add(key)
            try:
                child = text if isinstance(text, SourceFile) else parse_file(text, name)
            except DslError as err:
                diags.extend(err.diagnostics)
                continue
            visit(child, key, stack)
        order.append(sf)

    identity = root_identity or root.origin
    done.add(identity)
    visit(root, identity, ())

    merged: dict[str, object] = {}
    for sf in order:
        for decl in sf.decls:
            prev = merged.get(decl.name)
            if prev is None:
                merged[decl.name] = decl
            elif prev != decl:
                diags.append(error("E_IMPORT_CONFLICT",
                                   f"{decl.name!r} is defined differently in {prev.loc.file if prev.loc else '?'}",
                                   decl.loc))
    if diags:
        raise DslError(diags)
    return _link(list(merged.values()))


def parse_model(text: str, origin: str = "<string>", loader: Optional[Loader] = None) -> ModelBundle:
    """Parse a model file and everything it imports into a linked bundle."""
    return resolve_imports(parse_file(text, origin), loader)


def load_model(*paths, search_path=()) -> ModelBundle:
    """Load one or more ``.ftm`` files from disk.

    Imports resolve relative to the first file's directory, then ``search_path``.
    """
    paths = [Path(p) for p in paths]
    loader = FileLoader(paths[0].parent, *search_path)
    roots = {str(p.resolve()): parse_file(p.read_text(encoding="utf-8"), str(p)) for p in paths}
    if len(roots) == 1:
        (identity, sf), = roots.items()
        return resolve_imports(sf, loader, identity)

    class _Roots:
        def locate(self, name):
            if name in roots:
                return name, roots[name]
            return loader.locate(name)

    # several roots behave like imports of an empty file
    synthetic = SourceFile("<command line>", tuple((i, None) for i in roots), ())
    return resolve_imports(synthetic, _Roots(), "<command line>")


def _link(decls: list) -> ModelBundle:
    diags: list[Diagnostic] = []
    domains: dict[str, SignalDomain] = {}
    provenance: dict[str, Location] = {}
    for d in decls:
        if isinstance(d, SignalDecl):
            domains[d.name] = SignalDomain(d.name, d.values)
            provenance[f"signal {d.name}"] = d.loc
    all_values = {v for dom in domains.values() for v in dom.values}

    components: dict[str, ComponentType] = {}
    for c in decls:
        if not isinstance(c, ComponentDecl):
            continue
        provenance[f"component {c.name}"] = c.loc
        ports = []
        for p in c.ports:
            dom = domains.get(p.domain)
            if dom is None:
                diags.append(error("E_UNKNOWN_REF", f"unknown signal {p.domain!r}", p.loc))
                continue
            ports.append(Port(p.name, INPUT if p.direction == "input" else OUTPUT, dom))
        port_names = {p.name for p in c.ports}

        def resolve(node):
            if isinstance(node, Name):
                if node.qualifier is not None:
                    dom = domains.get(node.qualifier)
                    if dom is None or node.ident not in dom.values:
                        diags.append(error("E_UNKNOWN_REF",
                                           f"unknown value {node.qualifier}.{node.ident}", node.loc))
                    return ex.Literal(node.ident, node.qualifier)
                is_port = node.ident in port_names
                is_value = node.ident in all_values
                if is_port and is_value:
                    diags.append(error("E_AMBIGUOUS_NAME",
                                       f"{node.ident!r} is both a port and a signal value", node.loc))
                elif not is_port and not is_value:
                    diags.append(error("E_UNKNOWN_REF",
                                       f"{node.ident!r} is neither a port nor a signal value", node.loc))
                return ex.PortRef(node.ident) if is_port else ex.Literal(node.ident)
            if isinstance(node, ex.Compare):
                return ex.Compare(resolve(node.left), node.op, resolve(node.right))
            if isinstance(node, ex.Not):
                return ex.Not(resolve(node.operand))
            if isinstance(node, ex.And):
                return ex.And(tuple(resolve(x) for x in node.items))
            if isinstance(node, ex.Or):
                return ex.Or(tuple(resolve(x) for x in node.items))
            if isinstance(node, ex.AtLeast):
                return ex.AtLeast(node.k, tuple(resolve(x) for x in node.items))
            if isinstance(node, ex.IfThenElse):
                return ex.IfThenElse(resolve(node.cond), resolve(node.then), resolve(node.orelse))
            raise TypeError(node)

        states = tuple(
            StateDef(s.name, s.kind, {port: resolve(e) for port, e in s.assignments}, s.probability)
            for s in c.states)
        components[c.name] = ComponentType(c.name, tuple(ports), states)

    systems: dict[str, SystemModel] = {}
    for s in decls:
        if not isinstance(s, SystemDecl):
            continue
        provenance[f"system {s.name}"] = s.loc
        instances = {}
        for (inst, ctype), loc in zip(s.instances, s.instance_locs or [None] * len(s.instances)):
            comp = components.get(ctype)
            if comp is None:
                diags.append(error("E_UNKNOWN_REF", f"unknown component {ctype!r}", loc))
                continue
            instances[inst] = comp
        systems[s.name] = SystemModel(s.name, instances, s.connections, s.boundary_inputs,
                                      s.boundary_outputs)
    if diags:
        raise DslError(diags)
    return ModelBundle(domains, components, systems, provenance)


def load_criterion(path) -> FailureCriterion:
    path = Path(path)
    return parse_criterion(path.read_text(encoding="utf-8"), str(path))


# printing

def format_expression(e, level: int = 0) -> str:
    """Render an expression; ``level`` is the binding strength the context requires."""
    if isinstance(e, ex.Literal):
        return f"{e.domain}.{e.value}" if e.domain else e.value
    if isinstance(e, ex.PortRef):
        return e.port
    if isinstance(e, ex.Compare):
        return f"{format_expression(e.left, 4)} {e.op} {format_expression(e.right, 4)}"
    if isinstance(e, ex.AtLeast):
        return f"atleast({e.k}, [{', '.join(format_expression(x) for x in e.items)}])"
    if isinstance(e, ex.Not):
        text, own = f"not {format_expression(e.operand, 3)}", 3
    elif isinstance(e, ex.And):
        text, own = " and ".join(format_expression(x, 3) for x in e.items), 2
    elif isinstance(e, ex.Or):
        text, own = " or ".join(format_expression(x, 2) for x in e.items), 1
    elif isinstance(e, ex.IfThenElse):
        text = (f"if {format_expression(e.cond)} then {format_expression(e.then)} "
                f"else {format_expression(e.orelse)}")
        own = 0
    else:
        raise TypeError(e)
    return f"({text})" if level > own else text


def format_bundle(bundle: ModelBundle) -> str:
    """Pretty-print a bundle as a single self-contained model file."""
    out = []
    for d in bundle.domains.values():
        out.append(f"signal {d.name} {{ {', '.join(d.values)} }}\n")
    for c in bundle.components.values():
        out.append(f"component {c.name} {{\n")
        for p in c.ports:
            out.append(f"    {p.direction} {p.name}: {p.domain.name}\n")
        for s in c.states:
            head = "state" if s.kind == NOMINAL else "failure"
            prob = f" prob {s.probability!r}" if s.probability is not None else ""
            out.append(f"    {head} {s.name}{prob} {{\n")
            for port, e in s.assignments.items():
                out.append(f"        {port} = {format_expression(e)}\n")
            out.append("    }\n")
        out.append("}\n")
    for s in bundle.systems.values():
        out.append(f"system {s.name} {{\n")
        for inst, comp in s.instances.items():
            out.append(f"    instance {inst}: {comp.name}\n")
        for c in s.connections:
            out.append(f"    connect {c.source} -> {c.target}\n")
        for ep in s.boundary_inputs:
            out.append(f"    boundary_input {ep}\n")
        for ep in s.boundary_outputs:
            out.append(f"    boundary_output {ep}\n")
        out.append("}\n")
    return "".join(out)


def format_criterion(c: FailureCriterion) -> str:
    lines = [f"criterion {c.name} {{"]
    for ep, value in c.givens.items():
        lines.append(f"    given {ep} = {value}")
    for ep, values in c.requirements.items():
        lines.append(f"    require {ep} in {{ {', '.join(values)} }}")
    lines.append("}")
    return "\n".join(lines) + "\n"
