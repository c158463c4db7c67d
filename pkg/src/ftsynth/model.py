"""Signal domains, component types, system topology and failure criteria."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional

from . import expr as ex
from .errors import Diagnostic, FtError, ValidationReport, error

NOMINAL = "nominal"
FAILURE = "failure"
INPUT = "input"
OUTPUT = "output"


@dataclass(frozen=True)
class SignalDomain:
    name: str
    values: tuple[str, ...]

    def index(self, value: str) -> int:
        return self.values.index(value)

    def canonical(self, values) -> tuple[str, ...]:
        """``values`` deduplicated and in declaration order."""
        wanted = set(values)
        return tuple(v for v in self.values if v in wanted)


@dataclass(frozen=True)
class Port:
    name: str
    direction: str
    domain: SignalDomain


@dataclass(frozen=True)
class StateDef:
    name: str
    kind: str
    assignments: Mapping[str, ex.Expression]
    probability: Optional[float] = None

    @property
    def is_failure(self) -> bool:
        return self.kind == FAILURE


@dataclass(frozen=True)
class ComponentType:
    name: str
    ports: tuple[Port, ...]
    states: tuple[StateDef, ...]

    @property
    def inputs(self) -> tuple[Port, ...]:
        return tuple(p for p in self.ports if p.direction == INPUT)

    @property
    def outputs(self) -> tuple[Port, ...]:
        return tuple(p for p in self.ports if p.direction == OUTPUT)

    @property
    def nominal(self) -> StateDef:
        for s in self.states:
            if s.kind == NOMINAL:
                return s
        raise FtError("E_NO_NOMINAL", f"component {self.name} has no nominal state")

    @property
    def failures(self) -> tuple[StateDef, ...]:
        return tuple(s for s in self.states if s.kind == FAILURE)

    def port(self, name: str) -> Optional[Port]:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def state(self, name: str) -> Optional[StateDef]:
        for s in self.states:
            if s.name == name:
                return s
        return None

    def input_domains(self) -> list[tuple[str, tuple[str, ...]]]:
        """``(port name, domain values)`` for every input, in declaration order."""
        return [(p.name, p.domain.values) for p in self.inputs]


class Endpoint(NamedTuple):
    instance: str
    port: str

    def __str__(self) -> str:
        return f"{self.instance}.{self.port}"


class Connection(NamedTuple):
    source: Endpoint
    target: Endpoint


@dataclass(frozen=True)
class SystemModel:
    name: str
    instances: Mapping[str, ComponentType]
    connections: tuple[Connection, ...] = ()
    boundary_inputs: tuple[Endpoint, ...] = ()
    boundary_outputs: tuple[Endpoint, ...] = ()

    def port(self, ep: Endpoint) -> Optional[Port]:
        comp = self.instances.get(ep.instance)
        return comp.port(ep.port) if comp is not None else None

    def source_of(self, ep: Endpoint) -> Optional[Endpoint]:
        """The producer feeding input ``ep``, or ``None`` for a boundary input."""
        for c in self.connections:
            if c.target == ep:
                return c.source
        return None

    def sources(self) -> dict[Endpoint, Endpoint]:
        return {c.target: c.source for c in self.connections}


@dataclass(frozen=True)
class FailureCriterion:
    name: str
    givens: Mapping[Endpoint, str]
    requirements: Mapping[Endpoint, tuple[str, ...]]


def validate_domain(d: SignalDomain) -> ValidationReport:
    diags = []
    if len(d.values) < 2:
        diags.append(error("E_DOMAIN_SIZE", f"signal {d.name} needs at least two values"))
    seen = set()
    for v in d.values:
        if v in seen:
            diags.append(error("E_DUP_NAME", f"value {v!r} repeated in signal {d.name}"))
        seen.add(v)
    return ValidationReport(diags)


def validate_component(c: ComponentType) -> ValidationReport:
    """Check every component-type invariant; an empty report means valid."""
    diags: list[Diagnostic] = []
    where = f"component {c.name}"

    names = set()
    for p in c.ports:
        if p.name in names:
            diags.append(error("E_DUP_PORT", f"{where}: port {p.name} declared twice"))
        names.add(p.name)

    state_names = set()
    for s in c.states:
        if s.name in state_names:
            diags.append(error("E_DUP_STATE", f"{where}: state {s.name} declared twice"))
        state_names.add(s.name)

    nominals = [s for s in c.states if s.kind == NOMINAL]
    if not nominals:
        diags.append(error("E_NO_NOMINAL", f"{where}: no nominal state"))
    elif len(nominals) > 1:
        diags.append(error("E_MULTIPLE_NOMINAL",
                           f"{where}: {len(nominals)} nominal states ({', '.join(s.name for s in nominals)})"))

    total = 0.0
    for s in c.states:
        if s.probability is None:
            continue
        if s.kind == NOMINAL:
            diags.append(error("E_PROB_ON_NOMINAL", f"{where}: nominal state {s.name} carries a probability"))
        elif not 0.0 < s.probability < 1.0:
            diags.append(error("E_PROB_RANGE", f"{where}: probability of {s.name} outside (0, 1)"))
        else:
            total += s.probability
    if total >= 1.0:
        diags.append(error("E_PROB_SUM", f"{where}: failure probabilities sum to {total:g} >= 1"))

    inputs = {p.name: (p.domain.name, p.domain.values) for p in c.inputs}
    outputs = {p.name: p for p in c.outputs}
    for s in c.states:
        for port_name in s.assignments:
            if port_name not in outputs:
                diags.append(error("E_EXTRA_ASSIGNMENT",
                                   f"{where}: state {s.name} assigns {port_name}, which is not an output"))
        for port_name, port in outputs.items():
            if port_name not in s.assignments:
                diags.append(error("E_MISSING_ASSIGNMENT",
                                   f"{where}: state {s.name} does not assign output {port_name}"))
                continue
            diags.extend(ex.check_types(
                s.assignments[port_name], inputs, (port.domain.name, port.domain.values),
                where=f"{where}, state {s.name}, {port_name}"))
    return ValidationReport(diags)


def _dependency_edges(s: SystemModel) -> dict[str, set[str]]:
    edges: dict[str, set[str]] = {i: set() for i in s.instances}
    for c in s.connections:
        if c.source.instance in edges and c.target.instance in edges:
            edges[c.source.instance].add(c.target.instance)
    return edges


def _layers(s: SystemModel) -> Optional[list[list[str]]]:
    edges = _dependency_edges(s)
    indeg = {i: 0 for i in edges}
    for src, dsts in edges.items():
        for d in dsts:
            indeg[d] += 1
    layer = sorted(i for i, n in indeg.items() if n == 0)
    layers = []
    placed = 0
    while layer:
        layers.append(layer)
        placed += len(layer)
        nxt = set()
        for i in layer:
            for d in edges[i]:
                indeg[d] -= 1
                if indeg[d] == 0:
                    nxt.add(d)
        layer = sorted(nxt)
    return layers if placed == len(edges) else None


def topological_order(s: SystemModel) -> list[str]:
    """Producers before consumers.

    Instances are grouped in layers (an instance sits in the first layer
    after all its producers); each layer is sorted by instance id.
    """
    layers = _layers(s)
    if layers is None:
        raise FtError("E_CYCLE", f"system {s.name}: component dependency graph is cyclic")
    return [i for layer in layers for i in layer]


def validate_system(s: SystemModel) -> ValidationReport:
    """Structural checks on a system's topology; assumes component types are valid."""
    diags: list[Diagnostic] = []
    where = f"system {s.name}"
    if not s.instances:
        diags.append(error("E_EMPTY_SYSTEM", f"{where}: no instances"))

    def resolve(ep: Endpoint, direction: str, what: str) -> Optional[Port]:
        comp = s.instances.get(ep.instance)
        if comp is None:
            diags.append(error("E_UNKNOWN_INSTANCE", f"{where}: {what} {ep} names an unknown instance"))
            return None
        port = comp.port(ep.port)
        if port is None:
            diags.append(error("E_UNKNOWN_PORT", f"{where}: {what} {ep}: {comp.name} has no port {ep.port}"))
            return None
        if port.direction != direction:
            diags.append(error("E_DIRECTION", f"{where}: {what} {ep} must be an {direction} port"))
            return None
        return port

    targets: dict[Endpoint, int] = {}
    for c in s.connections:
        src = resolve(c.source, OUTPUT, "connection source")
        dst = resolve(c.target, INPUT, "connection target")
        if src is not None and dst is not None and src.domain != dst.domain:
            diags.append(error("E_DOMAIN_MISMATCH",
                               f"{where}: {c.source} carries {src.domain.name} but {c.target} expects {dst.domain.name}"))
        targets[c.target] = targets.get(c.target, 0) + 1
    for ep, n in targets.items():
        if n > 1:
            diags.append(error("E_DOUBLE_CONNECTED", f"{where}: input {ep} is fed by {n} connections"))

    boundary_in = set()
    for ep in s.boundary_inputs:
        if resolve(ep, INPUT, "boundary input") is not None:
            boundary_in.add(ep)
            if ep in targets:
                diags.append(error("E_BOUNDARY_CONNECTED", f"{where}: boundary input {ep} is also connected"))
    for ep in s.boundary_outputs:
        resolve(ep, OUTPUT, "boundary output")

    for inst, comp in s.instances.items():
        for p in comp.inputs:
            ep = Endpoint(inst, p.name)
            if ep not in targets and ep not in boundary_in:
                diags.append(error("E_UNBOUND_INPUT",
                                   f"{where}: input {ep} is neither connected nor a boundary input"))

    if _layers(s) is None:
        diags.append(error("E_CYCLE", f"{where}: component dependency graph is cyclic"))
    return ValidationReport(diags)


def check_criterion(s: SystemModel, c: FailureCriterion) -> ValidationReport:
    """Check a criterion against the system it is applied to."""
    diags = []
    where = f"criterion {c.name}"
    boundary_in = set(s.boundary_inputs)
    boundary_out = set(s.boundary_outputs)
    for ep, value in c.givens.items():
        port = s.port(ep)
        if port is None:
            diags.append(error("E_UNKNOWN_PORT", f"{where}: given on unknown port {ep}"))
        elif ep not in boundary_in:
            diags.append(error("E_NOT_BOUNDARY", f"{where}: {ep} is not a boundary input of {s.name}"))
        elif value not in port.domain.values:
            diags.append(error("E_VALUE_DOMAIN", f"{where}: {value!r} is not a {port.domain.name} value"))
    for ep in s.boundary_inputs:
        if ep not in c.givens:
            diags.append(error("E_UNBOUND_INPUT", f"{where}: boundary input {ep} has no given value"))
    if not c.requirements:
        diags.append(error("E_NO_REQUIREMENT", f"{where}: at least one requirement is needed"))
    for ep, values in c.requirements.items():
        port = s.port(ep)
        if port is None:
            diags.append(error("E_UNKNOWN_PORT", f"{where}: requirement on unknown port {ep}"))
        elif ep not in boundary_out:
            diags.append(error("E_NOT_BOUNDARY", f"{where}: {ep} is not a boundary output of {s.name}"))
        elif not values:
            diags.append(error("E_EMPTY_REQUIREMENT", f"{where}: empty value set for {ep}"))
        else:
            for v in values:
                if v not in port.domain.values:
                    diags.append(error("E_VALUE_DOMAIN", f"{where}: {v!r} is not a {port.domain.name} value"))
    return ValidationReport(diags)


@dataclass(frozen=True)
class ModelBundle:
    """All named entities of a model after import resolution."""

    domains: Mapping[str, SignalDomain] = field(default_factory=dict)
    components: Mapping[str, ComponentType] = field(default_factory=dict)
    systems: Mapping[str, SystemModel] = field(default_factory=dict)
    provenance: Mapping[str, object] = field(default_factory=dict, compare=False)

    def system(self, name: Optional[str] = None) -> SystemModel:
        if name is None:
            if len(self.systems) != 1:
                raise FtError("E_SYSTEM_AMBIGUOUS",
                              f"choose a system: {', '.join(self.systems) or '(none defined)'}")
            return next(iter(self.systems.values()))
        try:
            return self.systems[name]
        except KeyError:
            raise FtError("E_UNKNOWN_REF", f"no system named {name!r}") from None

    def validate(self) -> ValidationReport:
        report = ValidationReport()
        for d in self.domains.values():
            report += validate_domain(d)
        for c in self.components.values():
            report += validate_component(c)
        for s in self.systems.values():
            report += validate_system(s)
        return report


def failure_probabilities(s: SystemModel, overrides: Optional[Mapping[str, float]] = None
                          ) -> dict[tuple[str, str], float]:
    """Per-(instance, failure state) probabilities: model values, then ``overrides``.

    ``overrides`` is keyed by ``"instance.state"``. Missing entries are simply absent.
    """
    probs = {}
    for inst, comp in s.instances.items():
        for st in comp.failures:
            if st.probability is not None:
                probs[(inst, st.name)] = st.probability
    for key, p in (overrides or {}).items():
        inst, _, state = key.partition(".")
        probs[(inst, state)] = float(p)
    return probs


def nominal_probabilities(s: SystemModel, probs: Mapping[tuple[str, str], float]) -> dict[str, float]:
    """``1 - sum of failure probabilities`` per instance; instances with a missing rate are skipped."""
    out = {}
    for inst, comp in s.instances.items():
        rates = [probs.get((inst, st.name)) for st in comp.failures]
        if all(r is not None for r in rates):
            out[inst] = 1.0 - sum(rates)
    return out
