"""Tree artifacts: JSON export/import, Graphviz DOT and Galileo text.

JSON export schema (``format: ftsynth.fault-tree``, ``version: 1``)::

    {
      "format": "ftsynth.fault-tree",
      "version": 1,
      "system": "<system name>",
      "criterion": {"name": ..., "givens": {"I.p": "v", ...},
                    "requirements": {"I.q": ["v", ...], ...}},
      "diagnostics": [{"severity": ..., "code": ..., "message": ...}],
      "top": "<node id>",
      "nodes": [
        {"id": "G1", "type": "and" | "or", "label": ..., "children": ["E1", ...]},
        {"id": "E1", "type": "event", "instance": ..., "state": ..., "probability": 1e-4 | null},
        {"id": "N1", "type": "nominal", "instance": ...},
        {"id": "T1", "type": "true"}
      ]
    }

Nodes are listed once each in depth-first preorder; shared subtrees are
referenced by id from several parents.
"""

from __future__ import annotations

import json
import re
from dataclasses import replace
from typing import Mapping, Optional

from .analysis import CutSetCollection
from .errors import Diagnostic, FtError
from .model import Endpoint, FailureCriterion, SystemModel
from .tree import (AndGate, BasicEvent, FaultTree, Gate, NominalGuard, OrGate, TrueLeaf,
                   is_false, iter_nodes)

FORMAT = "ftsynth.fault-tree"
VERSION = 1


def node_ids(root) -> dict[int, str]:
    """Deterministic ids keyed by ``id(node)``: G (gates), E (events), N (guards), T (true)."""
    counters = {"G": 0, "E": 0, "N": 0, "T": 0}
    ids = {}
    for node in iter_nodes(root):
        prefix = ("G" if isinstance(node, Gate) else "E" if isinstance(node, BasicEvent)
                  else "N" if isinstance(node, NominalGuard) else "T")
        counters[prefix] += 1
        ids[id(node)] = f"{prefix}{counters[prefix]}"
    return ids


def _system_name(system) -> Optional[str]:
    return system.name if isinstance(system, SystemModel) else system


def tree_to_dict(tree: FaultTree) -> dict:
    ids = node_ids(tree.root)
    nodes = []
    for node in iter_nodes(tree.root):
        nid = ids[id(node)]
        if isinstance(node, Gate):
            nodes.append({"id": nid, "type": "and" if isinstance(node, AndGate) else "or",
                          "label": node.label,
                          "children": [ids[id(c)] for c in node.children]})
        elif isinstance(node, BasicEvent):
            nodes.append({"id": nid, "type": "event", "instance": node.instance,
                          "state": node.state, "probability": node.probability})
        elif isinstance(node, NominalGuard):
            nodes.append({"id": nid, "type": "nominal", "instance": node.instance})
        else:
            nodes.append({"id": nid, "type": "true"})
    crit = tree.criterion
    return {
        "format": FORMAT,
        "version": VERSION,
        "system": _system_name(tree.system),
        "criterion": {
            "name": crit.name,
            "givens": {str(ep): v for ep, v in crit.givens.items()},
            "requirements": {str(ep): list(vs) for ep, vs in crit.requirements.items()},
        },
        "diagnostics": [{"severity": d.severity, "code": d.code, "message": d.message}
                        for d in tree.diagnostics],
        "top": ids[id(tree.root)],
        "nodes": nodes,
    }


def export_json(tree: FaultTree) -> str:
    return json.dumps(tree_to_dict(tree), indent=2) + "\n"


def _endpoint(text: str) -> Endpoint:
    inst, _, port = text.partition(".")
    return Endpoint(inst, port)


def import_json(text: str) -> FaultTree:
    """Rebuild a :class:`FaultTree` from :func:`export_json` output.

    The system is restored by name only.
    """
    data = json.loads(text)
    if data.get("format") != FORMAT or data.get("version") != VERSION:
        raise FtError("E_FORMAT", f"not a {FORMAT} v{VERSION} document")
    raw_nodes = {n["id"]: n for n in data["nodes"]}
    built: dict[str, object] = {}

    def build(nid: str):
        if nid in built:
            return built[nid]
        raw = raw_nodes[nid]
        kind = raw["type"]
        if kind in ("and", "or"):
            cls = AndGate if kind == "and" else OrGate
            node = cls(tuple(build(c) for c in raw["children"]), label=raw.get("label", ""))
        elif kind == "event":
            node = BasicEvent(raw["instance"], raw["state"], raw.get("probability"))
        elif kind == "nominal":
            node = NominalGuard(raw["instance"])
        elif kind == "true":
            node = TrueLeaf()
        else:
            raise FtError("E_FORMAT", f"unknown node type {kind!r}")
        built[nid] = node
        return node

    crit = data["criterion"]
    criterion = FailureCriterion(
        crit["name"],
        {_endpoint(k): v for k, v in crit["givens"].items()},
        {_endpoint(k): tuple(v) for k, v in crit["requirements"].items()},
    )
    diags = tuple(Diagnostic(d["severity"], d["code"], d["message"]) for d in data["diagnostics"])
    return FaultTree(build(data["top"]), criterion, data["system"], diags)


def with_probabilities(tree: FaultTree, probs: Mapping[tuple[str, str], float]) -> FaultTree:
    """Copy of ``tree`` whose basic events carry the probabilities in ``probs``."""
    memo: dict[int, object] = {}

    def walk(node):
        key = id(node)
        if key not in memo:
            if isinstance(node, BasicEvent):
                p = probs.get((node.instance, node.state), node.probability)
                memo[key] = replace(node, probability=p)
            elif isinstance(node, Gate):
                memo[key] = type(node)(tuple(walk(c) for c in node.children), label=node.label)
            else:
                memo[key] = node
        return memo[key]

    return replace(tree, root=walk(tree.root))


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', r"\"") + '"'


def render_dot(tree: FaultTree) -> str:
    """Graphviz digraph: AND gates as boxes, OR gates as ellipses, events as circles."""
    ids = node_ids(tree.root)
    lines = [f"digraph {_quote(tree.top_label)} {{", "  rankdir=TB;",
             '  node [fontname="Helvetica"];']
    edges = []
    for node in iter_nodes(tree.root):
        nid = ids[id(node)]
        if isinstance(node, Gate):
            kind = "AND" if isinstance(node, AndGate) else "OR"
            shape = "box" if kind == "AND" else "ellipse"
            if is_false(node):
                kind = "FALSE"
            label = node.label if node is not tree.root else tree.top_label
            lines.append(f"  {nid} [shape={shape}, label={_quote(f'{kind}: {label}')}];")
            edges.extend(f"  {nid} -> {ids[id(c)]};" for c in node.children)
        elif isinstance(node, BasicEvent):
            lines.append(f"  {nid} [shape=circle, label={_quote(node.name)}];")
        elif isinstance(node, NominalGuard):
            lines.append(f"  {nid} [shape=house, style=dashed, label={_quote(node.name)}];")
        else:
            lines.append(f"  {nid} [shape=doublecircle, label=\"TRUE\"];")
    return "\n".join(lines + edges + ["}"]) + "\n"


def _sanitize(text: str) -> str:
    name = re.sub(r"[^A-Za-z0-9_]", "_", text)
    return name if name and not name[0].isdigit() else f"_{name}"


def render_galileo(tree: FaultTree, probs: Optional[Mapping[tuple[str, str], float]] = None,
                   nominal: Optional[Mapping[str, float]] = None) -> str:
    """Galileo text: a toplevel line, one line per gate, one line per leaf.

    Events get ``prob=`` when a probability is known (``probs`` first, then
    the tree). Nominal guards have no Galileo counterpart and are written as
    ordinary events named ``<instance>_nominal`` with the nominal-state
    probability from ``nominal`` when given.
    """
    probs = probs or {}
    nominal = nominal or {}
    ids = node_ids(tree.root)
    names: dict[int, str] = {}
    used: set[str] = set()

    def claim(base: str) -> str:
        name, n = base, 1
        while name in used:
            n += 1
            name = f"{base}_{n}"
        used.add(name)
        return name

    nodes = list(iter_nodes(tree.root))
    names[id(tree.root)] = claim(_sanitize(tree.top_label))
    for node in nodes:
        if id(node) in names:
            continue
        if isinstance(node, BasicEvent):
            names[id(node)] = claim(_sanitize(f"{node.instance}_{node.state}"))
        elif isinstance(node, NominalGuard):
            names[id(node)] = claim(_sanitize(f"{node.instance}_nominal"))
        else:
            names[id(node)] = claim(ids[id(node)])

    lines = [f"toplevel {_quote(names[id(tree.root)])};"]
    leaves = []
    for node in nodes:
        name = _quote(names[id(node)])
        if isinstance(node, Gate):
            if not node.children:
                leaves.append(f"{name} prob=0;")
                continue
            op = "and" if isinstance(node, AndGate) else "or"
            kids = " ".join(_quote(names[id(c)]) for c in node.children)
            lines.append(f"{name} {op} {kids};")
        elif isinstance(node, BasicEvent):
            p = probs.get((node.instance, node.state), node.probability)
            leaves.append(f"{name} prob={p!r};" if p is not None else f"{name};")
        elif isinstance(node, NominalGuard):
            p = nominal.get(node.instance)
            leaves.append(f"{name} prob={p!r};" if p is not None else f"{name};")
        else:
            leaves.append(f"{name} prob=1;")
    return "\n".join(lines + leaves) + "\n"


def cutsets_to_json(mcs, system: str, criterion: str) -> str:
    data = {"system": system, "criterion": criterion,
            "cut_sets": [c.names() for c in mcs]}
    return json.dumps(data, indent=2) + "\n"


def cutsets_from_json(text: str) -> CutSetCollection:
    data = json.loads(text)
    return CutSetCollection(
        [tuple(name.split(".", 1)) for name in names] for names in data["cut_sets"])
