import random

import pytest

from ftsynth import corpus, export_json
from ftsynth.analysis import minimal_cut_sets
from ftsynth.dsl import parse_criterion, parse_model
from ftsynth.errors import FtError
from ftsynth.oracle import minimal_failure_scenarios
from ftsynth.synthesis import CauseKey, _Builder, generate_fault_tree, simplify_tree
from ftsynth.tree import (FALSE, TRUE, AndGate, BasicEvent, FaultTree, NominalGuard, OrGate,
                          basic_events, iter_nodes)

from randgen import random_criterion, random_system


@pytest.fixture(scope="module")
def bundle():
    return corpus.corpus_definitions()


def tree_for(bundle, name, **kw):
    entry = next(e for e in corpus.criteria() if e["name"] == name)
    return generate_fault_tree(bundle, entry["system"], corpus.criterion(name), **kw)


def ev(i, s):
    return BasicEvent(i, s)


def test_variant1_safety_structure(bundle):
    t = tree_for(bundle, "Variant1_Safety")
    assert t.root == AndGate((ev("FD1", "MissedAlarm"), ev("FD2", "MissedAlarm"),
                              ev("FD3", "MissedAlarm")))
    assert t.root.label == "Variant1_Safety"
    assert t.diagnostics == ()


def test_variant2_safety_is_or_of_three_ands(bundle):
    t = tree_for(bundle, "Variant2_Safety")
    assert isinstance(t.root, OrGate) and len(t.root.children) == 3
    assert all(isinstance(c, AndGate) and len(c.children) == 2 for c in t.root.children)
    channels = {id(ch) for a in t.root.children for ch in a.children}
    assert len(channels) == 3  # each channel condition is one shared node
    for a in t.root.children:
        insts = [{e.instance[-1] for e in basic_events(ch)} for ch in a.children]
        assert all(len(s) == 1 for s in insts) and insts[0] != insts[1]


def test_variant1_availability_events(bundle):
    names = {e.name for e in basic_events(tree_for(bundle, "Variant1_Availability").root)}
    assert not any(n.startswith("CPU.") for n in names)
    assert not any(n.endswith("MissedAlarm") for n in names)
    assert len(names) == 12


def test_corpus_trees_have_no_guards_or_true(bundle):
    for entry in corpus.criteria():
        t = tree_for(bundle, entry["name"])
        for node in iter_nodes(t.root):
            assert not isinstance(node, (NominalGuard, type(TRUE)))
            if isinstance(node, (AndGate, OrGate)):
                assert len(node.children) >= 2


def test_no_nominal_state_events(bundle):
    for entry in corpus.criteria():
        system = bundle.system(entry["system"])
        for e in basic_events(tree_for(bundle, entry["name"]).root):
            assert system.instances[e.instance].state(e.state).is_failure


def test_cause_examples(bundle):
    s = bundle.system("Variant1")
    b = _Builder(s, corpus.criterion("Variant1_Safety"))
    fd1 = simplify_tree(b.cause(CauseKey("FD1", "sig", ("FaultDetected",))))
    assert fd1 == ev("FD1", "Internal_Failure_Detected")
    c1 = simplify_tree(b.cause(CauseKey("C1", "out", ("NoAlarm",))))
    assert c1 == ev("FD1", "MissedAlarm")
    cpu = b.cause(CauseKey("CPU", "out", ("CPU_NoAlarm",)))
    assert simplify_tree(cpu) == AndGate(tuple(ev(f"FD{i}", "MissedAlarm") for i in (1, 2, 3)))
    # memoized: asking again returns the same object
    assert b.cause(CauseKey("C1", "out", ("NoAlarm",))) is b.cause(CauseKey("C1", "out", ("NoAlarm",)))


def test_simplify_examples():
    e1, e2, e3 = ev("A", "f"), ev("B", "f"), ev("C", "f")
    assert simplify_tree(AndGate((e1, TRUE))) == e1
    assert simplify_tree(OrGate((AndGate((e1,)), AndGate((e1,))))) == e1
    assert simplify_tree(OrGate((OrGate((e1, e2)), e3))) == OrGate((e1, e2, e3))
    assert simplify_tree(OrGate((e1, TRUE))) == TRUE
    assert simplify_tree(AndGate((e1, FALSE))) == FALSE
    assert simplify_tree(OrGate((e1, FALSE))) == e1
    assert simplify_tree(AndGate((TRUE, TRUE))) == TRUE


def test_simplify_shares_equal_subtrees():
    e1, e2 = ev("A", "f"), ev("B", "f")
    t = simplify_tree(AndGate((OrGate((e1, e2)), ev("C", "f"), OrGate((AndGate((e1,)), e2)))))
    # the two ORs become equal and deduplicate
    assert t == AndGate((OrGate((e1, e2)), ev("C", "f")))
    t = simplify_tree(OrGate((AndGate((OrGate((e1, e2)), ev("C", "f"))),
                              AndGate((OrGate((e1, e2)), ev("D", "f"))))))
    assert t.children[0].children[0] is t.children[1].children[0]


def test_simplify_keeps_tree_wrapper(bundle):
    t = tree_for(bundle, "Variant1_Safety")
    again = simplify_tree(t)
    assert isinstance(again, FaultTree) and again.root == t.root


FANOUT = """
signal Level { Hi, Lo }
component Source {
    output out: Level
    state Ok { out = Hi }
    failure Weak prob 0.1 { out = Lo }
}
component Relay {
    input in: Level
    output out: Level
    state Ok { out = in }
    failure Stuck prob 0.1 { out = Lo }
}
system Split {
    instance S: Source
    instance R1: Relay
    instance R2: Relay
    connect S.out -> R1.in
    connect S.out -> R2.in
    boundary_output R1.out
    boundary_output R2.out
}
"""


def test_fanout_needs_nominal_guard():
    b = parse_model(FANOUT)
    crit = parse_criterion("criterion Split_Mixed { require R1.out in { Lo }\n"
                           " require R2.out in { Hi } }")
    t = generate_fault_tree(b, "Split", crit, prune=False)
    assert any(isinstance(n, NominalGuard) for n in iter_nodes(t.root))
    mcs = minimal_cut_sets(t)
    assert [c.names() for c in mcs] == [["R1.Stuck"]]
    assert mcs == minimal_failure_scenarios(b, "Split", crit).minimal
    # pruning drops S.Weak, which only appeared in a contradictory product
    pruned = generate_fault_tree(b, "Split", crit)
    assert pruned.root == ev("R1", "Stuck")


def test_fanout_shared_event_builds_dag():
    b = parse_model(FANOUT)
    crit = parse_criterion("criterion Split_Low { require R1.out in { Lo }\n"
                           " require R2.out in { Lo } }")
    t = generate_fault_tree(b, "Split", crit)
    weak = [n for n in iter_nodes(t.root) if n == ev("S", "Weak")]
    assert len(weak) == 1
    assert [c.names() for c in minimal_cut_sets(t)] == [["S.Weak"], ["R1.Stuck", "R2.Stuck"]]


def test_nominal_satisfies_warning(bundle):
    crit = parse_criterion("""criterion Alarm { given FD1.ir = IR_Present
        given FD2.ir = IR_Present given FD3.ir = IR_Present require CPU.out in { CPU_Alarm } }""")
    t = generate_fault_tree(bundle, "Variant1", crit)
    assert t.nominal_satisfies
    assert [d.code for d in t.diagnostics] == ["W_NOMINAL_SATISFIES"]


def test_unreachable_requirement_gives_false():
    b = parse_model(FANOUT.replace("signal Level { Hi, Lo }", "signal Level { Hi, Lo, Mid }"))
    crit = parse_criterion("criterion Never { require R1.out in { Mid } }")
    t = generate_fault_tree(b, "Split", crit)
    assert t.root == FALSE and not t.nominal_satisfies
    assert minimal_cut_sets(t) == () == minimal_failure_scenarios(b, "Split", crit).minimal


def test_invalid_inputs_raise(bundle):
    bad = parse_criterion("criterion X { require C1.out in { NoAlarm } }")
    with pytest.raises(FtError) as err:
        generate_fault_tree(bundle, "Variant1", bad)
    assert "E_NOT_BOUNDARY" in err.value.codes and "E_UNBOUND_INPUT" in err.value.codes


def test_determinism(bundle):
    for entry in corpus.criteria():
        a = export_json(tree_for(bundle, entry["name"]))
        b = export_json(tree_for(corpus.corpus_definitions(), entry["name"]))
        assert a == b


@pytest.mark.parametrize("seed", range(60))
def test_random_models_pruning_sound(seed):
    rng = random.Random(10_000 + seed)
    b = random_system(rng)
    crit = random_criterion(rng, b, "C")
    t = generate_fault_tree(b, "S", crit)
    report = minimal_failure_scenarios(b, "S", crit)
    if report.nominal_satisfies:
        assert t.nominal_satisfies
        return
    live = report.minimal.events()
    assert {(e.instance, e.state) for e in basic_events(t.root)} <= live
    assert minimal_cut_sets(t) == report.minimal
