import pytest

from ftsynth import corpus
from ftsynth.analysis import CutSetCollection
from ftsynth.dsl import parse_criterion, parse_model
from ftsynth.errors import CapExceededError, FtError
from ftsynth.model import Endpoint, failure_probabilities
from ftsynth.oracle import (check_equivalence, evaluate, exact_probability,
                            minimal_failure_scenarios, scenario_count)

OUT = Endpoint("CPU", "out")


@pytest.fixture(scope="module")
def bundle():
    return corpus.corpus_definitions()


def givens(value):
    return {Endpoint(f"FD{i}", "ir"): value for i in (1, 2, 3)}


def test_evaluate_examples(bundle):
    assert evaluate(bundle, "Variant1", {}, givens("IR_Present")) == {OUT: "CPU_Alarm"}
    assert evaluate(bundle, "Variant1", {}, givens("IR_Absent")) == {OUT: "CPU_NoAlarm"}
    assert evaluate(bundle, "Variant2", {}, givens("IR_Absent")) == {OUT: "CPU_NoAlarm"}
    assert evaluate(bundle, "Variant1", {"C1": "Open_Circuit"}, givens("IR_Present")) == {
        OUT: "CPU_Alarm"}
    assert evaluate(bundle, "Variant1", {"C1": "Open_Circuit"}, givens("IR_Absent")) == {
        OUT: "CPU_Alarm"}
    masked = {"FD1": "FalseAlarm", "CPU": "No_Output"}
    assert evaluate(bundle, "Variant1", masked, givens("IR_Absent")) == {OUT: "CPU_NoOutput"}


def test_unknown_state(bundle):
    with pytest.raises(FtError) as err:
        evaluate(bundle, "Variant1", {"C1": "Melted"}, givens("IR_Present"))
    assert err.value.code == "E_UNKNOWN_STATE"


def test_variant1_safety(bundle):
    r = minimal_failure_scenarios(bundle, "Variant1", corpus.criterion("Variant1_Safety"))
    assert [c.names() for c in r.minimal] == [["FD1.MissedAlarm", "FD2.MissedAlarm",
                                               "FD3.MissedAlarm"]]
    assert r.total == scenario_count(bundle.system("Variant1")) == 4**3 * 3**3 * 4
    assert not r.nominal_satisfies


def test_variant1_availability(bundle):
    r = minimal_failure_scenarios(bundle, "Variant1", corpus.criterion("Variant1_Availability"))
    expected = {frozenset({(f"FD{i}", s)}) for i in (1, 2, 3)
                for s in ("FalseAlarm", "Internal_Failure_Detected")}
    expected |= {frozenset({(f"C{i}", s)}) for i in (1, 2, 3)
                 for s in ("Open_Circuit", "Short_Circuit")}
    assert r.minimal.as_sets() == expected


def test_variant2_safety(bundle):
    r = minimal_failure_scenarios(bundle, "Variant2", corpus.criterion("Variant2_Safety"))
    channel = {i: {(f"FD{i}", "MissedAlarm"), (f"FD{i}", "Internal_Failure_Detected"),
                   (f"C{i}", "Open_Circuit"), (f"C{i}", "Short_Circuit")} for i in (1, 2, 3)}
    expected = {frozenset({a, b}) for i in (1, 2, 3) for j in (1, 2, 3) if i < j
                for a in channel[i] for b in channel[j]}
    assert r.minimal.as_sets() == expected
    assert len(expected) == 48


SINGLE = """
signal Detection { IR_Present, IR_Absent }
signal ChannelSignal { Alarm, NoAlarm, FaultDetected, NoSignal, ShortLevel }
component FireDetector {
    input ir: Detection
    output sig: ChannelSignal
    state Normal { sig = if ir == IR_Present then Alarm else NoAlarm }
    failure MissedAlarm prob 1e-4 { sig = NoAlarm }
    failure FalseAlarm prob 1e-4 { sig = Alarm }
    failure Internal_Failure_Detected prob 1e-4 { sig = FaultDetected }
}
system Lone {
    instance FD: FireDetector
    boundary_input FD.ir
    boundary_output FD.sig
}
"""


def single(require):
    b = parse_model(SINGLE)
    c = parse_criterion(f"criterion X {{ given FD.ir = IR_Present\n require FD.sig in {{ {require} }} }}")
    return b, c, failure_probabilities(b.system())


def test_single_detector_exact_probability():
    b, c, probs = single("NoAlarm")
    assert exact_probability(b, None, c, probs) == pytest.approx(1e-4, abs=1e-18)


def test_impossible_criterion_has_zero_probability():
    b, c, probs = single("ShortLevel")
    r = minimal_failure_scenarios(b, None, c, probs)
    assert r.exact_probability == 0 and r.minimal == () and r.satisfying == 0


def test_nominal_satisfies_probability():
    b, c, probs = single("Alarm")
    r = minimal_failure_scenarios(b, None, c, probs)
    assert r.nominal_satisfies
    assert r.exact_probability >= 1 - 3e-4
    assert r.exact_probability == pytest.approx(1 - 2e-4)


def test_missing_probability():
    b, c, _ = single("NoAlarm")
    with pytest.raises(FtError) as err:
        exact_probability(b, None, c, {})
    assert err.value.code == "E_MISSING_PROB"


def test_total_probability_mass(bundle):
    for entry in corpus.criteria():
        system = bundle.system(entry["system"])
        r = minimal_failure_scenarios(bundle, system.name, corpus.criterion(entry["name"]),
                                      failure_probabilities(system))
        assert abs(r.total_probability - 1.0) <= 1e-12


def test_state_space_cap(bundle):
    with pytest.raises(CapExceededError) as err:
        minimal_failure_scenarios(bundle, "Variant1", corpus.criterion("Variant1_Safety"),
                                  max_scenarios=100)
    assert err.value.code == "E_STATE_SPACE_TOO_LARGE"


def test_check_equivalence_reports_both_sides(bundle):
    r = minimal_failure_scenarios(bundle, "Variant1", corpus.criterion("Variant1_Safety"))
    same = check_equivalence(r.minimal, r)
    assert same.passed and str(same) == "PASS"
    missing = check_equivalence(CutSetCollection(), r)
    assert not missing.passed and missing.oracle_only == r.minimal and missing.tree_only == ()
    spurious = CutSetCollection(list(r.minimal) + [[("CPU", "No_Output")]])
    diff = check_equivalence(spurious, r)
    assert [str(c) for c in diff.tree_only] == ["{CPU.No_Output}"]
    assert str(diff).splitlines() == ["FAIL", "  tree-only:   {CPU.No_Output}"]
