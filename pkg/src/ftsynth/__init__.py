"""Fault-tree synthesis from component state-machine models.

Typical use::

    from ftsynth import corpus, generate_fault_tree, minimal_cut_sets
    bundle = corpus.corpus_definitions()
    tree = generate_fault_tree(bundle, "Variant1", corpus.criterion("Variant1_Safety"))
    print(minimal_cut_sets(tree))
"""

from .analysis import (CutSet, CutSetCollection, Quantification, isolated_probability,
                       minimal_cut_sets, quantify)
from .dsl import (format_bundle, format_criterion, load_criterion, load_model, parse_criterion,
                  parse_model)
from .errors import CapExceededError, Diagnostic, DslError, FtError, Location, ValidationReport
from .model import (Endpoint, FailureCriterion, ModelBundle, SystemModel, failure_probabilities,
                    nominal_probabilities, topological_order, validate_component, validate_system)
from .oracle import check_equivalence, exact_probability, minimal_failure_scenarios
from .render import export_json, import_json, render_dot, render_galileo
from .synthesis import generate_fault_tree, simplify_tree
from .tree import AndGate, BasicEvent, FaultTree, NominalGuard, OrGate

__version__ = "0.1.0"

__all__ = [
    "AndGate", "BasicEvent", "CapExceededError", "CutSet", "CutSetCollection", "Diagnostic",
    "DslError", "Endpoint", "FailureCriterion", "FaultTree", "FtError", "Location", "ModelBundle",
    "NominalGuard", "OrGate", "Quantification", "SystemModel", "ValidationReport",
    "check_equivalence", "exact_probability", "export_json", "failure_probabilities",
    "format_bundle", "format_criterion", "generate_fault_tree", "import_json",
    "isolated_probability", "load_criterion", "load_model", "minimal_cut_sets",
    "minimal_failure_scenarios", "nominal_probabilities", "parse_criterion", "parse_model",
    "quantify", "render_dot", "render_galileo", "simplify_tree", "topological_order",
    "validate_component", "validate_system",
]
