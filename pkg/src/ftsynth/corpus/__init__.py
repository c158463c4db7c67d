"""The fire detection case study shipped as package data.

``fire_detection/manifest.json`` lists the model file, the four criterion
files with the system each applies to, the golden cut-set file for each and
the diagnostics expected when validating (none).
"""

from __future__ import annotations

import json
from pathlib import Path

from ..dsl import load_criterion, load_model
from ..model import FailureCriterion, ModelBundle

ROOT = Path(__file__).resolve().parent / "fire_detection"


def manifest() -> dict:
    return json.loads((ROOT / "manifest.json").read_text(encoding="utf-8"))


def path(name: str) -> Path:
    return ROOT / name


def corpus_definitions() -> ModelBundle:
    """Parsed and linked corpus model (both CPU variants)."""
    return load_model(*(ROOT / m for m in manifest()["models"]))


def criteria() -> list[dict]:
    """Manifest entries: ``name``, ``system``, ``file``, ``golden``."""
    return manifest()["criteria"]


def criterion(name: str) -> FailureCriterion:
    for entry in criteria():
        if entry["name"] == name:
            return load_criterion(ROOT / entry["file"])
    raise KeyError(name)
