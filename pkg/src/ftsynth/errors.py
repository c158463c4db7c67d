"""Diagnostics and exception types shared by every module."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional


@dataclass(frozen=True)
class Location:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    location: Optional[Location] = None

    def __str__(self) -> str:
        where = f"{self.location}: " if self.location else ""
        return f"{where}{self.severity}: {self.code}: {self.message}"


def error(code: str, message: str, location: Optional[Location] = None) -> Diagnostic:
    return Diagnostic("error", code, message, location)


def warning(code: str, message: str, location: Optional[Location] = None) -> Diagnostic:
    return Diagnostic("warning", code, message, location)


class ValidationReport(tuple):
    """An immutable sequence of diagnostics; empty means valid."""

    def __new__(cls, diagnostics: Iterable[Diagnostic] = ()):
        return super().__new__(cls, diagnostics)

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self)

    @property
    def codes(self) -> list[str]:
        return [d.code for d in self]

    def __add__(self, other):
        return ValidationReport(tuple(self) + tuple(other))


class FtError(Exception):
    """Raised when an operation cannot proceed; carries one or more diagnostics."""

    def __init__(self, code_or_diagnostics, message: str = ""):
        if isinstance(code_or_diagnostics, str):
            diags = (error(code_or_diagnostics, message),)
        else:
            diags = tuple(code_or_diagnostics)
        self.diagnostics = ValidationReport(diags)
        super().__init__("\n".join(str(d) for d in diags))

    @property
    def code(self) -> str:
        return self.diagnostics[0].code

    @property
    def codes(self) -> list[str]:
        return self.diagnostics.codes


class DslError(FtError):
    """Parse, link, or import failure in a model or criterion file."""


class CapExceededError(FtError):
    """A configured enumeration cap was exceeded; never silently truncated."""
