"""Diagnostics shared by the parser, the validator, and the CLI."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class SourceSpan:
    """1-based source location, start <= end in document order."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"


@dataclass
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: SourceSpan | None = None
    element: int | None = None

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def render(self) -> str:
        loc = str(self.span) if self.span else "<model>"
        return f"{loc}: {self.severity.value}[{self.code}] {self.message}"


def sort_key(diag: Diagnostic) -> tuple:
    if diag.span is None:
        return ("", 0, 0, diag.code)
    return (diag.span.file, diag.span.start_line, diag.span.start_col, diag.code)


def sorted_diagnostics(diags: list[Diagnostic]) -> list[Diagnostic]:
    """Deterministic order: by file, span, then rule code."""
    return sorted(diags, key=sort_key)


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)
