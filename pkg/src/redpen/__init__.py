"""redpen: rubric-aligned essay feedback drafting, grading, and analytics."""

from __future__ import annotations

__version__ = "0.1.0"

from .domain import Assignment, Condition, EssayDraft, RubricItem, Stage

__all__ = [
    "Assignment",
    "Condition",
    "EssayDraft",
    "RubricItem",
    "Stage",
    "__version__",
]
