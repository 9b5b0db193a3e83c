"""Grading service: state store, session workflow, HTTP app, LMS export."""

from .core import ExportComment, FeedbackExport, GradingService
from .store import DocumentStore

__all__ = ["DocumentStore", "ExportComment", "FeedbackExport", "GradingService"]
