"""HTTP job service: submit transfers, stream progress, fetch artifacts."""

from .jobs import Job, JobStore, JobState
from .app import create_app

__all__ = ["Job", "JobState", "JobStore", "create_app"]
