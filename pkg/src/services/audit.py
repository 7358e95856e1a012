"""Audit trail for simulator runs."""

import logging
import threading
from typing import Optional

from src.core.models import AuditEntry, OutcomeRecord

logger = logging.getLogger("qshi.audit")


class AuditService:
    """
    Records run-level events for the QSHI teleportation simulator.

    Logs actions on:
    - Runs: run_started
    - Outcomes: outcome_evaluated
    - Sweeps: sweep_point
    - Self-check: suite_finished
    - Rings: degenerate_ring

    Every entry goes to the ``qshi.audit`` logger with ``action`` and
    ``details`` attached as record attributes, and is kept in ``entries``.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self.entries: list[AuditEntry] = []

    def _record(self, entry: AuditEntry, level: int = logging.INFO) -> None:
        with self._lock:
            self.entries.append(entry)
        logger.log(
            level,
            "%s %s %s",
            entry.entity_type,
            entry.action,
            entry.details or {},
            extra={"action": entry.action, "details": entry.details},
        )

    def log_run_started(self, command: str, mode: str, source: Optional[str] = None) -> None:
        """Log the start of a run, sweep or self-check."""
        self._record(AuditEntry(
            action="run_started",
            entity_type="run",
            details={"command": command, "mode": mode, "source": source},
        ))

    def log_outcome_evaluated(self, record: OutcomeRecord) -> None:
        """Log one evaluated Bell outcome."""
        self._record(AuditEntry(
            action="outcome_evaluated",
            entity_type="outcome",
            details={
                "label": record.label.value,
                "probability": record.probability,
                "constraint_satisfied": record.constraint_satisfied,
                "congruence_satisfied": record.congruence_satisfied,
                "fidelity": record.fidelity,
            },
        ), level=logging.DEBUG)

    def log_sweep_point(self, param: str, value: float, status: str) -> None:
        """Log one evaluated sweep point."""
        self._record(AuditEntry(
            action="sweep_point",
            entity_type="sweep",
            details={"param": param, "value": value, "status": status},
        ), level=logging.DEBUG)

    def log_suite_finished(self, suite: str, passed: bool, samples: int, max_error: float) -> None:
        """Log a finished self-check suite."""
        self._record(AuditEntry(
            action="suite_finished",
            entity_type="suite",
            details={"suite": suite, "passed": passed, "samples": samples, "max_error": max_error},
        ), level=logging.INFO if passed else logging.WARNING)

    def log_degenerate_ring(self, ring: str, message: str) -> None:
        """Log a ring whose two-particle state vanishes."""
        self._record(AuditEntry(
            action="degenerate_ring",
            entity_type="ring",
            details={"ring": ring, "message": message},
        ), level=logging.WARNING)

    def entries_for(self, action: str) -> list[AuditEntry]:
        """Get recorded entries with a given action."""
        with self._lock:
            return [e for e in self.entries if e.action == action]

    def clear(self) -> None:
        with self._lock:
            self.entries.clear()


# Singleton instance
_audit_service: Optional[AuditService] = None


def get_audit_service() -> AuditService:
    """Get the singleton audit service instance."""
    global _audit_service
    if _audit_service is None:
        _audit_service = AuditService()
    return _audit_service
