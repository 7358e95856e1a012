"""Parameter sweeps over one real-valued config leaf."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from src.core.errors import DegenerateStateError
from src.core.models import BellLabel, RunConfig, SweepRow, SweepSpec, SweepStatus
from src.services.audit import get_audit_service
from src.services.config import set_parameter
from src.services.protocol import resolve_design_row, run_protocol

logger = logging.getLogger(__name__)


class SweepService:
    """
    Evaluates the protocol at every point of a linear sweep.

    Points run on a thread pool; rows come back ordered by point index and
    then by outcome, independent of completion order.
    """

    def __init__(self, audit_service=None):
        if audit_service is None:
            audit_service = get_audit_service()
        self._audit = audit_service

    @staticmethod
    def pinned_design_row(config: RunConfig) -> BellLabel:
        """Design row of the unswept ring B, used for every point."""
        ring_b = config.ring_b
        return ring_b.design_row or resolve_design_row(ring_b.junctions, config.tol)

    def evaluate_point(self, config: RunConfig, spec: SweepSpec, value: float, design_row: BellLabel) -> list[SweepRow]:
        """Four rows (one per outcome) for a single sweep value."""
        point = set_parameter(config, spec.param, value)

        junctions = point.ring_a.junctions + point.ring_b.junctions
        if not all(j.is_unitary() for j in junctions):
            self._audit.log_sweep_point(spec.param, value, SweepStatus.NON_UNITARY.value)
            return [SweepRow(spec.param, value, label, SweepStatus.NON_UNITARY) for label in BellLabel]

        try:
            report = run_protocol(
                point.ring_a, point.ring_b, point.qubit_choice, point.mode, point.tol,
                design_row, self._audit,
            )
        except DegenerateStateError as e:
            logger.info("Sweep %s=%.15g degenerate: %s", spec.param, value, e)
            self._audit.log_sweep_point(spec.param, value, SweepStatus.DEGENERATE.value)
            return [SweepRow(spec.param, value, label, SweepStatus.DEGENERATE) for label in BellLabel]

        rows = []
        for record in report.outcomes:
            status = SweepStatus.OK if record.reachable else SweepStatus.UNREACHABLE
            rows.append(SweepRow(
                param=spec.param,
                value=value,
                outcome=record.label,
                status=status,
                probability=record.probability,
                fidelity=record.fidelity,
                concurrence=report.channel_concurrence,
            ))
        self._audit.log_sweep_point(spec.param, value, SweepStatus.OK.value)
        return rows

    def run(self, config: RunConfig, spec: Optional[SweepSpec] = None) -> list[SweepRow]:
        """
        Run the configured sweep.

        Raises:
            ValueError: If no sweep is given or configured
        """
        spec = spec or config.sweep
        if spec is None:
            raise ValueError("Config has no sweep section")

        design_row = self.pinned_design_row(config)
        values = spec.values()
        logger.info(
            "Sweeping %s over %d points with %d worker(s), design row %s",
            spec.param, len(values), config.workers, design_row.value,
        )
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            point_rows = executor.map(
                lambda v: self.evaluate_point(config, spec, v, design_row), values
            )
            return [row for rows in point_rows for row in rows]


# Singleton instance
_sweep_service: Optional[SweepService] = None


def get_sweep_service() -> SweepService:
    """Get the singleton sweep service instance."""
    global _sweep_service
    if _sweep_service is None:
        _sweep_service = SweepService()
    return _sweep_service
