"""Invariant suites run by the ``selfcheck`` command."""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from src.core.models import Mode
from src.core.states import EXACT_TOL, random_state
from src.services.audit import get_audit_service
from src.services.oracle import (
    formulation_gap,
    no_signaling_distance,
    run_discrepancy,
    textbook_teleport,
)
from src.services.protocol import teleport_qubit
from src.services.ring_model import (
    beam_splitter_ring,
    geometric_phases,
    phase_identity_errors,
    random_geometry,
    random_junction,
    reduced_scattering_matrix,
)

logger = logging.getLogger(__name__)

DEFAULT_SEED = 42
DEFAULT_SAMPLES = 1000
DEFAULT_TOL = EXACT_TOL

# Edge momentum range for randomized suites (radians per nm)
K_RANGE = 1.0


@dataclass(frozen=True)
class SuiteResult:
    """Outcome of one invariant suite."""
    name: str
    passed: bool
    samples: int
    max_error: float

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.name}: {verdict} ({self.samples} samples, max error {self.max_error:.3g})"


class SelfCheckService:
    """
    Randomized invariant checks with fixed seeds.

    Each suite reports the largest error seen and passes only when that error
    is strictly below the tolerance.
    """

    SUITES = (
        "unitarity",
        "phase_identities",
        "formulation_equivalence",
        "oracle_comparison",
        "no_signaling",
    )

    def __init__(
        self,
        seed: int = DEFAULT_SEED,
        samples: int = DEFAULT_SAMPLES,
        tol: float = DEFAULT_TOL,
        audit_service=None,
    ):
        if samples < 1:
            raise ValueError(f"samples must be at least 1, got {samples}")
        self.seed = seed
        self.samples = samples
        self.tol = tol
        self._audit = audit_service or get_audit_service()

    def _rngs(self) -> dict[str, np.random.Generator]:
        children = np.random.SeedSequence(self.seed).spawn(len(self.SUITES))
        return {name: np.random.default_rng(child) for name, child in zip(self.SUITES, children)}

    def _max_error(self, sample: Callable[[], float]) -> float:
        return max(sample() for _ in range(self.samples))

    def check_unitarity(self, rng: np.random.Generator) -> float:
        """Column norms of the reduced scattering matrix."""
        def sample() -> float:
            junctions = (random_junction(rng), random_junction(rng))
            phases = geometric_phases(rng.uniform(-K_RANGE, K_RANGE), random_geometry(rng))
            norms = reduced_scattering_matrix(junctions, phases).column_norms
            return max(abs(n - 1.0) for n in norms)
        return self._max_error(sample)

    def check_phase_identities(self, rng: np.random.Generator) -> float:
        def sample() -> float:
            return max(phase_identity_errors(rng.uniform(-np.pi, np.pi), random_geometry(rng)))
        return self._max_error(sample)

    def check_formulation_equivalence(self, rng: np.random.Generator) -> float:
        def sample() -> float:
            junctions = (random_junction(rng), random_junction(rng))
            return formulation_gap(junctions, rng.uniform(-K_RANGE, K_RANGE), random_geometry(rng))
        return self._max_error(sample)

    def check_oracle_comparison(self, rng: np.random.Generator) -> float:
        """ConstraintMode over a Φ+ channel against textbook teleportation."""
        ring_b = beam_splitter_ring()

        def sample() -> float:
            qubit = random_state(rng, 1)
            report = teleport_qubit(qubit, ring_b, Mode.CONSTRAINT)
            return run_discrepancy(report, textbook_teleport(report.qubit, report.channel))
        return self._max_error(sample)

    def check_no_signaling(self, rng: np.random.Generator) -> float:
        def sample() -> float:
            channel = random_state(rng, 2)
            return no_signaling_distance(random_state(rng, 1), random_state(rng, 1), channel)
        return self._max_error(sample)

    def run(self, suites: Optional[list[str]] = None) -> list[SuiteResult]:
        """Run the selected suites (all by default) in fixed order."""
        selected = suites or list(self.SUITES)
        unknown = [s for s in selected if s not in self.SUITES]
        if unknown:
            raise ValueError(f"Unknown suite(s): {', '.join(unknown)}")

        rngs = self._rngs()
        results = []
        for name in self.SUITES:
            if name not in selected:
                continue
            check = getattr(self, f"check_{name}")
            max_error = float(check(rngs[name]))
            result = SuiteResult(name, max_error < self.tol, self.samples, max_error)
            self._audit.log_suite_finished(name, result.passed, result.samples, result.max_error)
            logger.info(result.summary())
            results.append(result)
        return results
