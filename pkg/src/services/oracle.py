"""Independent validators for the teleportation protocol.

The textbook path expands the full three-spin state and projects it with
explicit index sums. It relies on the spin-state toolkit only, so a bug in
the protocol's closed-form brackets cannot hide here.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.models import BellLabel, JunctionAmplitudes, ProtocolReport, RingGeometry
from src.core.states import (
    ZERO_PROBABILITY,
    SpinState,
    fidelity,
    reduced_density,
    tensor,
    trace_distance,
)
from src.services.ring_model import (
    geometric_phases,
    two_particle_amplitudes_pathlength_form,
    two_particle_amplitudes_phase_form,
)

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

TEXTBOOK_CORRECTIONS = {
    BellLabel.PHI_PLUS: _I,
    BellLabel.PHI_MINUS: _Z,
    BellLabel.PSI_PLUS: _X,
    BellLabel.PSI_MINUS: _Z @ _X,
}

# Bell state amplitudes over (↑↑, ↑↓, ↓↑, ↓↓), before the 1/√2
_BELL_VECTORS = {
    BellLabel.PHI_PLUS: (1, 0, 0, 1),
    BellLabel.PHI_MINUS: (1, 0, 0, -1),
    BellLabel.PSI_PLUS: (0, 1, 1, 0),
    BellLabel.PSI_MINUS: (0, 1, -1, 0),
}


@dataclass
class OracleRecord:
    """Textbook result for one Bell outcome."""
    label: BellLabel
    probability: float
    corrected: SpinState

    @property
    def reachable(self) -> bool:
        return self.probability >= ZERO_PROBABILITY


def pauli_frame_for(label: BellLabel) -> np.ndarray:
    """Frame U with (I ⊗ U)Φ+ equal to the given Bell state."""
    return {
        BellLabel.PHI_PLUS: _I,
        BellLabel.PHI_MINUS: _Z,
        BellLabel.PSI_PLUS: _X,
        BellLabel.PSI_MINUS: _X @ _Z,
    }[label]


def textbook_teleport(
    qubit: SpinState,
    channel: SpinState,
    channel_frame: Optional[np.ndarray] = None,
    corrections: Optional[dict] = None,
) -> list[OracleRecord]:
    """
    Standard teleportation by brute-force expansion.

    Args:
        qubit: Alice's normalized qubit
        channel: Normalized two-spin channel
        channel_frame: U such that channel = (I ⊗ U)Φ+ (identity when omitted)
        corrections: Label to 2x2 correction map (textbook Pauli set when omitted)

    Returns:
        One OracleRecord per Bell outcome, corrected state C_X U⁻¹ raw_X
    """
    frame = _I if channel_frame is None else np.asarray(channel_frame, dtype=complex)
    frame_inverse = np.linalg.inv(frame)
    table = TEXTBOOK_CORRECTIONS if corrections is None else corrections
    psi = tensor(qubit, channel).amplitudes

    records = []
    for label, vector in _BELL_VECTORS.items():
        residual = np.zeros(2, dtype=complex)
        for s0 in range(2):
            for s1 in range(2):
                weight = vector[2 * s0 + s1] / math.sqrt(2)
                if weight == 0:
                    continue
                for s2 in range(2):
                    residual[s2] += weight * psi[4 * s0 + 2 * s1 + s2]
        probability = float(np.sum(np.abs(residual) ** 2))
        if probability < ZERO_PROBABILITY:
            corrected = SpinState(np.zeros(2, dtype=complex))
        else:
            corrected = SpinState(table[label] @ frame_inverse @ (residual / math.sqrt(probability)))
        records.append(OracleRecord(label=label, probability=probability, corrected=corrected))
    return records


def run_discrepancy(report: ProtocolReport, records: list[OracleRecord]) -> float:
    """
    Largest disagreement between a protocol report and oracle records.

    Probability differences count for every outcome; state infidelity only for
    outcomes reachable on both sides.
    """
    by_label = {r.label: r for r in records}
    worst = 0.0
    for outcome in report.outcomes:
        record = by_label[outcome.label]
        worst = max(worst, abs(outcome.probability - record.probability))
        if outcome.fidelity is None or not record.reachable or outcome.bob_final.is_zero:
            continue
        worst = max(worst, 1.0 - fidelity(outcome.bob_final.normalized(), record.corrected.normalized()))
    return worst


def compare_runs(report: ProtocolReport, records: list[OracleRecord], tol: float) -> bool:
    """True iff probabilities and corrected states agree within tol."""
    return run_discrepancy(report, records) <= tol


def no_signaling_distance(qubit_a: SpinState, qubit_b: SpinState, channel: SpinState) -> float:
    """Trace distance between Bob's pre-measurement states for two different Alice qubits."""
    rho_a = reduced_density(tensor(qubit_a, channel), [2])
    rho_b = reduced_density(tensor(qubit_b, channel), [2])
    return trace_distance(rho_a, rho_b)


def formulation_gap(
    junctions: tuple[JunctionAmplitudes, JunctionAmplitudes],
    k: float,
    geometry: RingGeometry,
) -> float:
    """Largest elementwise gap between the phase and path-length amplitude forms."""
    phase_form = two_particle_amplitudes_phase_form(junctions, geometric_phases(k, geometry))
    path_form = two_particle_amplitudes_pathlength_form(junctions, k, geometry)
    return float(np.max(np.abs(phase_form.vector - path_form.vector)))
