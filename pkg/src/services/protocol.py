"""Teleportation protocol between two QSHI rings.

Ring A filters Alice's qubit, ring B supplies the entangled channel, the
joint detector projects modes (1A, 1B) onto the Bell basis and Bob turns
mode 2B into the teleported qubit. Subsystem order of the total state is
(1A, 1B, 2B).
"""

import logging
import math
import sys
from typing import Optional

import numpy as np

from src.core.errors import (
    ConstraintViolationError,
    DegenerateStateError,
    DimensionError,
    ZeroProbabilityError,
)
from src.core.models import (
    BellLabel,
    BellOutcome,
    Congruence,
    FeedForwardConstraints,
    JunctionAmplitudes,
    Mode,
    OutcomeRecord,
    PhaseSet,
    ProtocolReport,
    QubitChoice,
    Relation,
    RingAmplitudes,
    RingConfig,
    RunConfig,
)
from src.core.states import (
    ZERO_PROBABILITY,
    SpinState,
    apply_operator,
    basis_state,
    concurrence,
    fidelity,
    project,
    tensor,
)
from src.services.audit import get_audit_service
from src.services.ring_model import (
    normalize_amplitudes,
    ring_amplitudes,
    ring_phases,
    two_particle_amplitudes_phase_form,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
PHASE_ROUNDING = 8 * sys.float_info.epsilon
SQRT_HALF = 1 / math.sqrt(2)

BELL_LABELS = tuple(BellLabel)

# Corrections applied to Bob's normalized raw state for an ideal Φ+ channel
CORRECTIONS = {
    BellLabel.PHI_PLUS: np.eye(2, dtype=complex),
    BellLabel.PHI_MINUS: np.diag([1, -1]).astype(complex),
    BellLabel.PSI_PLUS: np.array([[0, 1], [1, 0]], dtype=complex),
    BellLabel.PSI_MINUS: np.diag([1, -1]).astype(complex) @ np.array([[0, 1], [1, 0]], dtype=complex),
}

FEED_FORWARD_TABLE = {
    BellLabel.PHI_PLUS: FeedForwardConstraints(
        BellLabel.PHI_PLUS, Relation.CONJUGATE_PLUS, Relation.ZERO, Congruence.CG1),
    BellLabel.PHI_MINUS: FeedForwardConstraints(
        BellLabel.PHI_MINUS, Relation.CONJUGATE_MINUS, Relation.ZERO, Congruence.CG1),
    BellLabel.PSI_PLUS: FeedForwardConstraints(
        BellLabel.PSI_PLUS, Relation.ZERO, Relation.CONJUGATE_PLUS, Congruence.CG2),
    BellLabel.PSI_MINUS: FeedForwardConstraints(
        BellLabel.PSI_MINUS, Relation.ZERO, Relation.CONJUGATE_MINUS, Congruence.CG2),
}

# Coincidence detector pairs (1A, 1B) for each Bell state, "u" = ↑̃, "d" = ↓̃
COINCIDENCE_PAIRS = {
    BellLabel.PHI_PLUS: ("u", "u"),
    BellLabel.PHI_MINUS: ("d", "d"),
    BellLabel.PSI_PLUS: ("u", "d"),
    BellLabel.PSI_MINUS: ("d", "u"),
}


# =============================================================================
# States
# =============================================================================

def generate_qubit(ring_a: RingAmplitudes, choice: QubitChoice) -> tuple[SpinState, float]:
    """
    Filter Alice's qubit out of ring A by detecting the chosen spin at D2A.

    Args:
        ring_a: Normalized ring-A amplitudes
        choice: Spin registered at D2A

    Returns:
        Tuple of (normalized qubit, D2A outcome probability)

    Raises:
        DegenerateStateError: If the selected outcome is impossible
    """
    if choice == QubitChoice.UP:
        column = SpinState(np.array([ring_a.uu, ring_a.du]))
    else:
        column = SpinState(np.array([ring_a.ud, ring_a.dd]))
    probability = column.norm_squared
    if probability < ZERO_PROBABILITY:
        raise DegenerateStateError(f"D2A outcome '{choice.value}' has zero probability")
    return column.normalized(), probability


def total_state(qubit: SpinState, channel: SpinState) -> SpinState:
    """Three-spin state qubit ⊗ channel over (1A, 1B, 2B)."""
    if qubit.size != 2 or channel.size != 4:
        raise DimensionError(
            f"total_state needs a 1-spin qubit and a 2-spin channel, got {qubit.n_spins} and {channel.n_spins}"
        )
    return tensor(qubit, channel)


def bell_basis() -> dict[BellLabel, SpinState]:
    """The four Bell states in report order."""
    uu, ud, du, dd = (basis_state(s).amplitudes for s in ("uu", "ud", "du", "dd"))
    return {
        BellLabel.PHI_PLUS: SpinState((uu + dd) * SQRT_HALF),
        BellLabel.PHI_MINUS: SpinState((uu - dd) * SQRT_HALF),
        BellLabel.PSI_PLUS: SpinState((ud + du) * SQRT_HALF),
        BellLabel.PSI_MINUS: SpinState((ud - du) * SQRT_HALF),
    }


def coincidence_frame(label: BellLabel) -> SpinState:
    """Computational-basis expansion of the coincidence detection pair for a Bell state."""
    first, second = COINCIDENCE_PAIRS[label]
    sign = 1 if first == "u" else -1
    if first == second:
        amps = basis_state("uu").amplitudes + sign * basis_state("dd").amplitudes
    else:
        amps = basis_state("ud").amplitudes + sign * basis_state("du").amplitudes
    return SpinState(amps * SQRT_HALF)


def coincidence_label(label: BellLabel) -> str:
    """Readable coincidence pair, e.g. ``↑̃↓̃`` for Ψ+."""
    arrows = {"u": "↑̃", "d": "↓̃"}
    return "".join(arrows[s] for s in COINCIDENCE_PAIRS[label])


def bell_bracket(qubit: SpinState, channel: SpinState, label: BellLabel) -> SpinState:
    """
    Bob's unnormalized mode-2B state after projecting (1A, 1B) onto a Bell state.

    With q the qubit and B the channel amplitudes, the Φ± branches give
    (q↑ B↑σ ± q↓ B↓σ)/√2 and the Ψ± branches (q↑ B↓σ ± q↓ B↑σ)/√2.
    """
    q_up, q_down = qubit.amplitudes
    b = channel.amplitudes.reshape(2, 2)
    sign = label.sign
    if label.is_phi:
        amps = q_up * b[0] + sign * q_down * b[1]
    else:
        amps = q_up * b[1] + sign * q_down * b[0]
    return SpinState(amps * SQRT_HALF)


def bell_measure(total: SpinState) -> list[BellOutcome]:
    """Project modes (1A, 1B) of the total state onto each Bell state."""
    outcomes = []
    for label, bell in bell_basis().items():
        probability, residual = project(total, bell, (0, 1))
        outcomes.append(BellOutcome(label=label, probability=probability, bob_state_raw=residual))
    return outcomes


# =============================================================================
# Feed-forward
# =============================================================================

def feed_forward_constraints(label: BellLabel) -> FeedForwardConstraints:
    """Junction relations and congruence Bob needs for an outcome."""
    return FEED_FORWARD_TABLE[label]


def _relation_holds(rule: Relation, a: complex, b: complex, tol: float) -> bool:
    if rule == Relation.ZERO:
        return abs(a) <= tol and abs(b) <= tol
    sign = 1 if rule == Relation.CONJUGATE_PLUS else -1
    return abs(b - sign * a.conjugate()) <= tol


def check_constraints(
    junctions: tuple[JunctionAmplitudes, JunctionAmplitudes],
    label: BellLabel,
    tol: float = DEFAULT_TOL,
) -> bool:
    """True iff the ring-B junction pair satisfies the outcome's row within tol."""
    a, b = junctions
    row = feed_forward_constraints(label)
    return (
        abs(a.t - b.t.conjugate()) <= tol
        and _relation_holds(row.flip_rule, a.f, b.f, tol)
        and _relation_holds(row.preserve_rule, a.p, b.p, tol)
    )


def congruence_distance(phases: PhaseSet, which: Congruence) -> tuple[float, float]:
    """
    Distance of a congruence from holding, modulo 2π.

    Returns:
        Tuple of (wrapped distance in [0, π], magnitude of the compared phases)
    """
    if which == Congruence.CG1:
        lhs, rhs = phases.phi12 + phases.phi456, phases.phi34 + phases.phi167
    else:
        lhs, rhs = phases.phi15 + phases.phi34, phases.phi12 + phases.phi47
    d = math.fmod(abs(lhs - rhs), 2 * math.pi)
    return min(d, 2 * math.pi - d), max(abs(lhs), abs(rhs))


def check_congruence(phases: PhaseSet, which: Congruence, tol: float = DEFAULT_TOL) -> bool:
    """True iff the congruence holds modulo 2π within tol, plus rounding of the phase sums."""
    distance, scale = congruence_distance(phases, which)
    return distance <= tol + PHASE_ROUNDING * scale


def resolve_design_row(
    junctions: tuple[JunctionAmplitudes, JunctionAmplitudes],
    tol: float = DEFAULT_TOL,
) -> BellLabel:
    """
    Row the ring-B junctions were built for.

    The first row whose constraints hold; otherwise the family with the
    larger active amplitudes (Φ on ties) and the closer sign (+ on ties).
    """
    for label in BELL_LABELS:
        if check_constraints(junctions, label, tol):
            return label

    a, b = junctions
    flip_weight = abs(a.f) ** 2 + abs(b.f) ** 2
    preserve_weight = abs(a.p) ** 2 + abs(b.p) ** 2
    if flip_weight >= preserve_weight:
        plus, minus = abs(b.f - a.f.conjugate()), abs(b.f + a.f.conjugate())
        return BellLabel.PHI_PLUS if plus <= minus else BellLabel.PHI_MINUS
    plus, minus = abs(b.p - a.p.conjugate()), abs(b.p + a.p.conjugate())
    return BellLabel.PSI_PLUS if plus <= minus else BellLabel.PSI_MINUS


def retune_junctions(
    junctions: tuple[JunctionAmplitudes, JunctionAmplitudes],
    source: BellLabel,
    target: BellLabel,
) -> tuple[JunctionAmplitudes, JunctionAmplitudes]:
    """
    Bob's junction adjustment from the design row to the outcome row.

    Within a family only the sign of junction b's active amplitude changes.
    Across families p and f swap in both junctions before the sign is fixed.
    """
    a, b = junctions
    if source.is_phi == target.is_phi:
        factor = target.sign * source.sign
    else:
        a = JunctionAmplitudes(t=a.t, p=a.f, f=a.p)
        b = JunctionAmplitudes(t=b.t, p=b.f, f=b.p)
        factor = source.sign * target.sign
    if target.is_phi:
        b = JunctionAmplitudes(t=b.t, p=b.p, f=factor * b.f)
    else:
        b = JunctionAmplitudes(t=b.t, p=factor * b.p, f=b.f)
    return a, b


def _channel_from(junctions: tuple[JunctionAmplitudes, JunctionAmplitudes], phases: PhaseSet) -> SpinState:
    return normalize_amplitudes(two_particle_amplitudes_phase_form(junctions, phases)).as_state()


def bob_final_state(
    outcome: BellOutcome,
    qubit: SpinState,
    junctions_b: tuple[JunctionAmplitudes, JunctionAmplitudes],
    phases_b: PhaseSet,
    mode: Mode,
    tol: float = DEFAULT_TOL,
) -> SpinState:
    """
    Bob's corrected qubit on mode 2B.

    ConstraintMode re-evaluates the outcome's bracket over the channel the
    given junctions produce, after asserting they satisfy the outcome's row and
    congruence. UnitaryMode applies the fixed correction for an ideal Φ+ channel.

    Raises:
        ZeroProbabilityError: If the outcome never occurs
        ConstraintViolationError: In ConstraintMode, if the row or congruence fails
    """
    if outcome.probability < ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"Outcome {outcome.label.value} has zero probability")

    if mode == Mode.UNITARY:
        return apply_operator(CORRECTIONS[outcome.label], outcome.bob_state_raw.normalized())

    row = feed_forward_constraints(outcome.label)
    if not check_constraints(junctions_b, outcome.label, tol):
        raise ConstraintViolationError(f"Ring-B junctions violate the {outcome.label.value} row")
    if not check_congruence(phases_b, row.congruence, tol):
        raise ConstraintViolationError(f"Ring-B phases violate {row.congruence.value}")
    channel = _channel_from(junctions_b, phases_b)
    return bell_bracket(qubit, channel, outcome.label).normalized()


# =============================================================================
# End to end
# =============================================================================

def _zero_qubit() -> SpinState:
    return SpinState(np.zeros(2, dtype=complex))


def _constraint_mode_state(
    outcome: BellOutcome,
    qubit: SpinState,
    config_b: RingConfig,
    phases_b: PhaseSet,
    design_row: BellLabel,
    tol: float,
) -> SpinState:
    """Retune ring B for the outcome; degrade instead of failing when the row is not met."""
    retuned = retune_junctions(config_b.junctions, design_row, outcome.label)
    try:
        try:
            return bob_final_state(outcome, qubit, retuned, phases_b, Mode.CONSTRAINT, tol)
        except ConstraintViolationError as e:
            logger.debug("Outcome %s: %s", outcome.label.value, e)
        return bell_bracket(qubit, _channel_from(retuned, phases_b), outcome.label).normalized()
    except DegenerateStateError:
        logger.debug("Outcome %s: retuned channel is degenerate", outcome.label.value)
        return _zero_qubit()


def teleport_qubit(
    qubit: SpinState,
    config_b: RingConfig,
    mode: Mode = Mode.CONSTRAINT,
    design_row: Optional[BellLabel] = None,
    tol: float = DEFAULT_TOL,
) -> ProtocolReport:
    """
    Teleport a given qubit through the channel of ring B.

    Raises:
        UnitarityError: If a ring-B junction is not unitary
        DegenerateStateError: If the ring-B channel vanishes
    """
    qubit = qubit.normalized()
    channel = ring_amplitudes(config_b).as_state()
    phases_b = ring_phases(config_b)
    if design_row is None:
        design_row = config_b.design_row or resolve_design_row(config_b.junctions, tol)

    records = []
    for outcome in bell_measure(total_state(qubit, channel)):
        row = feed_forward_constraints(outcome.label)
        constraint_ok = check_constraints(config_b.junctions, outcome.label, tol)
        congruence_ok = check_congruence(phases_b, row.congruence, tol)

        if outcome.probability < ZERO_PROBABILITY:
            bob, value = _zero_qubit(), None
        else:
            if mode == Mode.UNITARY:
                bob = bob_final_state(outcome, qubit, config_b.junctions, phases_b, mode, tol)
            else:
                bob = _constraint_mode_state(outcome, qubit, config_b, phases_b, design_row, tol)
            value = 0.0 if bob.is_zero else fidelity(bob, qubit)

        records.append(OutcomeRecord(
            label=outcome.label,
            probability=outcome.probability,
            constraint_satisfied=constraint_ok,
            congruence_satisfied=congruence_ok,
            bob_final=bob,
            fidelity=value,
        ))

    return ProtocolReport(
        qubit=qubit,
        channel=channel,
        channel_concurrence=concurrence(channel),
        outcomes=records,
        mode=mode,
        design_row=design_row,
    )


def _ring_amplitudes_named(config: RingConfig, ring: str, audit_service=None) -> RingAmplitudes:
    try:
        return ring_amplitudes(config)
    except DegenerateStateError as e:
        if audit_service is not None:
            audit_service.log_degenerate_ring(ring, str(e))
        raise DegenerateStateError(f"{ring}: {e}") from e


def run_protocol(
    config_a: RingConfig,
    config_b: RingConfig,
    choice: QubitChoice = QubitChoice.UP,
    mode: Mode = Mode.CONSTRAINT,
    tol: float = DEFAULT_TOL,
    design_row: Optional[BellLabel] = None,
    audit_service=None,
) -> ProtocolReport:
    """
    Run the protocol end to end from two ring configurations.

    A degenerate ring is recorded on ``audit_service`` when one is given.

    Raises:
        UnitarityError: If a junction is not unitary
        DegenerateStateError: If a ring state or the D2A outcome vanishes,
            with the ring named in the message
    """
    amplitudes_a = _ring_amplitudes_named(config_a, "ring_a", audit_service)
    _ring_amplitudes_named(config_b, "ring_b", audit_service)
    try:
        qubit, probability = generate_qubit(amplitudes_a, choice)
    except DegenerateStateError as e:
        raise DegenerateStateError(f"ring_a: {e}") from e

    report = teleport_qubit(qubit, config_b, mode, design_row, tol)
    report.qubit_choice = choice
    report.qubit_probability = probability
    return report


class OutcomeSampler:
    """Seeded Monte Carlo draws of Bell outcomes from a report's probabilities."""

    def __init__(self, seed: int):
        self._rng = np.random.default_rng(seed)

    def draw(self, report: ProtocolReport, shots: int) -> dict[BellLabel, int]:
        """Draw ``shots`` outcomes; counts in report order."""
        probabilities = np.clip([o.probability for o in report.outcomes], 0.0, None)
        counts = self._rng.multinomial(shots, probabilities / probabilities.sum())
        return {o.label: int(c) for o, c in zip(report.outcomes, counts)}


class ProtocolService:
    """
    Runs configured teleportation experiments.

    Wraps run_protocol with audit logging and optional outcome sampling.
    """

    def __init__(self, audit_service=None):
        if audit_service is None:
            audit_service = get_audit_service()
        self._audit = audit_service

    def run(self, config: RunConfig, design_row: Optional[BellLabel] = None) -> ProtocolReport:
        """
        Run one configuration, sampling ``config.shots`` outcomes when positive.

        Raises:
            UnitarityError: If a junction is not unitary
            DegenerateStateError: If a ring state vanishes
        """
        report = run_protocol(
            config.ring_a,
            config.ring_b,
            config.qubit_choice,
            config.mode,
            config.tol,
            design_row,
            self._audit,
        )
        if config.shots > 0:
            counts = OutcomeSampler(config.seed).draw(report, config.shots)
            for record in report.outcomes:
                record.sampled_count = counts[record.label]
        for record in report.outcomes:
            self._audit.log_outcome_evaluated(record)
        logger.info(
            "Protocol run: mode=%s design_row=%s concurrence=%.6f",
            report.mode.value, report.design_row.value, report.channel_concurrence,
        )
        return report


# Singleton instance
_protocol_service: Optional[ProtocolService] = None


def get_protocol_service() -> ProtocolService:
    """Get the singleton protocol service instance."""
    global _protocol_service
    if _protocol_service is None:
        _protocol_service = ProtocolService()
    return _protocol_service
