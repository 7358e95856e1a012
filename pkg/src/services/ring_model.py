"""Physical model of one QSHI ring.

Junction amplitudes and edge lengths go in; geometric phases, the reduced
scattering matrix and the normalized two-particle spin state come out. The
two-particle amplitudes are available in two algebraically equivalent forms
(per-segment phases and effective path lengths) so each can check the other.
"""

import cmath
import logging
import math
from typing import Optional

import numpy as np

from src.core.errors import DegenerateStateError
from src.core.models import (
    UNITARITY_TOL,
    EffectivePathLengths,
    JunctionAmplitudes,
    PhaseSet,
    ReducedSMatrix,
    RingAmplitudes,
    RingConfig,
    RingGeometry,
    RingPhysics,
)
from src.core.states import EXACT_TOL, ZERO_PROBABILITY, SpinState

logger = logging.getLogger(__name__)

INNER_RADIUS_NM = 130.0
OUTER_RADIUS_NM = 230.0

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _phase(angle: float) -> complex:
    return cmath.exp(-1j * angle)


# =============================================================================
# Junctions and geometry
# =============================================================================

def check_unitarity(junction: JunctionAmplitudes, name: str = "junction", tol: float = UNITARITY_TOL) -> None:
    """
    Validate |t|² + |p|² + |f|² = 1 for one junction.

    Raises:
        UnitarityError: If the junction deviates by more than tol
    """
    junction.check_unitarity(name, tol)


def junction_from_probabilities(
    t_prob: float,
    f_prob: float,
    t_phase: float = 0.0,
    p_phase: float = 0.0,
    f_phase: float = 0.0,
) -> JunctionAmplitudes:
    """
    Build a unitary junction from tunneling and flip probabilities.

    The preserving probability is whatever remains, 1 - t_prob - f_prob.
    """
    p_prob = 1.0 - t_prob - f_prob
    if min(t_prob, f_prob) < 0 or p_prob < -EXACT_TOL:
        raise ValueError(f"Probabilities out of range: t={t_prob}, f={f_prob}")
    p_prob = max(p_prob, 0.0)
    return JunctionAmplitudes(
        t=cmath.rect(math.sqrt(t_prob), t_phase),
        p=cmath.rect(math.sqrt(p_prob), p_phase),
        f=cmath.rect(math.sqrt(f_prob), f_phase),
    )


def random_junction(rng: np.random.Generator) -> JunctionAmplitudes:
    """Random unitary junction (normalized complex Gaussian triple)."""
    amps = rng.normal(size=3) + 1j * rng.normal(size=3)
    amps = amps / np.linalg.norm(amps)
    return JunctionAmplitudes(t=amps[0], p=amps[1], f=amps[2])


def random_geometry(rng: np.random.Generator, low: float = 1.0, high: float = 100.0) -> RingGeometry:
    """Seven independent edge lengths drawn uniformly from [low, high) nm."""
    return RingGeometry.from_lengths(rng.uniform(low, high, size=7))


def default_geometry() -> RingGeometry:
    """
    Circular-symmetric geometry from a 130 nm inner and 230 nm outer radius.

    Each outer half-circle is split evenly between l1/l4 and l2/l3; the inner
    edge is split into two quarter-circle arms (l5, l7) and the half-circle l6.
    """
    outer_half = math.pi * OUTER_RADIUS_NM / 2
    inner_quarter = math.pi * INNER_RADIUS_NM / 2
    return RingGeometry(
        l1=outer_half,
        l2=outer_half,
        l3=outer_half,
        l4=outer_half,
        l5=inner_quarter,
        l6=math.pi * INNER_RADIUS_NM,
        l7=inner_quarter,
    )


# =============================================================================
# Edge Hamiltonian
# =============================================================================

def modified_fermi_velocity(physics: RingPhysics) -> float:
    """Fermi velocity with the Rashba term absorbed, sqrt(v_F² + α²)."""
    return math.hypot(physics.v_f, physics.alpha)


def edge_momentum(physics: RingPhysics) -> float:
    """Edge momentum K = (E + eV_g) / v_α in radians per nanometer."""
    return (physics.energy + physics.gate) / modified_fermi_velocity(physics)


def velocity_operator(physics: RingPhysics) -> np.ndarray:
    """Spin part of the edge velocity, v_F σz + α σy."""
    return physics.v_f * SIGMA_Z + physics.alpha * SIGMA_Y


def rashba_rotation(physics: RingPhysics) -> np.ndarray:
    """
    Spin rotation about x that diagonalizes the edge velocity.

    U = exp(-iθσx/2) with θ = atan2(α, v_F), so that
    U (v_F σz + α σy) U† = v_α σz.
    """
    theta = math.atan2(physics.alpha, physics.v_f)
    return math.cos(theta / 2) * np.eye(2, dtype=complex) - 1j * math.sin(theta / 2) * SIGMA_X


# =============================================================================
# Phases and path lengths
# =============================================================================

def geometric_phases(k: float, geom: RingGeometry) -> PhaseSet:
    """Phases accumulated by K along each segment group."""
    l1, l2, l3, l4, l5, l6, l7 = geom.lengths
    return PhaseSet(
        phi12=k * (l1 + l2),
        phi15=k * (l1 + l5),
        phi34=k * (l3 + l4),
        phi47=k * (l4 + l7),
        phi136=k * (l1 + l3 + l6),
        phi146=k * (l1 + l4 + l6),
        phi167=k * (l1 + l6 + l7),
        phi246=k * (l2 + l4 + l6),
        phi456=k * (l4 + l5 + l6),
    )


def effective_path_lengths(geom: RingGeometry) -> EffectivePathLengths:
    l1, l2, l3, l4, l5, _, l7 = geom.lengths
    return EffectivePathLengths(
        uu=l1 + l2 + l4 + l5,
        ud=l1 + l2 + l4 + l7,
        du=l1 + l3 + l4 + l5,
        dd=l1 + l3 + l4 + l7,
    )


def phase_identity_errors(k: float, geom: RingGeometry) -> list[float]:
    """Error of each path-length/phase identity, relative to max(1, |K·l|)."""
    phases = geometric_phases(k, geom)
    paths = effective_path_lengths(geom)
    l6 = geom.l6
    pairs = [
        (k * paths.ud, phases.phi12 + phases.phi47),
        (k * paths.du, phases.phi15 + phases.phi34),
        (k * (paths.uu + l6), phases.phi12 + phases.phi456),
        (k * (paths.ud + 2 * l6), phases.phi167 + phases.phi246),
        (k * (paths.du + 2 * l6), phases.phi136 + phases.phi456),
        (k * (paths.dd + l6), phases.phi34 + phases.phi167),
    ]
    return [abs(lhs - rhs) / max(1.0, abs(lhs)) for lhs, rhs in pairs]


def verify_phase_identities(k: float, geom: RingGeometry, tol: float = EXACT_TOL) -> bool:
    """True iff all six path-length/phase identities hold within tol."""
    return all(error <= tol for error in phase_identity_errors(k, geom))


# =============================================================================
# Scattering and two-particle amplitudes
# =============================================================================

def reduced_scattering_matrix(
    junctions: tuple[JunctionAmplitudes, JunctionAmplitudes],
    phases: PhaseSet,
) -> ReducedSMatrix:
    """
    Reduced 6x2 scattering matrix from the two junctions and the phases.

    Raises:
        UnitarityError: If either junction violates unitarity beyond 1e-9
    """
    a, b = junctions
    check_unitarity(a, "junction_a")
    check_unitarity(b, "junction_b")

    ff = -a.f.conjugate() * b.f * _phase(phases.phi146)
    entries = [
        [a.p * _phase(phases.phi12), b.f * a.t.conjugate() * _phase(phases.phi246)],
        [a.f.conjugate() * b.t * _phase(phases.phi136), b.p.conjugate() * _phase(phases.phi34)],
        [-a.t * _phase(phases.phi15), b.f * a.p.conjugate() * _phase(phases.phi456)],
        [-a.f.conjugate() * b.p * _phase(phases.phi167), b.t.conjugate() * _phase(phases.phi47)],
        [ff, 0],
        [0, ff],
    ]
    return ReducedSMatrix(np.array(entries, dtype=complex))


def two_particle_amplitudes_phase_form(
    junctions: tuple[JunctionAmplitudes, JunctionAmplitudes],
    phases: PhaseSet,
) -> RingAmplitudes:
    """Unnormalized amplitudes A_σσ' written with per-segment phases."""
    a, b = junctions
    fa_c = a.f.conjugate()
    return RingAmplitudes(
        uu=b.f * (abs(a.p) ** 2 + abs(a.t) ** 2) * _phase(phases.phi12 + phases.phi456),
        dd=fa_c * (abs(b.p) ** 2 + abs(b.t) ** 2) * _phase(phases.phi34 + phases.phi167),
        du=(
            b.p.conjugate() * a.t * _phase(phases.phi15 + phases.phi34)
            + fa_c * b.f * a.p.conjugate() * b.t * _phase(phases.phi136 + phases.phi456)
        ),
        ud=(
            a.p * b.t.conjugate() * _phase(phases.phi12 + phases.phi47)
            + fa_c * b.f * b.p * a.t.conjugate() * _phase(phases.phi167 + phases.phi246)
        ),
    )


def two_particle_amplitudes_pathlength_form(
    junctions: tuple[JunctionAmplitudes, JunctionAmplitudes],
    k: float,
    geom: RingGeometry,
) -> RingAmplitudes:
    """Unnormalized amplitudes A_σσ' written with effective path lengths."""
    a, b = junctions
    fa_c = a.f.conjugate()
    paths = effective_path_lengths(geom)
    l6 = geom.l6
    return RingAmplitudes(
        uu=b.f * (abs(a.p) ** 2 + abs(a.t) ** 2) * _phase(k * (paths.uu + l6)),
        dd=fa_c * (abs(b.p) ** 2 + abs(b.t) ** 2) * _phase(k * (paths.dd + l6)),
        du=(
            b.p.conjugate() * a.t * _phase(k * paths.du)
            + fa_c * b.f * a.p.conjugate() * b.t * _phase(k * (paths.du + 2 * l6))
        ),
        ud=(
            a.p * b.t.conjugate() * _phase(k * paths.ud)
            + fa_c * b.f * b.p * a.t.conjugate() * _phase(k * (paths.ud + 2 * l6))
        ),
    )


def normalize_amplitudes(raw: RingAmplitudes) -> RingAmplitudes:
    """
    Scale amplitudes to unit total probability, keeping relative phases.

    Raises:
        DegenerateStateError: If the squared-norm sum is below 1e-15
    """
    total = raw.norm_squared
    if total < ZERO_PROBABILITY:
        raise DegenerateStateError(
            f"Two-particle amplitudes vanish (squared norm {total:.3g}); "
            "the junctions never deliver both particles in superposition"
        )
    n = 1.0 / math.sqrt(total)
    return RingAmplitudes(uu=raw.uu * n, dd=raw.dd * n, du=raw.du * n, ud=raw.ud * n, norm=raw.norm * n)


def ring_amplitudes(config: RingConfig) -> RingAmplitudes:
    """
    Normalized two-particle amplitudes of a configured ring.

    Raises:
        UnitarityError: If a junction is not unitary
        DegenerateStateError: If the amplitudes vanish
    """
    check_unitarity(config.junction_a, "junction_a")
    check_unitarity(config.junction_b, "junction_b")
    k = edge_momentum(config.physics)
    phases = geometric_phases(k, config.geometry)
    amplitudes = normalize_amplitudes(two_particle_amplitudes_phase_form(config.junctions, phases))
    logger.debug("Ring amplitudes K=%.6g N=%.6g", k, amplitudes.norm)
    return amplitudes


def ring_state(config: RingConfig) -> SpinState:
    """Normalized two-particle state over modes (1, 2), order (↑↑, ↑↓, ↓↑, ↓↓)."""
    return ring_amplitudes(config).as_state()


def ring_phases(config: RingConfig) -> PhaseSet:
    """Geometric phases of a configured ring at its own edge momentum."""
    return geometric_phases(edge_momentum(config.physics), config.geometry)


def beam_splitter_ring(geometry: Optional[RingGeometry] = None, physics: Optional[RingPhysics] = None) -> RingConfig:
    """
    Ring with symmetric beam-splitter junctions (t = f = 1/√2, p = 0).

    At K = 0, or on a circular-symmetric geometry, its state is Φ+.
    """
    junction = junction_from_probabilities(0.5, 0.5)
    return RingConfig(
        junction_a=junction,
        junction_b=junction,
        geometry=geometry or default_geometry(),
        physics=physics or RingPhysics(),
    )
