"""Data models for the QSHI ring teleportation simulator."""

import math
from dataclasses import dataclass, field, fields
from datetime import datetime
from enum import Enum
from typing import Optional

import numpy as np

from .errors import UnitarityError, ValidationError
from .states import SpinState

UNITARITY_TOL = 1e-9


def complex_pair(value: complex) -> list[float]:
    """Complex number as a ``[re, im]`` pair."""
    value = complex(value)
    return [value.real, value.imag]


class QubitChoice(str, Enum):
    """Spin selected by detector D2A when the qubit is filtered out of ring A."""
    UP = "up"
    DOWN = "down"

    @classmethod
    def values(cls) -> list[str]:
        """Get all choice values as strings."""
        return [c.value for c in cls]


class Mode(str, Enum):
    """How Bob turns his post-measurement state into the teleported qubit."""
    CONSTRAINT = "constraint"
    UNITARY = "unitary"

    @classmethod
    def values(cls) -> list[str]:
        """Get all mode values as strings."""
        return [m.value for m in cls]


class Congruence(str, Enum):
    """Geometric phase congruence required by a feed-forward row."""
    CG1 = "CG1"
    CG2 = "CG2"


class Relation(str, Enum):
    """Relation imposed on a junction amplitude pair by a feed-forward row."""
    CONJUGATE_PLUS = "b = +a*"
    CONJUGATE_MINUS = "b = -a*"
    ZERO = "a = b = 0"


class BellLabel(str, Enum):
    """The four Bell outcomes of the joint detector, in report order."""
    PHI_PLUS = "phi_plus"
    PHI_MINUS = "phi_minus"
    PSI_PLUS = "psi_plus"
    PSI_MINUS = "psi_minus"

    @classmethod
    def values(cls) -> list[str]:
        """Get all label values as strings."""
        return [b.value for b in cls]

    @property
    def symbol(self) -> str:
        return {
            BellLabel.PHI_PLUS: "Φ+",
            BellLabel.PHI_MINUS: "Φ-",
            BellLabel.PSI_PLUS: "Ψ+",
            BellLabel.PSI_MINUS: "Ψ-",
        }[self]

    @property
    def is_phi(self) -> bool:
        return self in (BellLabel.PHI_PLUS, BellLabel.PHI_MINUS)

    @property
    def sign(self) -> int:
        return 1 if self in (BellLabel.PHI_PLUS, BellLabel.PSI_PLUS) else -1


@dataclass(frozen=True)
class JunctionAmplitudes:
    """
    Scattering amplitudes of one tunneling junction.

    Attributes:
        t: Tunnel to the opposite edge, spin preserved
        p: Stay on the same edge
        f: Tunnel with spin flip
    """
    t: complex
    p: complex
    f: complex

    def __post_init__(self):
        for name in ("t", "p", "f"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def probability_sum(self) -> float:
        return abs(self.t) ** 2 + abs(self.p) ** 2 + abs(self.f) ** 2

    def is_unitary(self, tol: float = UNITARITY_TOL) -> bool:
        return abs(self.probability_sum - 1.0) <= tol

    def check_unitarity(self, name: str = "junction", tol: float = UNITARITY_TOL) -> None:
        """
        Raise if |t|² + |p|² + |f|² deviates from 1 by more than tol.

        Raises:
            UnitarityError: On violation, naming the junction
        """
        if not self.is_unitary(tol):
            raise UnitarityError(
                f"{name}: |t|^2 + |p|^2 + |f|^2 = {self.probability_sum:.15g}, expected 1"
            )

    def to_dict(self) -> dict:
        return {"t": complex_pair(self.t), "p": complex_pair(self.p), "f": complex_pair(self.f)}


@dataclass(frozen=True)
class RingGeometry:
    """Seven edge lengths of one ring in nanometers (l1-l4 outer, l5-l7 inner)."""
    l1: float
    l2: float
    l3: float
    l4: float
    l5: float
    l6: float
    l7: float

    def __post_init__(self):
        for f in fields(self):
            value = float(getattr(self, f.name))
            if not math.isfinite(value) or value <= 0:
                raise ValidationError(f"edge length must be positive and finite, got {value}", f.name)
            object.__setattr__(self, f.name, value)

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))

    @classmethod
    def from_lengths(cls, lengths) -> "RingGeometry":
        values = list(lengths)
        if len(values) != 7:
            raise ValidationError(f"expected 7 edge lengths, got {len(values)}", "lengths")
        return cls(*values)

    def scaled(self, factor: float) -> "RingGeometry":
        return RingGeometry(*(factor * length for length in self.lengths))

    @property
    def is_circular_symmetric(self) -> bool:
        return math.isclose(self.l2, self.l3) and math.isclose(self.l5, self.l7)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class RingPhysics:
    """
    Edge Hamiltonian parameters of one ring.

    Attributes:
        v_f: Fermi velocity (nm per time unit), strictly positive
        alpha: Rashba coupling (nm per time unit)
        energy: Kinetic energy of each Kramers partner
        gate: Gate term eV_g
    """
    v_f: float = 1.0
    alpha: float = 0.0
    energy: float = 0.0
    gate: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = float(getattr(self, f.name))
            if not math.isfinite(value):
                raise ValidationError(f"must be finite, got {value}", f.name)
            object.__setattr__(self, f.name, value)
        if self.v_f <= 0:
            raise ValidationError(f"Fermi velocity must be positive, got {self.v_f}", "v_f")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class RingConfig:
    """Everything needed to build one ring's two-particle state."""
    junction_a: JunctionAmplitudes
    junction_b: JunctionAmplitudes
    geometry: RingGeometry
    physics: RingPhysics = field(default_factory=RingPhysics)
    design_row: Optional[BellLabel] = None

    @property
    def junctions(self) -> tuple[JunctionAmplitudes, JunctionAmplitudes]:
        return (self.junction_a, self.junction_b)

    def to_dict(self) -> dict:
        return {
            "junction_a": self.junction_a.to_dict(),
            "junction_b": self.junction_b.to_dict(),
            "geometry": self.geometry.to_dict(),
            "physics": self.physics.to_dict(),
            "design_row": self.design_row.value if self.design_row else None,
        }


@dataclass(frozen=True)
class PhaseSet:
    """Geometric phases K times edge-length sums, in radians."""
    phi12: float
    phi15: float
    phi34: float
    phi47: float
    phi136: float
    phi146: float
    phi167: float
    phi246: float
    phi456: float

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class EffectivePathLengths:
    """Path lengths (nm) picked up by each spin pair, l_σσ'."""
    uu: float
    ud: float
    du: float
    dd: float


@dataclass(frozen=True, eq=False)
class ReducedSMatrix:
    """
    Reduced 6x2 scattering matrix.

    Rows: D1↑, D1↓, D2↑, D2↓, flip-flip ↑, flip-flip ↓.
    Columns: source spin ↑, ↓.
    """
    entries: np.ndarray

    ROW_LABELS = ("D1↑", "D1↓", "D2↑", "D2↓", "FF↑", "FF↓")

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex)
        if arr.shape != (6, 2):
            raise ValueError(f"Reduced S-matrix must be 6x2, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def column_norms(self) -> tuple[float, float]:
        norms = np.sum(np.abs(self.entries) ** 2, axis=0)
        return float(norms[0]), float(norms[1])

    def entry(self, row: str, column: str) -> complex:
        """Look up an entry by row label and source spin (``up``/``down``)."""
        return complex(self.entries[self.ROW_LABELS.index(row), 0 if column == "up" else 1])


@dataclass(frozen=True)
class RingAmplitudes:
    """
    Two-particle amplitudes A_σσ' over modes (1, 2) of one ring.

    Attributes:
        uu, dd, du, ud: Amplitudes of |↑↑⟩, |↓↓⟩, |↓↑⟩, |↑↓⟩
        norm: Normalization factor already applied (1 for raw amplitudes)
    """
    uu: complex
    dd: complex
    du: complex
    ud: complex
    norm: float = 1.0

    @property
    def vector(self) -> np.ndarray:
        """Amplitudes in computational order (↑↑, ↑↓, ↓↑, ↓↓)."""
        return np.array([self.uu, self.ud, self.du, self.dd], dtype=complex)

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.vector) ** 2))

    def as_state(self) -> SpinState:
        return SpinState(self.vector)

    def to_dict(self) -> dict:
        return {
            "uu": complex_pair(self.uu),
            "ud": complex_pair(self.ud),
            "du": complex_pair(self.du),
            "dd": complex_pair(self.dd),
            "norm": self.norm,
        }


@dataclass(frozen=True)
class FeedForwardConstraints:
    """One row of Bob's feed-forward table."""
    label: BellLabel
    flip_rule: Relation
    preserve_rule: Relation
    congruence: Congruence
    tunnel_rule: str = "t_a = t_b*"

    def to_dict(self) -> dict:
        return {
            "outcome": self.label.value,
            "flipping": self.flip_rule.value,
            "tunneling": self.tunnel_rule,
            "preserving": self.preserve_rule.value,
            "congruence": self.congruence.value,
        }


@dataclass(frozen=True)
class BellOutcome:
    """One branch of the Bell measurement on modes (1A, 1B)."""
    label: BellLabel
    probability: float
    bob_state_raw: SpinState


@dataclass
class OutcomeRecord:
    """Per-outcome line of a protocol report."""
    label: BellLabel
    probability: float
    constraint_satisfied: bool
    congruence_satisfied: bool
    bob_final: SpinState
    fidelity: Optional[float]
    sampled_count: Optional[int] = None

    @property
    def reachable(self) -> bool:
        return self.fidelity is not None

    def to_dict(self) -> dict:
        data = {
            "label": self.label.value,
            "probability": self.probability,
            "constraint_satisfied": self.constraint_satisfied,
            "congruence_satisfied": self.congruence_satisfied,
            "bob_final": self.bob_final.to_list(),
            "fidelity": self.fidelity,
        }
        if self.sampled_count is not None:
            data["sampled_count"] = self.sampled_count
        return data


@dataclass
class ProtocolReport:
    """Result of one end-to-end teleportation run."""
    qubit: SpinState
    channel: SpinState
    channel_concurrence: float
    outcomes: list[OutcomeRecord]
    mode: Mode
    design_row: BellLabel
    qubit_choice: Optional[QubitChoice] = None
    qubit_probability: Optional[float] = None

    @property
    def total_probability(self) -> float:
        return sum(o.probability for o in self.outcomes)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "qubit": self.qubit.to_list(),
            "qubit_choice": self.qubit_choice.value if self.qubit_choice else None,
            "qubit_probability": self.qubit_probability,
            "channel": self.channel.to_list(),
            "channel_concurrence": self.channel_concurrence,
            "design_row": self.design_row.value,
            "outcomes": [o.to_dict() for o in self.outcomes],
        }


@dataclass(frozen=True)
class SweepSpec:
    """A real-valued config leaf swept over a linear grid."""
    param: str
    start: float
    stop: float
    steps: int

    def values(self) -> list[float]:
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]

    def to_dict(self) -> dict:
        return {"param": self.param, "start": self.start, "stop": self.stop, "steps": self.steps}


@dataclass(frozen=True)
class RunConfig:
    """
    Parsed run configuration.

    Attributes:
        ring_a: Ring generating Alice's qubit
        ring_b: Ring providing the quantum channel
        qubit_choice: D2A spin selection
        mode: Bob's correction mode
        seed: Seed for the outcome sampler
        tol: Tolerance for feed-forward and congruence checks
        shots: Number of sampled Bell outcomes (0 disables sampling)
        workers: Sweep worker threads
        sweep: Optional sweep specification
    """
    ring_a: RingConfig
    ring_b: RingConfig
    qubit_choice: QubitChoice = QubitChoice.UP
    mode: Mode = Mode.CONSTRAINT
    seed: int = 42
    tol: float = 1e-9
    shots: int = 0
    workers: int = 1
    sweep: Optional[SweepSpec] = None

    def to_dict(self) -> dict:
        return {
            "ring_a": self.ring_a.to_dict(),
            "ring_b": self.ring_b.to_dict(),
            "qubit_choice": self.qubit_choice.value,
            "mode": self.mode.value,
            "seed": self.seed,
            "tol": self.tol,
            "shots": self.shots,
            "workers": self.workers,
            "sweep": self.sweep.to_dict() if self.sweep else None,
        }


@dataclass
class AuditEntry:
    """
    One run-level audit event.

    Attributes:
        action: Event name (run_started, outcome_evaluated, sweep_point, ...)
        entity_type: What the event concerns (run, outcome, sweep, suite, ring)
        details: Structured context for the event
        timestamp: When the event was recorded
    """
    action: str
    entity_type: str
    details: Optional[dict] = None
    timestamp: datetime = field(default_factory=datetime.now)

    def to_dict(self) -> dict:
        return {
            "action": self.action,
            "entity_type": self.entity_type,
            "details": self.details,
            "timestamp": self.timestamp.isoformat(),
        }


class SweepStatus(str, Enum):
    """Outcome of evaluating one sweep point."""
    OK = "ok"
    UNREACHABLE = "unreachable"
    DEGENERATE = "degenerate"
    NON_UNITARY = "non-unitary"


@dataclass(frozen=True)
class SweepRow:
    """One CSV row: a sweep point crossed with a Bell outcome."""
    param: str
    value: float
    outcome: BellLabel
    status: SweepStatus
    probability: Optional[float] = None
    fidelity: Optional[float] = None
    concurrence: Optional[float] = None
