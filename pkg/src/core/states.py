"""State-vector and density-matrix toolkit for one to three spins.

Basis ordering: spin up is index 0, spin down is index 1, and the leftmost
subsystem is the most significant bit. A 3-spin amplitude index is therefore
``4 * s0 + 2 * s1 + s2``.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, NotNormalizedError, ZeroProbabilityError


# Tolerances
EXACT_TOL = 1e-12
PSD_TOL = 1e-10
ZERO_PROBABILITY = 1e-15

ALLOWED_SIZES = (2, 4, 8)

_SPIN_INDEX = {"u": 0, "d": 1, "0": 0, "1": 1, "↑": 0, "↓": 1}


def _frozen(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SpinState:
    """
    Pure state of 1, 2 or 3 spins.

    Attributes:
        amplitudes: Complex vector of length 2, 4 or 8 in computational order
    """
    amplitudes: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if arr.size not in ALLOWED_SIZES:
            raise DimensionError(f"SpinState needs 2, 4 or 8 amplitudes, got {arr.size}")
        object.__setattr__(self, "amplitudes", _frozen(arr))

    @property
    def size(self) -> int:
        return int(self.amplitudes.size)

    @property
    def n_spins(self) -> int:
        return int(np.log2(self.size))

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm_squared - 1.0) <= EXACT_TOL

    @property
    def is_zero(self) -> bool:
        """True for a post-measurement branch that never occurs."""
        return self.norm_squared < ZERO_PROBABILITY

    def normalized(self) -> "SpinState":
        """
        Return this state scaled to unit norm.

        Raises:
            ZeroProbabilityError: If the state is (numerically) the zero vector
        """
        if self.is_zero:
            raise ZeroProbabilityError("Cannot normalize a zero-probability state")
        return SpinState(self.amplitudes / np.sqrt(self.norm_squared))

    def scaled(self, factor: complex) -> "SpinState":
        return SpinState(self.amplitudes * factor)

    def to_list(self) -> list[list[float]]:
        """Amplitudes as ``[re, im]`` pairs for JSON output."""
        return [[float(a.real), float(a.imag)] for a in self.amplitudes]

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, index: int) -> complex:
        return complex(self.amplitudes[index])


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density matrix over 1, 2 or 3 spins."""
    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] not in ALLOWED_SIZES:
            raise DimensionError(f"DensityMatrix needs a 2^n square matrix, got shape {arr.shape}")
        object.__setattr__(self, "entries", _frozen(arr))

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    @property
    def is_hermitian(self) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T)) <= EXACT_TOL)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    @property
    def is_positive_semidefinite(self) -> bool:
        return bool(np.min(self.eigenvalues) >= -PSD_TOL)

    @property
    def has_unit_trace(self) -> bool:
        return abs(self.trace - 1.0) <= EXACT_TOL


# =============================================================================
# Constructors
# =============================================================================

def spin_state(*amplitudes: complex) -> SpinState:
    """Build a SpinState from its amplitudes."""
    return SpinState(np.array(amplitudes, dtype=complex))


def basis_state(spins: str) -> SpinState:
    """
    Computational basis state from a spin string.

    Args:
        spins: One character per spin, ``u``/``d`` (or ``0``/``1``, ``↑``/``↓``)

    Returns:
        Basis SpinState, e.g. ``basis_state("ud")`` is |↑↓⟩
    """
    index = 0
    for char in spins:
        if char not in _SPIN_INDEX:
            raise DimensionError(f"Unknown spin symbol: {char!r}")
        index = 2 * index + _SPIN_INDEX[char]
    amps = np.zeros(2 ** len(spins), dtype=complex)
    amps[index] = 1.0
    return SpinState(amps)


UP = basis_state("u")
DOWN = basis_state("d")


# =============================================================================
# Operations
# =============================================================================

def tensor(a: SpinState, b: SpinState) -> SpinState:
    """
    Tensor product a ⊗ b (a is the more significant factor).

    Raises:
        DimensionError: If the result would exceed three spins
    """
    if a.size * b.size > 8:
        raise DimensionError(f"Tensor product of {a.n_spins} and {b.n_spins} spins exceeds 3 spins")
    return SpinState(np.kron(a.amplitudes, b.amplitudes))


def _split(state: SpinState, subsystems: Sequence[int]) -> tuple[np.ndarray, list[int]]:
    """Reshape amplitudes to a (selected, rest) matrix."""
    n = state.n_spins
    selected = list(subsystems)
    if len(set(selected)) != len(selected) or any(s < 0 or s >= n for s in selected):
        raise DimensionError(f"Invalid subsystems {selected} for a {n}-spin state")
    rest = [i for i in range(n) if i not in selected]
    psi = state.amplitudes.reshape((2,) * n)
    psi = np.transpose(psi, selected + rest)
    return psi.reshape(2 ** len(selected), 2 ** len(rest)), rest


def project(
    state: SpinState,
    projector_state: SpinState,
    on_subsystems: Sequence[int],
) -> tuple[float, SpinState]:
    """
    Project some subsystems of a state onto a pure state.

    Args:
        state: Full state
        projector_state: Normalized state of the selected subsystems
        on_subsystems: 0-based subsystem indices, in the projector's factor order

    Returns:
        Tuple of (probability, unnormalized residual on the remaining subsystems)

    Raises:
        DimensionError: If the projector does not match the selected subsystems
            or no subsystem would remain
        NotNormalizedError: If the projector is not normalized
    """
    subsystems = list(on_subsystems)
    if projector_state.size != 2 ** len(subsystems):
        raise DimensionError(
            f"Projector has {projector_state.n_spins} spins but {len(subsystems)} subsystems selected"
        )
    if len(subsystems) >= state.n_spins:
        raise DimensionError("Projection must leave at least one subsystem")
    if not projector_state.is_normalized:
        raise NotNormalizedError("Projector state is not normalized")

    matrix, _ = _split(state, subsystems)
    residual = projector_state.amplitudes.conj() @ matrix
    probability = float(np.vdot(residual, residual).real)
    return probability, SpinState(residual)


def fidelity(a: SpinState, b: SpinState) -> float:
    """
    Squared overlap |⟨a|b⟩|² of two normalized states.

    Raises:
        NotNormalizedError: If either state is not normalized
        DimensionError: If the states differ in size
    """
    if a.size != b.size:
        raise DimensionError(f"Cannot compare states of sizes {a.size} and {b.size}")
    if not (a.is_normalized and b.is_normalized):
        raise NotNormalizedError("fidelity requires normalized states")
    value = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    return float(min(value, 1.0))


def density_matrix(state: SpinState) -> DensityMatrix:
    """Pure-state density matrix |ψ⟩⟨ψ|."""
    psi = state.amplitudes
    return DensityMatrix(np.outer(psi, psi.conj()))


def reduced_density(state: SpinState, keep: Sequence[int]) -> DensityMatrix:
    """
    Partial trace over every subsystem not in ``keep``.

    Raises:
        NotNormalizedError: If the state is not normalized
        DimensionError: If ``keep`` is empty or invalid
    """
    if not state.is_normalized:
        raise NotNormalizedError("reduced_density requires a normalized state")
    if not keep:
        raise DimensionError("At least one subsystem must be kept")
    matrix, _ = _split(state, keep)
    return DensityMatrix(matrix @ matrix.conj().T)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of a - b."""
    if a.size != b.size:
        raise DimensionError(f"Cannot compare density matrices of sizes {a.size} and {b.size}")
    diff = a.entries - b.entries
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def concurrence(state: SpinState) -> float:
    """
    Concurrence 2|a↑↑ a↓↓ - a↑↓ a↓↑| of a normalized two-spin state.

    Raises:
        DimensionError: If the state is not a two-spin state
        NotNormalizedError: If the state is not normalized
    """
    if state.size != 4:
        raise DimensionError("concurrence is defined for two spins only")
    if not state.is_normalized:
        raise NotNormalizedError("concurrence requires a normalized state")
    a = state.amplitudes
    return float(min(2.0 * abs(a[0] * a[3] - a[1] * a[2]), 1.0))


def apply_operator(matrix: np.ndarray, state: SpinState) -> SpinState:
    """Apply a square matrix to a state of matching size."""
    op = np.asarray(matrix, dtype=complex)
    if op.shape != (state.size, state.size):
        raise DimensionError(f"Operator shape {op.shape} does not match state size {state.size}")
    return SpinState(op @ state.amplitudes)


def random_state(rng: np.random.Generator, n_spins: int = 1) -> SpinState:
    """Haar-random normalized state (complex Gaussian, normalized)."""
    size = 2 ** n_spins
    amps = rng.normal(size=size) + 1j * rng.normal(size=size)
    return SpinState(amps / np.linalg.norm(amps))
