"""Exact complex linear algebra for one- to three-qubit registers.

States are dense complex vectors over named subsystems, indexed big-endian:
the first named subsystem is the most significant bit of the basis index,
so ``("ancilla", "alice", "bob")`` stores the amplitude of |x y z> at index
``4x + 2y + z``.  Everything is immutable after construction and every
operation is a pure function, so values can be shared freely across threads.

Dimensions never exceed 8, so all checks are done eagerly and densely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Tolerance ladder: exact algebraic identities vs accumulated arithmetic.
ATOL_ALGEBRA = 1e-12
ATOL_ACCUM = 1e-10
PSD_FLOOR = -1e-10

MAX_QUBITS = 3

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

BELL_ORDER = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


def _max_dev(a: np.ndarray, b: np.ndarray) -> float:
    """Largest entrywise absolute deviation (cheaper than np.allclose)."""
    return float(np.abs(a - b).max())


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state of up to three named qubits."""

    amplitudes: np.ndarray
    subsystems: tuple[str, ...]

    def __post_init__(self) -> None:
        names = tuple(self.subsystems)
        n = len(names)
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"register must hold 1..{MAX_QUBITS} qubits, got {n}")
        if len(set(names)) != n:
            raise ValueError(f"subsystem names must be distinct: {names}")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (2**n,):
            raise ValueError(f"expected {2**n} amplitudes for {n} qubits, got {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > ATOL_ALGEBRA:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {ATOL_ALGEBRA}")
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "subsystems", names)

    @property
    def num_qubits(self) -> int:
        return len(self.subsystems)

    def axis(self, name: str) -> int:
        """Tensor axis (0 = most significant bit) of a named subsystem."""
        try:
            return self.subsystems.index(name)
        except ValueError:
            raise ValueError(f"no subsystem {name!r} in register {self.subsystems}") from None

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)


@dataclass(frozen=True)
class Observable:
    """Hermitian operator on a 2- or 4-dimensional subsystem."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
            raise ValueError(f"observable must be 2x2 or 4x4, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("observable entries must be finite")
        if _max_dev(m, m.conj().T) > ATOL_ALGEBRA:
            raise ValueError("observable is not Hermitian within 1e-12")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def minus_projector(self) -> np.ndarray:
        """(I - M)/2, the projector onto the -1 eigenspace of a bivalent M."""
        m = self.matrix
        if _max_dev(m @ m, np.eye(self.dim)) > ATOL_ALGEBRA:
            raise ValueError("minus_projector requires a bivalent observable (M^2 = I)")
        return (np.eye(self.dim, dtype=complex) - m) / 2.0


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator."""

    matrix: np.ndarray
    subsystems: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("density matrix entries must be finite")
        if _max_dev(m, m.conj().T) > ATOL_ALGEBRA:
            raise ValueError("density matrix is not Hermitian within 1e-12")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > ATOL_ALGEBRA:
            raise ValueError(f"density matrix trace {tr!r} deviates from 1 beyond {ATOL_ALGEBRA}")
        eigs = np.linalg.eigvalsh(m)
        if eigs.min() < PSD_FLOOR:
            raise ValueError(f"density matrix has negative eigenvalue {eigs.min()!r}")
        if self.subsystems is not None:
            names = tuple(self.subsystems)
            if m.shape[0] != 2 ** len(names):
                raise ValueError("subsystem labels inconsistent with dimension")
            object.__setattr__(self, "subsystems", names)
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class MeasurementBranch:
    """One outcome of a projective measurement.

    ``post_state`` is None for (numerically) zero-probability branches,
    which are reported with probability 0 rather than normalized.
    """

    probability: float
    post_state: StateVector | None


def _as_matrix(op: Observable | np.ndarray) -> np.ndarray:
    if isinstance(op, Observable):
        return op.matrix
    return np.asarray(op, dtype=complex)


def _target_positions(state: StateVector, targets: Sequence[str]) -> list[int]:
    if len(targets) == 0:
        raise ValueError("at least one target subsystem required")
    positions = [state.axis(t) for t in targets]
    if len(set(positions)) != len(positions):
        raise ValueError(f"target subsystems must be distinct: {tuple(targets)}")
    return positions


def _apply_matrix(mat: np.ndarray, positions: Sequence[int], state: StateVector) -> np.ndarray:
    """Embed ``mat`` on the given tensor axes and apply it; returns raw amplitudes.

    ``mat`` is indexed big-endian over ``positions`` in the order given.
    """
    n = state.num_qubits
    k = len(positions)
    if mat.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {mat.shape} does not match {k} target qubit(s)")
    op = mat.reshape((2,) * (2 * k))
    out = np.tensordot(op, state.as_tensor(), axes=(tuple(range(k, 2 * k)), tuple(positions)))
    out = np.moveaxis(out, tuple(range(k)), tuple(positions))
    return out.reshape(2**n)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker composition; ``a``'s subsystems become the high-order bits."""
    if a.num_qubits + b.num_qubits > MAX_QUBITS:
        raise ValueError(
            f"tensor product would hold {a.num_qubits + b.num_qubits} qubits (max {MAX_QUBITS})"
        )
    overlap = set(a.subsystems) & set(b.subsystems)
    if overlap:
        raise ValueError(f"subsystem names clash: {sorted(overlap)}")
    return StateVector(np.kron(a.amplitudes, b.amplitudes), a.subsystems + b.subsystems)


def apply_unitary(
    u: Observable | np.ndarray, targets: Sequence[str], state: StateVector
) -> StateVector:
    """Apply a unitary to the named target qubits, identity elsewhere."""
    mat = _as_matrix(u)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"unitary must be square, got shape {mat.shape}")
    if _max_dev(mat.conj().T @ mat, np.eye(mat.shape[0])) > ATOL_ALGEBRA:
        raise ValueError("operator is not unitary within 1e-12")
    positions = _target_positions(state, targets)
    return StateVector(_apply_matrix(mat, positions, state), state.subsystems)


def hadamard() -> np.ndarray:
    """|0> -> (|0>+|1>)/sqrt(2), |1> -> (|0>-|1>)/sqrt(2)."""
    return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)


def phase_gate(phi: float) -> np.ndarray:
    """diag(1, e^{i*phi})."""
    if not math.isfinite(phi):
        raise ValueError("phase must be finite")
    return np.array([[1.0, 0.0], [0.0, np.exp(1j * phi)]], dtype=complex)


def cnot_ancilla_target() -> np.ndarray:
    """CNOT on an (ancilla, partner) pair: the second (low) qubit controls,
    the first (high) qubit is flipped.  |x>|0> -> |x>|0>, |x>|1> -> |x+1 mod 2>|1>.
    """
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1.0  # |00> -> |00>
    m[3, 1] = 1.0  # |01> -> |11>
    m[2, 2] = 1.0  # |10> -> |10>
    m[1, 3] = 1.0  # |11> -> |01>
    return m


def bell_states(subsystems: tuple[str, str] = ("ancilla", "alice")) -> dict[str, StateVector]:
    """The four maximally entangled two-qubit states, keyed per BELL_ORDER."""
    s = 1.0 / math.sqrt(2.0)
    vecs = {
        "phi_plus": np.array([s, 0, 0, s], dtype=complex),
        "phi_minus": np.array([s, 0, 0, -s], dtype=complex),
        "psi_plus": np.array([0, s, s, 0], dtype=complex),
        "psi_minus": np.array([0, s, -s, 0], dtype=complex),
    }
    return {k: StateVector(v, subsystems) for k, v in vecs.items()}


def bell_projectors() -> dict[str, np.ndarray]:
    """Rank-1 projectors onto the four Bell states."""
    return {
        k: np.outer(sv.amplitudes, sv.amplitudes.conj())
        for k, sv in bell_states().items()
    }


def pauli_direction(n: Sequence[float]) -> Observable:
    """Spin observable along the unit 3-vector n: n_x X + n_y Y + n_z Z."""
    v = np.asarray(n, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"direction must be a 3-vector, got shape {v.shape}")
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValueError(f"direction must be a unit vector, |n| = {np.linalg.norm(v)!r}")
    return Observable(v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z)


def expectation(
    m: Observable | np.ndarray, targets: Sequence[str], state: StateVector
) -> float:
    """<state| M |state> with M embedded on the named target qubits.

    Raises if the imaginary residue reaches 1e-10, which would indicate a
    Hermiticity bug rather than rounding noise.
    """
    mat = _as_matrix(m)
    if _max_dev(mat, mat.conj().T) > ATOL_ALGEBRA:
        raise ValueError("expectation requires a Hermitian operator")
    positions = _target_positions(state, targets)
    val = complex(np.vdot(state.amplitudes, _apply_matrix(mat, positions, state)))
    if abs(val.imag) >= ATOL_ACCUM:
        raise ValueError(f"expectation has imaginary residue {val.imag!r}")
    return float(val.real)


def projective_measure(
    state: StateVector,
    targets: Sequence[str],
    projectors: Sequence[np.ndarray],
) -> list[MeasurementBranch]:
    """Measure an orthonormal projector family on the named target qubits.

    The family must resolve the identity on the target subspace.  Branch
    post-states keep the full register; zero-probability branches carry a
    None post-state.
    """
    positions = _target_positions(state, targets)
    k = len(positions)
    dim = 2**k
    mats = [np.asarray(p, dtype=complex) for p in projectors]
    total = np.zeros((dim, dim), dtype=complex)
    for p in mats:
        if p.shape != (dim, dim):
            raise ValueError(f"projector shape {p.shape} does not match target dimension {dim}")
        if _max_dev(p, p.conj().T) > ATOL_ALGEBRA:
            raise ValueError("projectors must be Hermitian")
        total += p
    if _max_dev(total, np.eye(dim)) > ATOL_ALGEBRA:
        raise ValueError("projector family does not sum to the identity within 1e-12")

    branches: list[MeasurementBranch] = []
    for p in mats:
        v = _apply_matrix(p, positions, state)
        prob = float(np.real(np.vdot(v, v)))
        if prob < 1e-14:
            branches.append(MeasurementBranch(0.0, None))
        else:
            branches.append(
                MeasurementBranch(prob, StateVector(v / math.sqrt(prob), state.subsystems))
            )
    total_prob = math.fsum(b.probability for b in branches)
    if abs(total_prob - 1.0) > ATOL_ACCUM:
        raise ValueError(f"measurement probabilities sum to {total_prob!r}, not 1")
    return branches


def partial_project(
    state: StateVector, targets: Sequence[str], bra: np.ndarray
) -> tuple[float, StateVector | None]:
    """Contract a bra vector over the named target qubits.

    Returns (probability, normalized remainder over the untouched subsystems,
    in register order); the remainder is None when the probability vanishes.
    This is the rank-1 special case of ``projective_measure`` used by the
    protocol branch bookkeeping.
    """
    positions = _target_positions(state, targets)
    if len(positions) >= state.num_qubits:
        raise ValueError("partial_project must leave at least one subsystem")
    k = len(positions)
    b = np.asarray(bra, dtype=complex).reshape((2,) * k)
    rest = np.tensordot(b.conj(), state.as_tensor(), axes=(tuple(range(k)), tuple(positions)))
    prob = float(np.real(np.vdot(rest, rest)))
    kept = tuple(n for n in state.subsystems if n not in targets)
    if prob < 1e-14:
        return 0.0, None
    return prob, StateVector(rest.reshape(-1) / math.sqrt(prob), kept)


def partial_trace(obj: StateVector | DensityMatrix, keep: Sequence[str]) -> DensityMatrix:
    """Reduced density matrix over the named subsystems (kept in register order)."""
    keep = tuple(keep)
    if len(keep) == 0:
        raise ValueError("keep set must be non-empty")
    if isinstance(obj, StateVector):
        names = obj.subsystems
        positions = _target_positions(obj, keep)
        if len(positions) >= obj.num_qubits:
            raise ValueError("keep set must be a proper subset of the register")
        kept_axes = sorted(positions)
        traced = [i for i in range(obj.num_qubits) if i not in kept_axes]
        t = obj.as_tensor()
        rho = np.tensordot(t, t.conj(), axes=(traced, traced))
        d = 2 ** len(kept_axes)
        kept_names = tuple(names[i] for i in kept_axes)
        return DensityMatrix(rho.reshape(d, d), kept_names)
    if isinstance(obj, DensityMatrix):
        if obj.subsystems is None:
            raise ValueError("density matrix input needs subsystem labels for partial_trace")
        names = obj.subsystems
        n = len(names)
        missing = [t for t in keep if t not in names]
        if missing:
            raise ValueError(f"no subsystem {missing[0]!r} in register {names}")
        kept_axes = sorted(names.index(t) for t in keep)
        if len(kept_axes) != len(keep) or len(kept_axes) >= n:
            raise ValueError("keep set must be a distinct proper subset of the register")
        t = obj.matrix.reshape((2,) * (2 * n))
        for ax in reversed([i for i in range(n) if i not in kept_axes]):
            t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
        d = 2 ** len(kept_axes)
        return DensityMatrix(t.reshape(d, d), tuple(names[i] for i in kept_axes))
    raise TypeError(f"cannot take partial trace of {type(obj).__name__}")


def fidelity_pure(target: StateVector, rho: DensityMatrix) -> float:
    """<target| rho |target>, clamped into [0, 1]."""
    if rho.dim != 2**target.num_qubits:
        raise ValueError(f"dimension mismatch: state dim {2**target.num_qubits}, rho dim {rho.dim}")
    v = target.amplitudes
    val = complex(np.vdot(v, rho.matrix @ v))
    if abs(val.imag) >= ATOL_ACCUM:
        raise ValueError(f"fidelity has imaginary residue {val.imag!r}")
    f = val.real
    if f < -ATOL_ACCUM or f > 1.0 + ATOL_ACCUM:
        raise ValueError(f"fidelity {f!r} outside [0, 1]")
    return float(min(max(f, 0.0), 1.0))


def state_fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for two pure states of equal dimension."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states live on different register sizes")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
