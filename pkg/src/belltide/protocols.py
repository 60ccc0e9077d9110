"""The three information-transfer protocols, end to end.

Each ``run_*`` function stages the joint state, performs the protocol
measurement, and reports every outcome branch with its probability and
Bob's conditional state before and after his classical-bit-driven
correction.  All branch probabilities and states are exact.

Register conventions: the shared pair is ("alice", "bob"); when Alice holds
an extra qubit the full register is ("ancilla", "alice", "bob").
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .qcore import (
    SIGMA_X,
    SIGMA_Z,
    StateVector,
    apply_unitary,
    bell_states,
    cnot_ancilla_target,
    hadamard,
    partial_project,
    phase_gate,
    state_fidelity,
    tensor,
)

SCHEME_TELEPORT = "teleport"
SCHEME_RSP_VN = "rsp_vn"
SCHEME_RSP_BELL = "rsp_bell"

_CLASSICAL_BITS = {SCHEME_TELEPORT: 2, SCHEME_RSP_VN: 1, SCHEME_RSP_BELL: 1}

# Bob's pre-agreed correction for each Bell outcome of a teleportation.
# This is the unique assignment out of {I, X, Z, XZ} per branch that restores
# the input on every branch when the resource pair is maximally entangled.
TELEPORT_CORRECTIONS: dict[str, np.ndarray] = {
    "phi_plus": np.eye(2, dtype=complex),
    "phi_minus": SIGMA_Z.copy(),
    "psi_plus": SIGMA_X.copy(),
    "psi_minus": SIGMA_X @ SIGMA_Z,
}

# For both RSP schemes the only correction is a phase flip on the "minus" pair.
PHASE_FLIP = SIGMA_Z.copy()
RSP_BELL_FLIP_BRANCHES = ("phi_minus", "psi_minus")


@dataclass(frozen=True)
class AncillaState:
    """Single-qubit state a|0> + b|1> held at Alice's end.

    Serves both as the helper qubit of the Bell-measurement RSP scheme and
    as the input state of a teleportation.
    """

    a: complex
    b: complex

    def __post_init__(self) -> None:
        a, b = complex(self.a), complex(self.b)
        if not (cmath.isfinite(a) and cmath.isfinite(b)):
            raise ValueError("ancilla amplitudes must be finite")
        norm2 = abs(a) ** 2 + abs(b) ** 2
        if abs(norm2 - 1.0) > 1e-12:
            raise ValueError(f"ancilla norm^2 {norm2!r} deviates from 1 beyond 1e-12")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def basis_zero(cls) -> AncillaState:
        return cls(1.0, 0.0)

    @classmethod
    def from_bloch(cls, polar: float, azimuth: float) -> AncillaState:
        """cos(polar/2)|0> + e^{i*azimuth} sin(polar/2)|1>."""
        return cls(math.cos(polar / 2.0), cmath.exp(1j * azimuth) * math.sin(polar / 2.0))

    def as_state(self, name: str = "ancilla") -> StateVector:
        return StateVector(np.array([self.a, self.b], dtype=complex), (name,))


@dataclass(frozen=True)
class Branch:
    """One measurement outcome with Bob's conditional states.

    Zero-probability branches carry None states and probability 0.
    """

    label: str
    probability: float
    bob_pre_correction: StateVector | None
    bob_post_correction: StateVector | None


@dataclass(frozen=True)
class ProtocolRun:
    scheme: str
    branches: tuple[Branch, ...]
    classical_bits: int

    def __post_init__(self) -> None:
        if self.scheme not in _CLASSICAL_BITS:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.classical_bits != _CLASSICAL_BITS[self.scheme]:
            raise ValueError(
                f"{self.scheme} sends {_CLASSICAL_BITS[self.scheme]} classical bit(s), "
                f"not {self.classical_bits}"
            )
        total = math.fsum(b.probability for b in self.branches)
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"branch probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "branches", tuple(self.branches))

    def branch(self, label: str) -> Branch:
        for b in self.branches:
            if b.label == label:
                return b
        raise KeyError(label)


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not math.isfinite(theta) or not 0.0 <= theta <= math.pi / 4.0 + 1e-15:
        raise ValueError(f"entanglement angle must lie in [0, pi/4], got {theta!r}")
    return theta


def resource_state(theta: float) -> StateVector:
    """The shared pair cos(theta)|00> + sin(theta)|11> on ("alice", "bob")."""
    theta = _check_theta(theta)
    amps = np.array([math.cos(theta), 0.0, 0.0, math.sin(theta)], dtype=complex)
    return StateVector(amps, ("alice", "bob"))


def target_state(theta: float, phi: float) -> StateVector:
    """The state cos(theta)|0> + e^{i*phi} sin(theta)|1> Alice wants at Bob's end."""
    theta = _check_theta(theta)
    amps = np.array([math.cos(theta), cmath.exp(1j * phi) * math.sin(theta)], dtype=complex)
    return StateVector(amps, ("bob",))


def stage_rsp_vn(theta: float, phi: float) -> StateVector:
    """Joint state after Alice's phase rotation and Hadamard, before she measures."""
    staged = apply_unitary(phase_gate(phi), ("alice",), resource_state(theta))
    return apply_unitary(hadamard(), ("alice",), staged)


def _apply_correction(bob: StateVector | None, correction: np.ndarray) -> StateVector | None:
    if bob is None:
        return None
    return StateVector(correction @ bob.amplitudes, bob.subsystems)


def run_rsp_vn(theta: float, phi: float) -> ProtocolRun:
    """Alice measures her qubit in the computational basis; outcome -1 means
    Bob applies the phase flip."""
    staged = stage_rsp_vn(theta, phi)
    basis = (("+1", np.array([1.0, 0.0]), False), ("-1", np.array([0.0, 1.0]), True))
    branches = []
    for label, bra, flip in basis:
        prob, bob = partial_project(staged, ("alice",), bra)
        post = _apply_correction(bob, PHASE_FLIP) if flip else bob
        branches.append(Branch(label, prob, bob, post))
    return ProtocolRun(SCHEME_RSP_VN, tuple(branches), classical_bits=1)


def stage_rsp_bell(
    theta: float, phi: float, ancilla: AncillaState | None = None
) -> StateVector:
    """Ancilla adjoined and CNOT applied after Alice's phase rotation.

    The ancilla defaults to |0>; the eventual outcome statistics are
    independent of it once outcomes are paired.
    """
    if ancilla is None:
        ancilla = AncillaState.basis_zero()
    rotated = apply_unitary(phase_gate(phi), ("alice",), resource_state(theta))
    joint = tensor(ancilla.as_state("ancilla"), rotated)
    return apply_unitary(cnot_ancilla_target(), ("ancilla", "alice"), joint)


def run_rsp_bell(
    theta: float, phi: float, ancilla: AncillaState | None = None
) -> ProtocolRun:
    """Alice Bell-measures (ancilla, her qubit); Bob phase-flips on the
    "minus" pair of outcomes.  One bit suffices because the two outcomes in
    each pair leave Bob in the same conditional state."""
    staged = stage_rsp_bell(theta, phi, ancilla)
    branches = []
    for label, bell in bell_states().items():
        prob, bob = partial_project(staged, ("ancilla", "alice"), bell.amplitudes)
        post = _apply_correction(bob, PHASE_FLIP) if label in RSP_BELL_FLIP_BRANCHES else bob
        branches.append(Branch(label, prob, bob, post))
    return ProtocolRun(SCHEME_RSP_BELL, tuple(branches), classical_bits=1)


def run_teleport(theta: float, eta: AncillaState) -> ProtocolRun:
    """Teleport ``eta`` through the shared pair, keeping the standard
    correction strategy fixed by the maximally entangled case."""
    joint = tensor(eta.as_state("ancilla"), resource_state(theta))
    branches = []
    for label, bell in bell_states().items():
        prob, bob = partial_project(joint, ("ancilla", "alice"), bell.amplitudes)
        post = _apply_correction(bob, TELEPORT_CORRECTIONS[label])
        branches.append(Branch(label, prob, bob, post))
    return ProtocolRun(SCHEME_TELEPORT, tuple(branches), classical_bits=2)


def transfer_fidelity(run: ProtocolRun, target: StateVector) -> float:
    """Probability-weighted overlap of the corrected branches with a target."""
    return math.fsum(
        b.probability * state_fidelity(target, b.bob_post_correction)
        for b in run.branches
        if b.bob_post_correction is not None
    )


def paired_probabilities(run: ProtocolRun) -> tuple[float, float]:
    """(P[plus pair], P[minus pair]) for a Bell-measurement RSP run."""
    if run.scheme != SCHEME_RSP_BELL:
        raise ValueError("outcome pairing applies to the Bell-measurement RSP scheme")
    plus = run.branch("phi_plus").probability + run.branch("psi_plus").probability
    minus = run.branch("phi_minus").probability + run.branch("psi_minus").probability
    return plus, minus


def teleport_fidelity_closed(theta: float) -> float:
    """Input-averaged teleportation fidelity (2/3)(1 + sin(theta)cos(theta)).

    This polynomial form equals the textbook ratio
    (2/3)(cos^3 - sin^3)/(cos - sin) wherever the latter is defined and
    extends it across its removable singularity at theta = pi/4;
    see the algebraic-identity test in the suite.
    """
    theta = _check_theta(theta)
    return (2.0 / 3.0) * (1.0 + math.sin(theta) * math.cos(theta))


def bloch_sphere_grid(nodes: int) -> np.ndarray:
    """Deterministic equal-area (polar, azimuth) grid on the sphere.

    Midpoint slices in cos(polar) with golden-angle azimuths: the classic
    Fibonacci sphere lattice, reproducible for a given node count.
    """
    if nodes < 1:
        raise ValueError("node count must be positive")
    k = np.arange(nodes)
    z = 1.0 - (2.0 * k + 1.0) / nodes
    polar = np.arccos(np.clip(z, -1.0, 1.0))
    golden_angle = math.pi * (3.0 - math.sqrt(5.0))
    azimuth = np.mod(k * golden_angle, 2.0 * math.pi)
    return np.column_stack([polar, azimuth])


def teleport_fidelity_numeric(theta: float, nodes: int = 10_000) -> float:
    """Average transfer fidelity over a deterministic spherical input grid.

    Runs the full protocol per grid node; the node sum uses exact
    (compensated) summation, so the result is independent of any split of
    the node set.
    """
    theta = _check_theta(theta)
    terms = []
    for polar, azimuth in bloch_sphere_grid(nodes):
        eta = AncillaState.from_bloch(polar, azimuth)
        run = run_teleport(theta, eta)
        terms.append(transfer_fidelity(run, eta.as_state("bob")))
    return math.fsum(terms) / float(nodes)
