"""Local-realist correlators for the three protocols, evaluated exactly.

Two families are covered for each protocol: a CHSH-type expression with two
settings per side, and an I3322-type expression written in joint/marginal
probabilities of the -1 outcomes with three settings per side.  Alice's
"setting" is always her protocol-level freedom (the input state she feeds a
teleportation, or the phase she dials into an RSP staging); Bob's settings
are spin directions.

``Scenario`` packages one correlator at a fixed entanglement angle as a
function of a flat settings vector, which is what the optimizer consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .protocols import (
    AncillaState,
    resource_state,
    stage_rsp_bell,
    stage_rsp_vn,
)
from .qcore import (
    SIGMA_Z,
    Observable,
    StateVector,
    bell_projectors,
    expectation,
    partial_trace,
    pauli_direction,
    tensor,
)

TSIRELSON = 2.0 * math.sqrt(2.0)

TELE_CHSH = "tele-chsh"
RSP_VN_CHSH = "rsp-vn-chsh"
RSP_BELL_CHSH = "rsp-bell-chsh"
TELE_I3322 = "tele-i3322"
RSP_VN_I3322 = "rsp-vn-i3322"
RSP_BELL_I3322 = "rsp-bell-i3322"

CHSH_KINDS = (TELE_CHSH, RSP_VN_CHSH, RSP_BELL_CHSH)
I3322_KINDS = (TELE_I3322, RSP_VN_I3322, RSP_BELL_I3322)
SCENARIO_KINDS = CHSH_KINDS + I3322_KINDS

# Signs over the Bell projectors in order (phi+, phi-, psi+, psi-).
_A1_SIGNS = (-1, +1, -1, +1)
_A2_SIGNS = (+1, -1, -1, +1)


def _bell_combination(signs: Sequence[int]) -> Observable:
    projs = bell_projectors()
    keys = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")
    m = sum(s * projs[k] for s, k in zip(signs, keys))
    return Observable(m)


@lru_cache(maxsize=None)
def observable_a1() -> Observable:
    """Alice's first +-1 readout of a Bell measurement: +1 on the "minus"
    Bell states.  Equals -X(x)X as a matrix."""
    return _bell_combination(_A1_SIGNS)


@lru_cache(maxsize=None)
def observable_a2() -> Observable:
    """Alice's second +-1 readout: +1 on {phi+, psi-}.  Equals -Y(x)Y."""
    return _bell_combination(_A2_SIGNS)


def direction(polar: float, azimuth: float) -> np.ndarray:
    """Unit 3-vector at the given spherical angles."""
    sp = math.sin(polar)
    return np.array([sp * math.cos(azimuth), sp * math.sin(azimuth), math.cos(polar)])


def _joint_op(a: Observable, b: Observable) -> np.ndarray:
    return np.kron(a.matrix, b.matrix)


def chsh_teleport(
    theta: float,
    eta1: AncillaState,
    eta2: AncillaState,
    n1: Sequence[float],
    n2: Sequence[float],
) -> float:
    """CHSH-type correlator of a teleportation: Alice reads her first Bell
    observable while feeding eta1 and her second while feeding eta2; Bob
    measures spin along n1 or n2."""
    shared = resource_state(theta)
    s1 = tensor(eta1.as_state("ancilla"), shared)
    s2 = tensor(eta2.as_state("ancilla"), shared)
    a1, a2 = observable_a1(), observable_a2()
    o1, o2 = pauli_direction(n1), pauli_direction(n2)
    reg = ("ancilla", "alice", "bob")
    val = (
        expectation(_joint_op(a1, o1), reg, s1)
        + expectation(_joint_op(a1, o2), reg, s1)
        + expectation(_joint_op(a2, o1), reg, s2)
        - expectation(_joint_op(a2, o2), reg, s2)
    )
    return abs(val)


def chsh_rsp_vn(
    theta: float, phi1: float, phi2: float, n1: Sequence[float], n2: Sequence[float]
) -> float:
    """CHSH-type correlator of the projective-measurement RSP scheme: Alice's
    observable is fixed to Z on her qubit, her setting is the staged phase."""
    s1 = stage_rsp_vn(theta, phi1)
    s2 = stage_rsp_vn(theta, phi2)
    z = Observable(SIGMA_Z)
    o1, o2 = pauli_direction(n1), pauli_direction(n2)
    reg = ("alice", "bob")
    val = (
        expectation(_joint_op(z, o1), reg, s1)
        + expectation(_joint_op(z, o2), reg, s1)
        + expectation(_joint_op(z, o1), reg, s2)
        - expectation(_joint_op(z, o2), reg, s2)
    )
    return abs(val)


def chsh_rsp_bell(
    theta: float,
    phi1: float,
    phi2: float,
    n1: Sequence[float],
    n2: Sequence[float],
    ancilla: AncillaState | None = None,
) -> float:
    """CHSH-type correlator of the Bell-measurement RSP scheme: Alice reads
    her first Bell observable on the phi1 staging and her second on the phi2
    staging.

    The helper qubit defaults to |0>, matching the protocol staging.  Note
    that the maximum over settings does depend on the helper: the second
    readout weights the two outcomes of each communicated pair oppositely,
    giving max = 2 sin(2 theta) sqrt(1 + w^2) with w the helper's population
    imbalance (so basis helpers recover the 2 sqrt(2) sin(2 theta) curve)."""
    s1 = stage_rsp_bell(theta, phi1, ancilla)
    s2 = stage_rsp_bell(theta, phi2, ancilla)
    a1, a2 = observable_a1(), observable_a2()
    o1, o2 = pauli_direction(n1), pauli_direction(n2)
    reg = ("ancilla", "alice", "bob")
    val = (
        expectation(_joint_op(a1, o1), reg, s1)
        + expectation(_joint_op(a1, o2), reg, s1)
        + expectation(_joint_op(a2, o1), reg, s2)
        - expectation(_joint_op(a2, o2), reg, s2)
    )
    return abs(val)


def joint_prob_minus_minus(
    mA: Observable,
    targetsA: Sequence[str],
    mB: Observable,
    targetsB: Sequence[str],
    s: StateVector,
) -> float:
    """P(A = -1 and B = -1) for bivalent observables on disjoint subsystems."""
    pa, pb = mA.minus_projector(), mB.minus_projector()
    return expectation(np.kron(pa, pb), tuple(targetsA) + tuple(targetsB), s)


def _marginal_minus_prob(obs: Observable, state: StateVector, keep: Sequence[str]) -> float:
    """P(M = -1) on the reduced state over ``keep``."""
    rho = partial_trace(state, keep)
    val = complex(np.trace(rho.matrix @ obs.minus_projector()))
    return float(val.real)


_I3322_JOINT_SIGNS = (
    # (alice setting index, bob setting index, sign)
    (0, 0, +1.0),
    (1, 0, +1.0),
    (2, 0, +1.0),
    (0, 1, +1.0),
    (1, 1, +1.0),
    (2, 1, -1.0),
    (0, 2, +1.0),
    (1, 2, -1.0),
)


def _i3322_value(
    states: Sequence[StateVector],
    alice_obs: Sequence[Observable],
    alice_targets: Sequence[str],
    bob_obs: Sequence[Observable],
    alice_marginal_keep: Sequence[str],
) -> float:
    """Shared I3322 template over three per-setting staged states.

    Joint terms are P(-1, -1) probabilities; the marginal terms use the first
    setting's state, with weights -1 (Alice), -2 (Bob's first), -1 (Bob's
    second).  The local-realist bound of this combination is 0.
    """
    terms = [
        sign
        * joint_prob_minus_minus(
            alice_obs[i], alice_targets, bob_obs[k], ("bob",), states[i]
        )
        for i, k, sign in _I3322_JOINT_SIGNS
    ]
    terms.append(-_marginal_minus_prob(alice_obs[0], states[0], alice_marginal_keep))
    terms.append(-2.0 * _marginal_minus_prob(bob_obs[0], states[0], ("bob",)))
    terms.append(-_marginal_minus_prob(bob_obs[1], states[0], ("bob",)))
    return math.fsum(terms)


def i3322_teleport(
    theta: float,
    eta1: AncillaState,
    eta2: AncillaState,
    eta3: AncillaState,
    n1: Sequence[float],
    n2: Sequence[float],
    n3: Sequence[float],
) -> float:
    """I3322-type correlator of a teleportation: Alice reads her first Bell
    observable while feeding eta1 or eta2 and her second while feeding eta3."""
    shared = resource_state(theta)
    states = [tensor(e.as_state("ancilla"), shared) for e in (eta1, eta2, eta3)]
    alice_obs = (observable_a1(), observable_a1(), observable_a2())
    bob_obs = tuple(pauli_direction(n) for n in (n1, n2, n3))
    return _i3322_value(states, alice_obs, ("ancilla", "alice"), bob_obs, ("ancilla", "alice"))


def i3322_rsp_vn(
    theta: float,
    phi1: float,
    phi2: float,
    phi3: float,
    n1: Sequence[float],
    n2: Sequence[float],
    n3: Sequence[float],
) -> float:
    """I3322-type correlator of the projective-measurement RSP scheme: all
    three Alice settings measure Z on stagings with three different phases."""
    states = [stage_rsp_vn(theta, p) for p in (phi1, phi2, phi3)]
    z = Observable(SIGMA_Z)
    bob_obs = tuple(pauli_direction(n) for n in (n1, n2, n3))
    return _i3322_value(states, (z, z, z), ("alice",), bob_obs, ("alice",))


def i3322_rsp_bell(
    theta: float,
    phi1: float,
    phi2: float,
    phi3: float,
    n1: Sequence[float],
    n2: Sequence[float],
    n3: Sequence[float],
) -> float:
    """I3322-type correlator of the Bell-measurement RSP scheme, mirroring the
    teleportation observable pattern (first, first, second) over three staged
    phases with the helper qubit fixed to |0>."""
    states = [stage_rsp_bell(theta, p) for p in (phi1, phi2, phi3)]
    alice_obs = (observable_a1(), observable_a1(), observable_a2())
    bob_obs = tuple(pauli_direction(n) for n in (n1, n2, n3))
    return _i3322_value(states, alice_obs, ("ancilla", "alice"), bob_obs, ("ancilla", "alice"))


# --- fast evaluation path -----------------------------------------------------
#
# The optimizer calls the correlators hundreds of thousands of times, so
# Scenario.evaluate uses closures over precomputed matrices and skips the
# per-call input validation of the reference functions above.  The two routes
# are pinned together by equivalence tests at 1e-12.

_I2 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def _sigma(n: np.ndarray) -> np.ndarray:
    return n[0] * _SX + n[1] * _SY + n[2] * _SZ


def _pair_matrix(state: np.ndarray, a_mat: np.ndarray) -> np.ndarray:
    """E^dag A E for the state reshaped as an (dim_A, 2) matrix E, so that
    <A (x) B> = sum_{jl} (E^dag A E)_{jl} B_{jl} for any Bob operator B."""
    e = state.reshape(a_mat.shape[0], 2)
    return e.conj().T @ (a_mat @ e)


def _bob_term(m: np.ndarray, b: np.ndarray) -> float:
    return float((m * b).sum().real)


def _vn_staged(theta: float, phi: float) -> np.ndarray:
    c = math.cos(theta) / math.sqrt(2.0)
    s = math.sin(theta) * np.exp(1j * phi) / math.sqrt(2.0)
    return np.array([c, s, c, -s], dtype=complex)


def _bell_staged(theta: float, phi: float) -> np.ndarray:
    out = np.zeros(8, dtype=complex)
    out[0] = math.cos(theta)
    out[7] = math.sin(theta) * np.exp(1j * phi)
    return out


def _bloch_vec(polar: float, azimuth: float) -> np.ndarray:
    return np.array(
        [math.cos(polar / 2.0), np.exp(1j * azimuth) * math.sin(polar / 2.0)], dtype=complex
    )


def _chsh_core(states: tuple, alice_ops: tuple, sigmas: tuple) -> float:
    m1 = _pair_matrix(states[0], alice_ops[0])
    m2 = _pair_matrix(states[1], alice_ops[1])
    o1, o2 = sigmas
    return abs(
        _bob_term(m1, o1) + _bob_term(m1, o2) + _bob_term(m2, o1) - _bob_term(m2, o2)
    )


def _i3322_core(states: tuple, alice_proj: tuple, bob_proj: tuple) -> float:
    ms = [_pair_matrix(states[i], alice_proj[i]) for i in range(3)]
    gram0 = _pair_matrix(states[0], np.eye(alice_proj[0].shape[0]))
    terms = [sign * _bob_term(ms[i], bob_proj[k]) for i, k, sign in _I3322_JOINT_SIGNS]
    terms.append(-float(np.trace(ms[0]).real))
    terms.append(-2.0 * _bob_term(gram0, bob_proj[0]))
    terms.append(-_bob_term(gram0, bob_proj[1]))
    return math.fsum(terms)


@lru_cache(maxsize=64)
def _make_evaluator(kind: str, theta: float):
    a1 = np.asarray(observable_a1().matrix)
    a2 = np.asarray(observable_a2().matrix)
    pa1 = (np.eye(4) - a1) / 2.0
    pa2 = (np.eye(4) - a2) / 2.0
    pz = (np.eye(2) - _SZ) / 2.0
    d_amp = np.array([math.cos(theta), 0.0, 0.0, math.sin(theta)], dtype=complex)

    def _dirs(x: np.ndarray, start: int, count: int) -> tuple:
        return tuple(
            _sigma(direction(x[start + 2 * j], x[start + 2 * j + 1])) for j in range(count)
        )

    if kind == TELE_CHSH:

        def ev(x: np.ndarray) -> float:
            st = tuple(np.kron(_bloch_vec(x[2 * j], x[2 * j + 1]), d_amp) for j in range(2))
            return _chsh_core(st, (a1, a2), _dirs(x, 4, 2))

    elif kind == RSP_VN_CHSH:

        def ev(x: np.ndarray) -> float:
            st = (_vn_staged(theta, x[0]), _vn_staged(theta, x[1]))
            return _chsh_core(st, (_SZ, _SZ), _dirs(x, 2, 2))

    elif kind == RSP_BELL_CHSH:

        def ev(x: np.ndarray) -> float:
            st = (_bell_staged(theta, x[0]), _bell_staged(theta, x[1]))
            return _chsh_core(st, (a1, a2), _dirs(x, 2, 2))

    elif kind == TELE_I3322:

        def ev(x: np.ndarray) -> float:
            st = tuple(np.kron(_bloch_vec(x[2 * j], x[2 * j + 1]), d_amp) for j in range(3))
            sig = _dirs(x, 6, 3)
            return _i3322_core(st, (pa1, pa1, pa2), tuple((_I2 - s) / 2.0 for s in sig))

    elif kind == RSP_VN_I3322:

        def ev(x: np.ndarray) -> float:
            st = tuple(_vn_staged(theta, x[j]) for j in range(3))
            sig = _dirs(x, 3, 3)
            return _i3322_core(st, (pz, pz, pz), tuple((_I2 - s) / 2.0 for s in sig))

    elif kind == RSP_BELL_I3322:

        def ev(x: np.ndarray) -> float:
            st = tuple(_bell_staged(theta, x[j]) for j in range(3))
            sig = _dirs(x, 3, 3)
            return _i3322_core(st, (pa1, pa1, pa2), tuple((_I2 - s) / 2.0 for s in sig))

    else:
        raise ValueError(f"unknown scenario kind {kind!r}")

    return ev


# --- settings-vector plumbing -------------------------------------------------

_POLAR = "polar"
_AZIMUTH = "azimuth"  # periodic mod 2*pi; phase settings share this kind


def _bloch_pair(prefix: str) -> tuple[tuple[str, str], ...]:
    return ((f"{prefix}_polar", _POLAR), (f"{prefix}_azimuth", _AZIMUTH))


_LAYOUTS: dict[str, tuple[tuple[str, str], ...]] = {
    TELE_CHSH: _bloch_pair("eta1") + _bloch_pair("eta2") + _bloch_pair("n1") + _bloch_pair("n2"),
    RSP_VN_CHSH: (("phi1", _AZIMUTH), ("phi2", _AZIMUTH)) + _bloch_pair("n1") + _bloch_pair("n2"),
    RSP_BELL_CHSH: (("phi1", _AZIMUTH), ("phi2", _AZIMUTH)) + _bloch_pair("n1") + _bloch_pair("n2"),
    TELE_I3322: (
        _bloch_pair("eta1") + _bloch_pair("eta2") + _bloch_pair("eta3")
        + _bloch_pair("n1") + _bloch_pair("n2") + _bloch_pair("n3")
    ),
    RSP_VN_I3322: (
        (("phi1", _AZIMUTH), ("phi2", _AZIMUTH), ("phi3", _AZIMUTH))
        + _bloch_pair("n1") + _bloch_pair("n2") + _bloch_pair("n3")
    ),
    RSP_BELL_I3322: (
        (("phi1", _AZIMUTH), ("phi2", _AZIMUTH), ("phi3", _AZIMUTH))
        + _bloch_pair("n1") + _bloch_pair("n2") + _bloch_pair("n3")
    ),
}

TWO_PI = 2.0 * math.pi

_PERIODIC_MASKS = {
    kind: np.array([pkind == _AZIMUTH for _, pkind in layout])
    for kind, layout in _LAYOUTS.items()
}


@dataclass(frozen=True)
class Scenario:
    """One correlator at fixed entanglement angle, as a function of a flat
    real settings vector (Bloch angles and phases, in radians)."""

    kind: str
    theta: float

    def __post_init__(self) -> None:
        if self.kind not in _LAYOUTS:
            raise ValueError(f"unknown scenario kind {self.kind!r}; use one of {SCENARIO_KINDS}")
        theta = float(self.theta)
        if not math.isfinite(theta) or not 0.0 <= theta <= math.pi / 4.0 + 1e-15:
            raise ValueError(f"entanglement angle must lie in [0, pi/4], got {theta!r}")
        object.__setattr__(self, "theta", theta)

    @property
    def layout(self) -> tuple[tuple[str, str], ...]:
        return _LAYOUTS[self.kind]

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.layout)

    @property
    def dim(self) -> int:
        return len(self.layout)

    @property
    def is_chsh(self) -> bool:
        return self.kind in CHSH_KINDS

    @property
    def ceiling(self) -> float | None:
        """Quantum ceiling on |value| for CHSH kinds; None otherwise."""
        return TSIRELSON if self.is_chsh else None

    def canonicalize(self, settings: Sequence[float]) -> np.ndarray:
        """Map settings into the canonical box: azimuths and phases wrapped
        into [0, 2*pi), polars folded into [0, pi].

        Folding a polar angle past pi reflects it back and advances its paired
        azimuth by pi, which covers the same point of the sphere, so canonical
        settings always reproduce the raw value (up to a physically irrelevant
        global phase of the parametrized state).
        """
        x = np.asarray(settings, dtype=float).reshape(-1)
        if x.shape != (self.dim,):
            raise ValueError(f"{self.kind} takes {self.dim} settings, got {x.shape}")
        out = x.copy()
        layout = self.layout
        for i, (_, pkind) in enumerate(layout):
            if pkind != _POLAR:
                continue
            p = out[i] % TWO_PI
            if p > math.pi:
                p = TWO_PI - p
                out[i + 1] += math.pi  # layouts always pair polar with azimuth
            out[i] = p
        mask = _PERIODIC_MASKS[self.kind]
        out[mask] = np.mod(out[mask], TWO_PI)
        return out

    def evaluate(self, settings: Sequence[float]) -> float:
        """Exact correlator value at the given settings (fast closed path;
        agrees with ``reference_evaluate`` to 1e-12)."""
        return _make_evaluator(self.kind, self.theta)(self.canonicalize(settings))

    def periodic_evaluator(self):
        """Raw evaluation closure over uncanonicalized angles.

        The correlators are smooth periodic functions of every parameter and
        any real (polar, azimuth) pair still names a point of the sphere, so
        this extension takes exactly the same values as ``evaluate`` while
        sparing the optimizer a canonicalization per call.
        """
        return _make_evaluator(self.kind, self.theta)

    def reference_evaluate(self, settings: Sequence[float]) -> float:
        """Same value through the validated protocol/correlator functions."""
        x = self.canonicalize(settings)
        t = self.theta
        if self.kind == TELE_CHSH:
            return chsh_teleport(
                t,
                AncillaState.from_bloch(x[0], x[1]),
                AncillaState.from_bloch(x[2], x[3]),
                direction(x[4], x[5]),
                direction(x[6], x[7]),
            )
        if self.kind == RSP_VN_CHSH:
            return chsh_rsp_vn(t, x[0], x[1], direction(x[2], x[3]), direction(x[4], x[5]))
        if self.kind == RSP_BELL_CHSH:
            return chsh_rsp_bell(t, x[0], x[1], direction(x[2], x[3]), direction(x[4], x[5]))
        if self.kind == TELE_I3322:
            return i3322_teleport(
                t,
                AncillaState.from_bloch(x[0], x[1]),
                AncillaState.from_bloch(x[2], x[3]),
                AncillaState.from_bloch(x[4], x[5]),
                direction(x[6], x[7]),
                direction(x[8], x[9]),
                direction(x[10], x[11]),
            )
        if self.kind == RSP_VN_I3322:
            return i3322_rsp_vn(
                t, x[0], x[1], x[2],
                direction(x[3], x[4]), direction(x[5], x[6]), direction(x[7], x[8]),
            )
        return i3322_rsp_bell(
            t, x[0], x[1], x[2],
            direction(x[3], x[4]), direction(x[5], x[6]), direction(x[7], x[8]),
        )


@dataclass(frozen=True)
class CorrelatorResult:
    """Outcome of maximizing one scenario over its settings."""

    scenario: Scenario
    value: float
    settings: np.ndarray
    evaluations: int
    converged: bool
    seed_best: float
    run_values: tuple[float, ...]

    def __post_init__(self) -> None:
        x = np.asarray(self.settings, dtype=float)
        x.setflags(write=False)
        object.__setattr__(self, "settings", x)
        ceiling = self.scenario.ceiling
        if ceiling is not None and abs(self.value) > ceiling + 1e-9:
            raise ValueError(
                f"CHSH value {self.value!r} exceeds the quantum ceiling {ceiling!r}"
            )
