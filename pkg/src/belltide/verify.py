"""Self-contained verification suites bundled behind ``belltide verify``.

Each suite re-checks one family of guarantees the library is built on:
protocol determinism, the fidelity quadrature against the closed form, the
overlap of the three maximized CHSH curves, the quantum ceiling on CHSH
values, and the ancilla independence of the Bell-measurement RSP scheme.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .correlators import CHSH_KINDS, TSIRELSON, Scenario
from .optimizer import OptimizerConfig, maximize, sweep
from .protocols import (
    AncillaState,
    paired_probabilities,
    run_rsp_bell,
    run_rsp_vn,
    run_teleport,
    target_state,
    teleport_fidelity_closed,
    teleport_fidelity_numeric,
    transfer_fidelity,
)
from .qcore import state_fidelity

QUARTER_PI = math.pi / 4.0


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _random_ancilla(rng: np.random.Generator) -> AncillaState:
    return AncillaState.from_bloch(rng.uniform(0.0, math.pi), rng.uniform(0.0, 2.0 * math.pi))


def suite_protocol_determinism(seed: int, quick: bool) -> SuiteResult:
    """Both RSP schemes always deliver the target state; teleportation is
    exact at maximal entanglement."""
    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.Philox(seed))
    trials = 150 if quick else 1000
    floor = 1.0 - 1e-10
    for i in range(trials):
        theta = rng.uniform(0.0, QUARTER_PI)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        tgt = target_state(theta, phi)
        for b in run_rsp_vn(theta, phi).branches:
            f = state_fidelity(tgt, b.bob_post_correction)
            if f < floor:
                return SuiteResult(
                    "protocol-determinism", False,
                    f"rsp_vn fidelity {f!r} below {floor} at trial {i}", time.perf_counter() - t0)
        run_b = run_rsp_bell(theta, phi, _random_ancilla(rng))
        for b in run_b.branches:
            if b.bob_post_correction is None:
                continue
            f = state_fidelity(tgt, b.bob_post_correction)
            if f < floor:
                return SuiteResult(
                    "protocol-determinism", False,
                    f"rsp_bell fidelity {f!r} below {floor} at trial {i}", time.perf_counter() - t0)
    for i in range(trials // 4 + 1):
        eta = _random_ancilla(rng)
        f = transfer_fidelity(run_teleport(QUARTER_PI, eta), eta.as_state("bob"))
        if abs(f - 1.0) > 1e-12:
            return SuiteResult(
                "protocol-determinism", False,
                f"teleport fidelity {f!r} != 1 at maximal entanglement (trial {i})",
                time.perf_counter() - t0)
    return SuiteResult("protocol-determinism", True,
                       f"{trials} random runs per scheme", time.perf_counter() - t0)


def suite_fidelity_oracle(quick: bool) -> SuiteResult:
    """Spherical-grid quadrature reproduces the closed-form fidelity."""
    t0 = time.perf_counter()
    points = 9 if quick else 50
    nodes = 2000 if quick else 10_000
    worst = 0.0
    for theta in np.linspace(0.0, QUARTER_PI, points):
        dev = abs(teleport_fidelity_numeric(float(theta), nodes) - teleport_fidelity_closed(float(theta)))
        worst = max(worst, dev)
        if dev >= 1e-6:
            return SuiteResult("fidelity-oracle", False,
                               f"quadrature off by {dev:.3e} at theta={theta:.4f}",
                               time.perf_counter() - t0)
    return SuiteResult("fidelity-oracle", True,
                       f"worst |closed - numeric| = {worst:.2e} over {points} angles",
                       time.perf_counter() - t0)


def _verify_config(seed: int, quick: bool) -> OptimizerConfig:
    if quick:
        return OptimizerConfig(restarts=6, rng_seed=seed, max_grid_seeds=512)
    return OptimizerConfig(rng_seed=seed)


def suite_curve_overlap(seed: int, quick: bool) -> SuiteResult:
    """The three maximized CHSH curves coincide pointwise."""
    t0 = time.perf_counter()
    steps = 9 if quick else 33
    config = _verify_config(seed, quick)
    sweeps = [sweep(kind, 0.0, QUARTER_PI, steps, config) for kind in CHSH_KINDS]
    worst = 0.0
    for i in range(len(sweeps)):
        for j in range(i + 1, len(sweeps)):
            dev = float(np.max(np.abs(sweeps[i].values - sweeps[j].values)))
            worst = max(worst, dev)
            if dev >= 5e-3:
                return SuiteResult(
                    "curve-overlap", False,
                    f"{sweeps[i].kind} and {sweeps[j].kind} differ by {dev:.3e}",
                    time.perf_counter() - t0)
    return SuiteResult("curve-overlap", True,
                       f"worst pairwise gap {worst:.2e} over {steps} angles",
                       time.perf_counter() - t0)


def suite_tsirelson_ceiling(seed: int, quick: bool) -> SuiteResult:
    """No CHSH evaluation, random or optimized, exceeds 2*sqrt(2)."""
    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.Philox(seed))
    probes = 300 if quick else 1000
    limit = TSIRELSON + 1e-9
    for i in range(probes):
        kind = CHSH_KINDS[int(rng.integers(0, len(CHSH_KINDS)))]
        sc = Scenario(kind, float(rng.uniform(0.0, QUARTER_PI)))
        val = sc.evaluate(rng.uniform(0.0, 2.0 * math.pi, sc.dim))
        if abs(val) > limit:
            return SuiteResult("tsirelson-ceiling", False,
                               f"{kind} at probe {i} reached {val!r}", time.perf_counter() - t0)
    config = _verify_config(seed, quick)
    for kind in CHSH_KINDS:
        res = maximize(Scenario(kind, QUARTER_PI), config)
        if res.value > limit:
            return SuiteResult("tsirelson-ceiling", False,
                               f"{kind} maximum {res.value!r} exceeds the ceiling",
                               time.perf_counter() - t0)
    return SuiteResult("tsirelson-ceiling", True,
                       f"{probes} random probes plus optimized maxima stayed below",
                       time.perf_counter() - t0)


def suite_ancilla_independence(seed: int, quick: bool) -> SuiteResult:
    """Paired Bell-measurement outcome probabilities are 1/2 for any ancilla."""
    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.Philox(seed))
    trials = 200 if quick else 1000
    for i in range(trials):
        theta = rng.uniform(0.0, QUARTER_PI)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        run = run_rsp_bell(theta, phi, _random_ancilla(rng))
        plus, minus = paired_probabilities(run)
        if abs(plus - 0.5) > 1e-12 or abs(minus - 0.5) > 1e-12:
            return SuiteResult("ancilla-independence", False,
                               f"paired probabilities ({plus!r}, {minus!r}) at trial {i}",
                               time.perf_counter() - t0)
    return SuiteResult("ancilla-independence", True,
                       f"{trials} random ancillae", time.perf_counter() - t0)


def run_all(seed: int = 0, quick: bool = False) -> list[SuiteResult]:
    return [
        suite_protocol_determinism(seed, quick),
        suite_fidelity_oracle(quick),
        suite_curve_overlap(seed, quick),
        suite_tsirelson_ceiling(seed, quick),
        suite_ancilla_independence(seed, quick),
    ]
