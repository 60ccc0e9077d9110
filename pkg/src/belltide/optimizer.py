"""Derivative-free maximization of correlator scenarios.

Strategy: evaluate a coarse deterministic seeding grid, refine the best
seeds and a batch of random restarts with Nelder-Mead simplex descent on
the negated objective, and report the best settings ever evaluated.  The
objectives are smooth trigonometric polynomials in at most 12 angles, for
which this is reliable and fast.

Restarts and sweep points are independent tasks; results are merged by
index, never by completion order, so a parallel map could be dropped in
without changing any output.  Randomness comes from one explicit
counter-based generator (Philox) seeded from the config; there is no global
RNG state.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize as _sciopt

from .correlators import CorrelatorResult, Scenario

TWO_PI = 2.0 * math.pi


class NoCrossingError(RuntimeError):
    """Raised when a requested level is not bracketed by the sweep endpoints."""


@dataclass(frozen=True)
class OptimizerConfig:
    """Tuning knobs; the defaults reproduce all acceptance numbers."""

    grid_points_per_dim: int = 5
    restarts: int = 20
    simplex_tolerance: float = 1e-10
    max_iterations: int = 2000
    rng_seed: int = 0
    # Cartesian seed grids larger than this are subsampled (deterministically,
    # from the seeded generator) so high-dimensional scenarios stay fast.
    max_grid_seeds: int = 2048
    top_seed_starts: int = 3
    # Edge length of the initial simplex around each start, in radians.
    simplex_scale: float = 0.6

    def __post_init__(self) -> None:
        if self.grid_points_per_dim < 3:
            raise ValueError("grid_points_per_dim must be >= 3")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.simplex_tolerance <= 0 or self.max_iterations < 1:
            raise ValueError("bad simplex tolerance or iteration budget")


@dataclass(frozen=True)
class SweepResult:
    """Per-theta maxima of one scenario kind over a strictly increasing grid."""

    kind: str
    thetas: np.ndarray
    values: np.ndarray
    results: tuple[CorrelatorResult, ...]

    def __post_init__(self) -> None:
        thetas = np.asarray(self.thetas, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if thetas.ndim != 1 or thetas.shape != values.shape:
            raise ValueError("theta grid and values must be matching 1-d arrays")
        if not np.all(np.diff(thetas) > 0):
            raise ValueError("theta grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("sweep values must be finite")
        thetas.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "results", tuple(self.results))


class _Tracked:
    """Objective wrapper that counts calls and remembers the best point seen."""

    def __init__(self, fn: Callable[[np.ndarray], float]):
        self.fn = fn
        self.count = 0
        self.best_value = -math.inf
        self.best_x: np.ndarray | None = None

    def __call__(self, x: np.ndarray) -> float:
        v = self.fn(x)
        self.count += 1
        if v > self.best_value:
            self.best_value = v
            self.best_x = np.array(x, dtype=float)
        return v


def _axis_values(pkind: str, points: int) -> np.ndarray:
    if pkind == "azimuth":
        return np.arange(points) * (TWO_PI / points)
    return np.linspace(0.0, math.pi, points)


def _seed_points(scenario: Scenario, config: OptimizerConfig, rng: np.random.Generator) -> np.ndarray:
    axes = [_axis_values(pkind, config.grid_points_per_dim) for _, pkind in scenario.layout]
    total = config.grid_points_per_dim**scenario.dim
    if total <= config.max_grid_seeds:
        return np.array(list(itertools.product(*axes)), dtype=float)
    picks = np.column_stack(
        [ax[rng.integers(0, len(ax), size=config.max_grid_seeds)] for ax in axes]
    )
    return picks


def _random_starts(scenario: Scenario, count: int, rng: np.random.Generator) -> np.ndarray:
    cols = []
    for _, pkind in scenario.layout:
        high = TWO_PI if pkind == "azimuth" else math.pi
        cols.append(rng.uniform(0.0, high, size=count))
    return np.column_stack(cols)


def _simplex(
    objective: _Tracked, x0: np.ndarray, config: OptimizerConfig
) -> float:
    dim = len(x0)
    simplex = np.vstack([x0] + [x0 + config.simplex_scale * np.eye(dim)[j] for j in range(dim)])
    res = _sciopt.minimize(
        lambda x: -objective(x),
        x0,
        method="Nelder-Mead",
        options={
            "fatol": config.simplex_tolerance,
            "xatol": 1e-7,
            "maxiter": config.max_iterations,
            "maxfev": 4 * config.max_iterations,
            "initial_simplex": simplex,
            "adaptive": dim >= 8,
        },
    )
    return -float(res.fun)


def maximize(
    scenario: Scenario,
    config: OptimizerConfig | None = None,
    extra_seeds: Sequence[np.ndarray] | None = None,
) -> CorrelatorResult:
    """Best correlator value over grid seeds, refined seeds and random restarts.

    The reported value is the maximum over every objective evaluation made,
    so it dominates the seeding grid by construction.  ``converged`` means
    the two best simplex runs agreed within 10x the function tolerance.
    """
    config = config or OptimizerConfig()
    rng = np.random.Generator(np.random.Philox(config.rng_seed))
    raw = scenario.periodic_evaluator()
    objective = _Tracked(lambda x: raw(np.asarray(x, dtype=float)))

    seeds = _seed_points(scenario, config, rng)
    seed_values = np.array([objective(x) for x in seeds])
    seed_best = float(seed_values.max())

    order = np.argsort(seed_values)[::-1]
    starts = [seeds[i] for i in order[: config.top_seed_starts]]
    if extra_seeds is not None:
        starts.extend(np.asarray(s, dtype=float) for s in extra_seeds)
    starts.extend(_random_starts(scenario, config.restarts, rng))

    run_values = sorted((_simplex(objective, x0, config) for x0 in starts), reverse=True)
    converged = (
        len(run_values) >= 2
        and run_values[0] - run_values[1] <= 10.0 * config.simplex_tolerance
    )
    assert objective.best_x is not None
    # Report canonical settings; re-evaluating there keeps the reported value
    # attached to the reported point (folding preserves it exactly anyway).
    settings = scenario.canonicalize(objective.best_x)
    objective(settings)
    return CorrelatorResult(
        scenario=scenario,
        value=objective.best_value,
        settings=settings,
        evaluations=objective.count,
        converged=converged,
        seed_best=seed_best,
        run_values=tuple(run_values),
    )


def sweep(
    kind: str,
    theta_min: float,
    theta_max: float,
    steps: int,
    config: OptimizerConfig | None = None,
    warm_start: bool = True,
) -> SweepResult:
    """Maximize one scenario kind on an inclusive theta grid.

    With ``warm_start`` each point also seeds from the previous optimum,
    which stabilizes the curve without changing converged maxima.
    """
    if not 0.0 <= theta_min < theta_max <= math.pi / 4.0 + 1e-15:
        raise ValueError("need 0 <= theta_min < theta_max <= pi/4")
    if steps < 2:
        raise ValueError("a sweep needs at least 2 points")
    config = config or OptimizerConfig()
    thetas = np.linspace(theta_min, theta_max, steps)
    results: list[CorrelatorResult] = []
    prev: np.ndarray | None = None
    for theta in thetas:
        extra = [prev] if (warm_start and prev is not None) else None
        res = maximize(Scenario(kind, float(theta)), config, extra_seeds=extra)
        results.append(res)
        prev = res.settings
    values = np.array([r.value for r in results])
    return SweepResult(kind=kind, thetas=thetas, values=values, results=tuple(results))


def find_crossing(
    kind: str,
    level: float = 2.0,
    config: OptimizerConfig | None = None,
    theta_min: float = 0.0,
    theta_max: float = math.pi / 4.0,
    interval_tol: float = 1e-5,
    trace: list[CorrelatorResult] | None = None,
) -> float:
    """Entanglement angle where the maximized correlator crosses ``level``.

    Bisects maximize(theta) - level down to an interval below
    ``interval_tol`` radians.  Raises NoCrossingError when the level is not
    bracketed by the endpoint maxima.  Every intermediate maximization is
    appended to ``trace`` when a list is supplied.
    """
    config = config or OptimizerConfig()

    def gap(theta: float) -> float:
        res = maximize(Scenario(kind, theta), config)
        if trace is not None:
            trace.append(res)
        return res.value - level

    lo, hi = float(theta_min), float(theta_max)
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if g_lo * g_hi > 0.0:
        raise NoCrossingError(
            f"{kind}: level {level} not bracketed on [{lo}, {hi}] "
            f"(endpoint maxima {g_lo + level:.6f} and {g_hi + level:.6f})"
        )
    while hi - lo > interval_tol:
        mid = 0.5 * (lo + hi)
        g_mid = gap(mid)
        if g_mid == 0.0:
            return mid
        if (g_mid > 0.0) == (g_hi > 0.0):
            hi, g_hi = mid, g_mid
        else:
            lo, g_lo = mid, g_mid
    return 0.5 * (lo + hi)
