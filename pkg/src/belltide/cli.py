"""Command-line front end.

Commands: ``sweep`` (maximized correlator curves), ``optimize`` (a single
maximization), ``fidelity`` (closed-form vs quadrature transfer fidelity),
``crossing`` (thresholds against a local-realist level), and ``verify``
(the bundled verification suites).

Delimited output is CSV with a ``#`` comment header recording the tool
version, seed and full configuration; figures are self-contained SVG.
Files are written to a temporary sibling and renamed, so failures never
leave partial output.  Exit codes: 0 success, 1 verification failure,
2 I/O or configuration error, 3 no crossing.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .correlators import SCENARIO_KINDS, Scenario
from .optimizer import (
    NoCrossingError,
    OptimizerConfig,
    find_crossing,
    maximize,
    sweep,
)
from .protocols import teleport_fidelity_closed, teleport_fidelity_numeric
from .verify import run_all

QUARTER_PI = math.pi / 4.0

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NO_CROSSING = 3


class CliError(Exception):
    """Configuration or I/O problem; maps to exit code 2."""


@dataclass
class RunConfig:
    command: str
    scenarios: tuple[str, ...] = ()
    theta: float | None = None
    theta_min: float = 0.0
    theta_max: float = QUARTER_PI
    steps: int = 65
    level: float = 2.0
    nodes: int = 10_000
    restarts: int = 20
    seed: int = 0
    grid_points: int = 5
    tolerance: float = 1e-10
    max_iter: int = 2000
    out: str | None = None
    format: str = "csv"
    quick: bool = False
    degrees: bool = False

    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(
            grid_points_per_dim=self.grid_points,
            restarts=self.restarts,
            simplex_tolerance=self.tolerance,
            max_iterations=self.max_iter,
            rng_seed=self.seed,
        )

    def validate(self) -> None:
        for kind in self.scenarios:
            if kind not in SCENARIO_KINDS:
                raise CliError(f"unknown scenario {kind!r}; choose from {', '.join(SCENARIO_KINDS)}")
        if self.command in ("sweep", "fidelity"):
            if not 0.0 <= self.theta_min < self.theta_max <= QUARTER_PI + 1e-12:
                raise CliError("need 0 <= theta-min < theta-max <= pi/4")
            if self.steps < 2:
                raise CliError("steps must be at least 2")
        if self.command == "optimize":
            if self.theta is None:
                raise CliError("optimize requires --theta")
            if not 0.0 <= self.theta <= QUARTER_PI + 1e-12:
                raise CliError("theta must lie in [0, pi/4]")
        if self.command == "crossing" and self.scenarios:
            kind = self.scenarios[0]
            if not kind.endswith("chsh"):
                raise CliError("crossing applies to the CHSH-type scenarios")
        if self.format not in ("csv", "svg", "both"):
            raise CliError(f"unknown format {self.format!r}")
        if self.nodes < 1:
            raise CliError("nodes must be positive")
        try:
            self.optimizer_config()
        except ValueError as exc:
            raise CliError(str(exc)) from None


# --- configuration merging ----------------------------------------------------

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _read_config_file(path: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        entries[key.strip().replace("-", "_")] = value.strip()
    return entries


def _coerce(name: str, text: str, template) -> object:
    kind = type(template)
    try:
        if kind is bool:
            low = text.lower()
            if low in _BOOL_TRUE:
                return True
            if low in _BOOL_FALSE:
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        raise CliError(f"config key {name}: cannot parse {text!r} as {kind.__name__}") from None


def _merge_config(command: str, cli: dict, file_cfg: dict[str, str]) -> RunConfig:
    """Precedence: CLI flags over config-file entries over built-in defaults."""
    rc = RunConfig(command=command)
    valid = {f.name for f in fields(RunConfig)} - {"command", "scenarios"}
    for key, text in file_cfg.items():
        if key == "scenario":
            rc.scenarios = tuple(s.strip() for s in text.split(",") if s.strip())
            continue
        if key not in valid:
            raise CliError(f"unknown config key {key!r}")
        setattr(rc, key, _coerce(key, text, getattr(rc, key)))
    for key, value in cli.items():
        if value is None:
            continue
        if key == "scenario":
            rc.scenarios = tuple(s.strip() for s in value.split(",") if s.strip())
        else:
            setattr(rc, key, value)
    rc.validate()
    return rc


# --- output helpers -------------------------------------------------------------


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(prefix=path.name + ".", dir=path.parent)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from None
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)  # mkstemp defaults to 0600
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise CliError(f"cannot write {path}: {exc}") from None


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _header(rc: RunConfig) -> str:
    opts = (
        f"scenario={','.join(rc.scenarios) or '-'} theta_min={_fmt(rc.theta_min)} "
        f"theta_max={_fmt(rc.theta_max)} steps={rc.steps} level={_fmt(rc.level)} "
        f"nodes={rc.nodes} restarts={rc.restarts} seed={rc.seed} "
        f"grid_points={rc.grid_points} tolerance={_fmt(rc.tolerance)} "
        f"max_iter={rc.max_iter} format={rc.format}"
    )
    return f"# belltide {__version__} command={rc.command} {opts}\n"


def _angle_text(value: float, degrees: bool) -> str:
    base = f"{value:.6f} rad ({value / math.pi:.6f} pi)"
    if degrees:
        base += f" = {math.degrees(value):.4f} deg"
    return base


def _out_path(rc: RunConfig, suffix: str, tag: str = "") -> Path:
    base = Path(rc.out) if rc.out else Path(f"belltide-{rc.command}")
    if base.suffix:
        base = base.with_suffix("")
    name = f"{base.name}-{tag}" if tag else base.name
    return base.with_name(name).with_suffix(suffix)


# --- commands -------------------------------------------------------------------


def cmd_sweep(rc: RunConfig) -> int:
    if not rc.scenarios:
        raise CliError("sweep requires --scenario (comma-separate to overlay several)")
    config = rc.optimizer_config()
    results = [
        sweep(kind, rc.theta_min, rc.theta_max, rc.steps, config) for kind in rc.scenarios
    ]
    if rc.format in ("csv", "both"):
        multi = len(results) > 1
        for sw in results:
            rows = [_header(rc), "theta,value,converged,evaluations\n"]
            for theta, res in zip(sw.thetas, sw.results):
                rows.append(
                    f"{_fmt(theta)},{_fmt(res.value)},{str(res.converged).lower()},{res.evaluations}\n"
                )
            path = _out_path(rc, ".csv", sw.kind if multi else "")
            _atomic_write(path, "".join(rows))
            print(f"wrote {path}")
    if rc.format in ("svg", "both"):
        from .plots import sweep_figure

        path = sweep_figure(results, _out_path(rc, ".svg"))
        print(f"wrote {path}")
    for sw in results:
        print(f"{sw.kind}: max {_fmt(sw.values.max())} at theta ="
              f" {_angle_text(float(sw.thetas[np.argmax(sw.values)]), rc.degrees)}")
    return EXIT_OK


def cmd_optimize(rc: RunConfig) -> int:
    if len(rc.scenarios) != 1:
        raise CliError("optimize requires exactly one --scenario")
    scenario = Scenario(rc.scenarios[0], float(rc.theta))
    res = maximize(scenario, rc.optimizer_config())
    print(f"scenario   {scenario.kind}")
    print(f"theta      {_angle_text(scenario.theta, rc.degrees)}")
    print(f"value      {_fmt(res.value)}")
    print(f"converged  {str(res.converged).lower()}  evaluations {res.evaluations}")
    for name, val in zip(scenario.parameter_names, res.settings):
        print(f"  {name:14s} {_fmt(val)}")
    if rc.out:
        text = (
            _header(rc)
            + "theta,value,converged,evaluations\n"
            + f"{_fmt(scenario.theta)},{_fmt(res.value)},{str(res.converged).lower()},{res.evaluations}\n"
        )
        path = _out_path(rc, ".csv")
        _atomic_write(path, text)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_fidelity(rc: RunConfig) -> int:
    thetas = np.linspace(rc.theta_min, rc.theta_max, rc.steps)
    closed = [teleport_fidelity_closed(float(t)) for t in thetas]
    numeric = [teleport_fidelity_numeric(float(t), rc.nodes) for t in thetas]
    threshold = teleport_fidelity_closed(math.pi / 8.0)
    rows = [_header(rc), "theta,F_closed,F_numeric,abs_err\n"]
    for t, c, q in zip(thetas, closed, numeric):
        rows.append(f"{_fmt(t)},{_fmt(c)},{_fmt(q)},{_fmt(abs(c - q))}\n")
    rows.append(f"# threshold F(theta=pi/8) = {_fmt(threshold)}\n")
    if rc.format in ("csv", "both"):
        path = _out_path(rc, ".csv")
        _atomic_write(path, "".join(rows))
        print(f"wrote {path}")
    if rc.format in ("svg", "both"):
        from .plots import fidelity_figure

        path = fidelity_figure(thetas, closed, numeric, _out_path(rc, ".svg"))
        print(f"wrote {path}")
    print(f"threshold F(theta=pi/8) = {_fmt(threshold)}")
    return EXIT_OK


def cmd_crossing(rc: RunConfig) -> int:
    if len(rc.scenarios) != 1:
        raise CliError("crossing requires exactly one --scenario")
    kind = rc.scenarios[0]
    try:
        theta_star = find_crossing(kind, rc.level, rc.optimizer_config())
    except NoCrossingError as exc:
        print(f"no crossing: {exc}")
        return EXIT_NO_CROSSING
    print(f"{kind}: level {_fmt(rc.level)} crossed at theta* = {_angle_text(theta_star, rc.degrees)}")
    return EXIT_OK


def cmd_verify(rc: RunConfig) -> int:
    results = run_all(seed=rc.seed, quick=rc.quick)
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:24s} {status}  ({r.seconds:.1f}s)  {r.detail}")
    if failed:
        first = failed[0]
        print(f"FAILED: {first.name}: {first.detail}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    print("all verification suites passed")
    return EXIT_OK


# --- argument parsing -----------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, *, optimizer: bool, output: bool) -> None:
    p.add_argument("--config", help="flat key=value config file (CLI flags win)")
    if optimizer:
        p.add_argument("--restarts", type=int, help="random simplex restarts (default 20)")
        p.add_argument("--seed", type=int, help="RNG seed (default 0)")
        p.add_argument("--grid-points", dest="grid_points", type=int,
                       help="seeding grid points per dimension (default 5)")
        p.add_argument("--tolerance", type=float, help="simplex function tolerance (default 1e-10)")
        p.add_argument("--max-iter", dest="max_iter", type=int,
                       help="simplex iteration budget (default 2000)")
    if output:
        p.add_argument("--out", help="output path stem (default belltide-<command>)")
        p.add_argument("--format", choices=("csv", "svg", "both"), help="output format (default csv)")
    p.add_argument("--degrees", action="store_const", const=True,
                   help="also show angles in degrees (presentation only; files stay in radians)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="belltide",
        description="Nonlocality curves, thresholds and fidelities for teleportation "
                    "and remote state preparation over partially entangled pairs.",
    )
    parser.add_argument("--version", action="version", version=f"belltide {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="maximize a correlator over a theta grid")
    p.add_argument("--scenario", help=f"one or more (comma-separated) of {', '.join(SCENARIO_KINDS)}")
    p.add_argument("--theta-min", dest="theta_min", type=float)
    p.add_argument("--theta-max", dest="theta_max", type=float)
    p.add_argument("--steps", type=int, help="grid points including both ends (default 65)")
    _add_common(p, optimizer=True, output=True)

    p = sub.add_parser("optimize", help="maximize a correlator at one theta")
    p.add_argument("--scenario")
    p.add_argument("--theta", type=float)
    _add_common(p, optimizer=True, output=True)

    p = sub.add_parser("fidelity", help="teleportation fidelity table")
    p.add_argument("--theta-min", dest="theta_min", type=float)
    p.add_argument("--theta-max", dest="theta_max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--nodes", type=int, help="spherical quadrature nodes (default 10000)")
    _add_common(p, optimizer=False, output=True)

    p = sub.add_parser("crossing", help="theta where the maximized correlator crosses a level")
    p.add_argument("--scenario")
    p.add_argument("--level", type=float, help="local-realist level to cross (default 2)")
    _add_common(p, optimizer=True, output=False)

    p = sub.add_parser("verify", help="run the bundled verification suites")
    p.add_argument("--quick", action="store_const", const=True, help="reduced grids, < 30 s")
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    return parser


_COMMANDS = {
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "fidelity": cmd_fidelity,
    "crossing": cmd_crossing,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = vars(_build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    try:
        file_cfg = _read_config_file(config_path) if config_path else {}
        rc = _merge_config(command, args, file_cfg)
        return _COMMANDS[command](rc)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
