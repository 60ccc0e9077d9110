"""Command-line surface: file formats, exit codes, config precedence."""

import math
import os
import time

import numpy as np
import pytest

from belltide.cli import main
from belltide.verify import SuiteResult, suite_protocol_determinism


def run_cli(*argv):
    return main(list(argv))


def read_rows(path):
    header = None
    rows = []
    comments = []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            comments.append(line)
        elif header is None:
            header = line
        else:
            rows.append(line.split(","))
    return comments, header, rows


class TestSweepCommand:
    def test_csv_contract_and_roundtrip(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code = run_cli(
            "sweep", "--scenario", "rsp-vn-chsh", "--steps", "4",
            "--restarts", "4", "--out", "curve",
        )
        assert code == 0
        comments, header, rows = read_rows(tmp_path / "curve.csv")
        assert header == "theta,value,converged,evaluations"
        assert len(rows) == 4
        assert comments[0].startswith("# belltide ")
        assert "seed=0" in comments[0] and "restarts=4" in comments[0]
        # last row is theta = pi/4 with the full violation
        theta, value, converged, evals = rows[-1]
        assert float(theta) == float(f"{math.pi / 4:.12g}")
        assert abs(float(value) - 2 * math.sqrt(2)) < 1e-4
        assert converged in ("true", "false")
        assert int(evals) > 0
        # 12-significant-digit round trip is exact
        for r in rows:
            for cell in r[:2]:
                assert float(cell) == float(f"{float(cell):.12g}")

    def test_overlay_writes_one_csv_per_kind_and_one_svg(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code = run_cli(
            "sweep", "--scenario", "rsp-vn-chsh,rsp-bell-chsh", "--steps", "3",
            "--restarts", "3", "--format", "both", "--out", "fig1",
        )
        assert code == 0
        assert (tmp_path / "fig1-rsp-vn-chsh.csv").exists()
        assert (tmp_path / "fig1-rsp-bell-chsh.csv").exists()
        svg = (tmp_path / "fig1.svg").read_text()
        assert svg.lstrip().startswith("<?xml")
        assert "</svg>" in svg
        assert 'xlink:href="file' not in svg  # self-contained, no local assets

    def test_rejects_unknown_scenario(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        assert run_cli("sweep", "--scenario", "nope") == 2
        assert "unknown scenario" in capsys.readouterr().err

    def test_unwritable_path_exits_2_without_partial_file(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        target = tmp_path / "missing" / "curve.csv"
        code = run_cli(
            "sweep", "--scenario", "rsp-vn-chsh", "--steps", "2",
            "--restarts", "3", "--out", str(target),
        )
        assert code == 2
        assert not target.exists()
        assert not target.parent.exists()


class TestFidelityCommand:
    def test_table_and_threshold_footer(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code = run_cli("fidelity", "--steps", "5", "--nodes", "2000", "--out", "fid")
        assert code == 0
        comments, header, rows = read_rows(tmp_path / "fid.csv")
        assert header == "theta,F_closed,F_numeric,abs_err"
        assert len(rows) == 5
        assert float(rows[0][1]) == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert float(rows[-1][1]) == 1.0
        assert all(float(r[3]) < 1e-6 for r in rows)
        footer = comments[-1]
        assert "threshold" in footer
        assert abs(float(footer.split("=")[-1]) - 0.902368927062) < 1e-6


class TestCrossingCommand:
    def test_reports_pi_over_8(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        code = run_cli("crossing", "--scenario", "rsp-vn-chsh", "--restarts", "4", "--degrees")
        assert code == 0
        out = capsys.readouterr().out
        assert "theta* = 0.3927" in out
        assert "0.125" in out and "pi" in out
        assert "deg" in out

    def test_no_crossing_exits_3(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        code = run_cli("crossing", "--scenario", "rsp-vn-chsh", "--level", "3.0",
                       "--restarts", "3")
        assert code == 3
        assert "no crossing" in capsys.readouterr().out

    def test_rejects_i3322_scenario(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert run_cli("crossing", "--scenario", "tele-i3322") == 2


class TestOptimizeCommand:
    def test_prints_and_writes_report(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        code = run_cli(
            "optimize", "--scenario", "rsp-vn-chsh", "--theta", str(math.pi / 4),
            "--restarts", "4", "--out", "peak",
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "value" in out and "2.82842712" in out
        assert "phi1" in out
        _, header, rows = read_rows(tmp_path / "peak.csv")
        assert header == "theta,value,converged,evaluations"
        assert len(rows) == 1

    def test_requires_theta(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert run_cli("optimize", "--scenario", "rsp-vn-chsh") == 2


class TestConfigFile:
    def test_precedence_cli_over_file_over_default(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("scenario=rsp-vn-chsh\nsteps=3\nrestarts=2\n# comment\n")
        code = run_cli("sweep", "--config", str(cfg), "--steps", "2", "--out", "c")
        assert code == 0
        comments, _, rows = read_rows(tmp_path / "c.csv")
        assert len(rows) == 2  # CLI wins over the file's 3
        assert "restarts=2" in comments[0]  # file wins over the default 20

    def test_bad_key_rejected(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("bogus=1\n")
        assert run_cli("sweep", "--config", str(cfg), "--scenario", "rsp-vn-chsh") == 2
        assert "unknown config key" in capsys.readouterr().err

    def test_malformed_line_rejected(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("steps: 3\n")
        assert run_cli("sweep", "--config", str(cfg), "--scenario", "rsp-vn-chsh") == 2


class TestVerifyCommand:
    def test_quick_run_passes_under_30s(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        t0 = time.perf_counter()
        code = run_cli("verify", "--quick")
        elapsed = time.perf_counter() - t0
        out = capsys.readouterr().out
        assert code == 0
        assert elapsed < 30.0
        for name in ("protocol-determinism", "fidelity-oracle", "curve-overlap",
                     "tsirelson-ceiling", "ancilla-independence"):
            assert f"{name:24s} PASS" in out

    def test_flipped_correction_breaks_determinism_suite(self, monkeypatch):
        import belltide.protocols as protocols

        monkeypatch.setitem(
            protocols.TELEPORT_CORRECTIONS, "phi_minus",
            protocols.TELEPORT_CORRECTIONS["psi_plus"],
        )
        result = suite_protocol_determinism(seed=1, quick=True)
        assert not result.passed
        assert "teleport" in result.detail

    def test_any_failing_suite_exits_1(self, monkeypatch, capsys):
        import belltide.cli as cli

        fake = [SuiteResult("protocol-determinism", False, "injected failure", 0.0)]
        monkeypatch.setattr(cli, "run_all", lambda seed, quick: fake)
        assert run_cli("verify", "--quick") == 1
        captured = capsys.readouterr()
        assert "FAIL" in captured.out
        assert "injected failure" in captured.err
