"""Figure rendering from fixture tables and through the simulation CLI."""

import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from edgemem_plots.cli import main as plot_main
from edgemem_plots.render import FigureSpec, RenderError, render


def write_traces(path: Path, n_traces=4, n_times=6, constant=None):
    rng = np.random.default_rng(5)
    header = ["t"] + [f"r{i}" for i in range(n_traces)] + ["mean"]
    lines = [",".join(header)]
    values = np.full((n_traces, n_times), constant) if constant is not None \
        else rng.uniform(0.2, 1.0, size=(n_traces, n_times))
    for k in range(n_times):
        row = [str(float(k))] + [repr(float(v)) for v in values[:, k]]
        row.append(repr(float(values[:, k].mean())))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return values


def write_recovery_vs_t(path: Path):
    lines = ["quantity,J,delta,tau,t,fraction"]
    for delta, start in ((0.5, 1.0), (1.5, 0.9)):
        frac = start
        for t in range(6):
            lines.append(f"I_z,0.1,{delta},0.7,{float(t)},{frac}")
            frac = round(frac - 0.1, 10)
    path.write_text("\n".join(lines) + "\n")


def write_recovery_vs_tau(path: Path):
    lines = ["quantity,J,delta,tau,fraction"]
    taus = np.linspace(0.0, 1.0, 11)
    for delta in (0.5, 1.5, 3.0):
        for tau in taus:
            frac = max(0.0, 1.0 - tau * (1.0 + delta / 4.0))
            lines.append(f"I_z,0.1,{delta},{round(float(tau), 3)},{round(frac, 6)}")
    path.write_text("\n".join(lines) + "\n")


def write_heatmap(path: Path):
    lines = ["delta,0.025,0.05,0.1",
             "0.5,0.2,0.15,0.1",
             "1.5,0.5,0.4,0.3",
             "3.0,0.9,0.8,0.7"]
    path.write_text("\n".join(lines) + "\n")


class TestRenderKinds:
    def test_traces_constant_fixture(self, tmp_path):
        csv = tmp_path / "traces_sample.csv"
        write_traces(csv, constant=1.0)
        out = render(FigureSpec(str(csv), "traces", str(tmp_path / "traces.svg")))
        data = Path(out).read_bytes()
        assert len(data) > 500 and data.startswith(b"<?xml")

    def test_recovery_vs_t(self, tmp_path):
        csv = tmp_path / "recovery_vs_t.csv"
        write_recovery_vs_t(csv)
        out = render(FigureSpec(str(csv), "recovery_vs_t",
                                str(tmp_path / "rvt.png"), image_format="png"))
        assert Path(out).read_bytes().startswith(b"\x89PNG")

    def test_recovery_vs_tau_curves_non_increasing(self, tmp_path):
        csv = tmp_path / "recovery_vs_tau.csv"
        write_recovery_vs_tau(csv)
        render(FigureSpec(str(csv), "recovery_vs_tau", str(tmp_path / "rvtau.svg")))
        # the rendered curves must be non-increasing in tau per cell
        rows = csv.read_text().strip().split("\n")[1:]
        by_cell = {}
        for row in rows:
            _, j, delta, tau, frac = row.split(",")
            by_cell.setdefault((j, delta), []).append((float(tau), float(frac)))
        for block in by_cell.values():
            fracs = [f for _, f in sorted(block)]
            assert all(a >= b for a, b in zip(fracs, fracs[1:]))

    def test_heatmap(self, tmp_path):
        csv = tmp_path / "heatmap.csv"
        write_heatmap(csv)
        out = render(FigureSpec(str(csv), "heatmap", str(tmp_path / "heat.svg")))
        assert Path(out).stat().st_size > 500

    def test_rendering_is_deterministic(self, tmp_path):
        csv = tmp_path / "traces_sample.csv"
        write_traces(csv)
        a = tmp_path / "a.svg"
        b = tmp_path / "b.svg"
        render(FigureSpec(str(csv), "traces", str(a)))
        render(FigureSpec(str(csv), "traces", str(b)))
        assert a.read_bytes() == b.read_bytes()
        pa = tmp_path / "a.png"
        pb = tmp_path / "b.png"
        render(FigureSpec(str(csv), "traces", str(pa), image_format="png"))
        render(FigureSpec(str(csv), "traces", str(pb), image_format="png"))
        assert pa.read_bytes() == pb.read_bytes()


class TestErrors:
    def test_missing_column_fails_descriptively(self, tmp_path):
        csv = tmp_path / "bad.csv"
        csv.write_text("foo,bar\n1,2\n")
        with pytest.raises(RenderError, match="missing columns"):
            render(FigureSpec(str(csv), "recovery_vs_t", str(tmp_path / "x.svg")))

    def test_missing_file(self, tmp_path):
        with pytest.raises(RenderError, match="does not exist"):
            render(FigureSpec(str(tmp_path / "nope.csv"), "heatmap",
                              str(tmp_path / "x.svg")))

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(RenderError):
            FigureSpec(str(tmp_path / "t.csv"), "pie", str(tmp_path / "x.svg"))

    def test_cli_nonzero_exit_on_bad_table(self, tmp_path, capsys):
        csv = tmp_path / "bad.csv"
        csv.write_text("foo,bar\n1,2\n")
        code = plot_main(["--kind", "heatmap", "--in", str(csv),
                          "--out", str(tmp_path / "x.svg")])
        assert code == 1
        assert "render error" in capsys.readouterr().err


class TestCli:
    def test_cli_renders_and_infers_format(self, tmp_path, capsys):
        csv = tmp_path / "heatmap.csv"
        write_heatmap(csv)
        out = tmp_path / "heat.png"
        assert plot_main(["--kind", "heatmap", "--in", str(csv),
                          "--out", str(out)]) == 0
        assert out.read_bytes().startswith(b"\x89PNG")

    def test_cli_explicit_format_flag(self, tmp_path):
        csv = tmp_path / "heatmap.csv"
        write_heatmap(csv)
        out = tmp_path / "heat.img"
        assert plot_main(["--kind", "heatmap", "--in", str(csv),
                          "--out", str(out), "--format", "svg"]) == 0
        assert out.read_bytes().startswith(b"<?xml")


@pytest.mark.skipif(shutil.which("edgemem") is None,
                    reason="simulation CLI not installed")
class TestAgainstSimulationCli:
    """Consume the upstream package strictly through its command line."""

    def test_full_pipeline_renders_all_kinds(self, tmp_path):
        out_dir = tmp_path / "results"
        config = {
            "n_sites": 6, "J_list": [0.1], "delta_list": [0.5, 1.0],
            "n_realizations": 2, "t_max": 5.0, "sample_stride": 10,
            "master_seed": 31, "output_dir": str(out_dir),
        }
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config))
        subprocess.run(["edgemem", "sweep", "--config", str(cfg_path)],
                       check=True, capture_output=True)
        subprocess.run(
            ["edgemem", "analyze", "--results-dir", str(out_dir),
             "--quantity", "I_z"],
            check=True, capture_output=True)
        analysis = out_dir / "analysis"
        figures = tmp_path / "figs"
        jobs = (
            ("traces", analysis / "traces_sample.csv"),
            ("recovery_vs_t", analysis / "recovery_vs_t.csv"),
            ("recovery_vs_tau", analysis / "recovery_vs_tau.csv"),
            ("heatmap", analysis / "heatmap.csv"),
        )
        for kind, table in jobs:
            out = figures / f"{kind}.svg"
            proc = subprocess.run(
                [sys.executable, "-m", "edgemem_plots.cli", "--kind", kind,
                 "--in", str(table), "--out", str(out)],
                capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            assert out.exists() and out.stat().st_size > 500

        # visual analogue of the threshold sweep: non-increasing curves
        rows = (analysis / "recovery_vs_tau.csv").read_text().strip().split("\n")[1:]
        by_cell = {}
        for row in rows:
            _, j, delta, tau, frac = row.split(",")
            by_cell.setdefault((j, delta), []).append((float(tau), float(frac)))
        for block in by_cell.values():
            fracs = [f for _, f in sorted(block)]
            assert all(a >= b for a, b in zip(fracs, fracs[1:]))
