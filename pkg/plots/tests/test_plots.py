"""Figure scripts: schema handling, rendering, and real-output smoke tests.

The integration tests drive the simulator strictly through its installed
command line (the only coupling allowed) and are skipped when it is not on
PATH.
"""

import shutil
import subprocess
import sys

import numpy as np
import pytest

from cascade_qsd_plots.cli import main_heatmap, main_lines
from cascade_qsd_plots.csvdata import SchemaError, read_table
from cascade_qsd_plots.figures import PlotSpec, pivot_rectangular, plot_heatmap, plot_lines

RESULT_PREFIX = ["t"]
for i in range(4):
    for j in range(i, 4):
        RESULT_PREFIX += [f"rho_re_{i}_{j}", f"rho_im_{i}_{j}"]
RESULT_COLUMNS = RESULT_PREFIX + ["trace_raw", "concurrence", "concurrence_stderr", "min_eig"]


def write_result_like(path, times, conc, err=0.0):
    rows = [",".join(RESULT_COLUMNS)]
    for t, c in zip(times, conc):
        cells = [repr(float(t))] + ["0.0"] * 20 + ["1.0", repr(float(c)), repr(float(err)), "0.0"]
        rows.append(",".join(cells))
    path.write_text("# cascade-qsd test fixture\n" + "\n".join(rows) + "\n")


def write_sweep_like(path, blocks, drop=None):
    lines = ["# sweep parameter=gamma points=%d" % len(blocks),
             "sweep_value,t,concurrence,concurrence_stderr,trace_raw"]
    for value, times, conc in blocks:
        for t, c in zip(times, conc):
            if drop is not None and (value, float(t)) == drop:
                continue
            lines.append(f"{value!r},{float(t)!r},{float(c)!r},0.01,1.0")
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture
def times():
    return np.linspace(0.0, 2.0, 21)


class TestLines:
    def test_single_result_curve(self, tmp_path, times):
        csv = tmp_path / "res.csv"
        write_result_like(csv, times, 0.5 + 0.4 * np.cos(times), err=0.02)
        out = plot_lines(PlotSpec(input_csv=str(csv), out=str(tmp_path / "fig")))
        assert out.endswith(".svg")
        body = (tmp_path / "fig.svg").read_bytes()
        assert len(body) > 1000

    def test_three_curve_sweep(self, tmp_path, times):
        csv = tmp_path / "sweep.csv"
        write_sweep_like(
            csv,
            [(0.1, times, 0.8 * np.exp(-0.1 * times)),
             (0.5, times, 0.9 * np.exp(-0.3 * times)),
             (1.0, times, np.exp(-times))],
        )
        out = plot_lines(PlotSpec(input_csv=str(csv), out=str(tmp_path / "fig.png")))
        img = pytest.importorskip("matplotlib.pyplot").imread(out)
        assert img.size > 0

    def test_highest_curve_identified_from_data(self, tmp_path, times):
        # memory-sweep fixture: the gamma = 0.5 track carries the largest
        # maximum; the grouping used for the curves must reproduce that
        csv = tmp_path / "sweep.csv"
        write_sweep_like(
            csv,
            [(0.1, times, 0.3 * np.sin(times)),
             (0.5, times, 0.7 * np.sin(1.3 * times)),
             (1.0, times, 0.2 * np.sin(times))],
        )
        table = read_table(csv)
        g = table["sweep_value"]
        peaks = {v: table["concurrence"][g == v].max() for v in np.unique(g)}
        assert max(peaks, key=peaks.get) == 0.5
        plot_lines(PlotSpec(input_csv=str(csv), out=str(tmp_path / "fig.svg")))

    def test_missing_column_named(self, tmp_path, times):
        csv = tmp_path / "bad.csv"
        csv.write_text("t,foo\n0.0,1.0\n1.0,2.0\n")
        with pytest.raises(SchemaError, match="concurrence"):
            plot_lines(PlotSpec(input_csv=str(csv), out=str(tmp_path / "x.svg")))

    def test_cli_exit_codes(self, tmp_path, times):
        good = tmp_path / "res.csv"
        write_result_like(good, times, np.full_like(times, 0.25))
        assert main_lines(["--csv", str(good), "--out", str(tmp_path / "a.svg")]) == 0
        bad = tmp_path / "bad.csv"
        bad.write_text("t,foo\n0.0,1.0\n1.0,2.0\n")
        assert main_lines(["--csv", str(bad), "--out", str(tmp_path / "b.svg")]) == 2


class TestHeatmap:
    def test_three_row_grid(self, tmp_path, times):
        csv = tmp_path / "sweep.csv"
        write_sweep_like(
            csv,
            [(v, times, np.clip(v * np.sin(times), 0, None)) for v in (0.4, 1.0, 5.0)],
        )
        table = read_table(csv)
        rows, cols, grid = pivot_rectangular(table, PlotSpec(input_csv=str(csv), out="x"))
        assert rows.tolist() == [0.4, 1.0, 5.0]
        assert grid.shape == (3, times.size)
        out = plot_heatmap(PlotSpec(input_csv=str(csv), out=str(tmp_path / "hm.png")))
        img = pytest.importorskip("matplotlib.pyplot").imread(out)
        assert img.size > 0

    def test_missing_cell_rejected(self, tmp_path, times):
        csv = tmp_path / "holey.csv"
        write_sweep_like(
            csv,
            [(0.4, times, np.ones_like(times)), (1.0, times, np.ones_like(times))],
            drop=(1.0, float(times[3])),
        )
        with pytest.raises(SchemaError, match="not rectangular"):
            plot_heatmap(PlotSpec(input_csv=str(csv), out=str(tmp_path / "x.svg")))
        assert main_heatmap(["--csv", str(csv), "--out", str(tmp_path / "x.svg")]) == 2

    def test_repeat_renders_identical_data(self, tmp_path, times):
        csv = tmp_path / "sweep.csv"
        write_sweep_like(csv, [(v, times, v * times / times.max()) for v in (0.5, 1.5)])
        spec = PlotSpec(input_csv=str(csv), out=str(tmp_path / "a.png"))
        table = read_table(csv)
        rows1, cols1, grid1 = pivot_rectangular(table, spec)
        rows2, cols2, grid2 = pivot_rectangular(read_table(csv), spec)
        assert np.array_equal(grid1, grid2)
        a = plot_heatmap(spec)
        b = plot_heatmap(PlotSpec(input_csv=str(csv), out=str(tmp_path / "b.png")))
        import matplotlib.pyplot as plt

        assert plt.imread(a).shape == plt.imread(b).shape


needs_simulator = pytest.mark.skipif(
    shutil.which("cascade-qsd") is None, reason="simulator CLI not installed"
)

BASE_CONFIG = """\
model.omega_s = 2.0
model.g = 1.0
model.kappa1 = 1.0
model.kappa2 = 1.0
bath.Gamma = 1.0
bath.gamma = 5.0
sim.t_max = 2.0
sim.dt = 0.02
sim.n_traj = 1
sim.seed = 7
sim.initial_state = bell_psi_plus
sim.method = oracle
"""


def run_simulator(*args):
    return subprocess.run(["cascade-qsd", *args], capture_output=True, text=True)


@needs_simulator
class TestOnSimulatorOutput:
    def test_memory_sweep_lines_and_heatmap(self, tmp_path):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(BASE_CONFIG + "sweep.parameter = gamma\nsweep.values = 5.0,0.5\n")
        csv = tmp_path / "sweep.csv"
        proc = run_simulator("sweep", str(cfg), "--out", str(csv))
        assert proc.returncode == 0, proc.stderr
        lines_out = tmp_path / "lines.svg"
        hm_out = tmp_path / "heat.png"
        assert main_lines(["--csv", str(csv), "--out", str(lines_out)]) == 0
        assert main_heatmap(["--csv", str(csv), "--out", str(hm_out)]) == 0
        assert lines_out.stat().st_size > 1000
        assert hm_out.stat().st_size > 1000
        table = read_table(csv)
        rows, cols, grid = pivot_rectangular(
            table, PlotSpec(input_csv=str(csv), out="x")
        )
        assert rows.tolist() == [0.5, 5.0]
        assert cols[0] == 0.0 and cols[-1] == 2.0
        assert np.all((grid >= -1e-12) & (grid <= 1.0 + 1e-12))

    def test_generation_sweep_from_excited_pair(self, tmp_path):
        cfg = tmp_path / "gen.cfg"
        cfg.write_text(
            BASE_CONFIG.replace("model.omega_s = 2.0", "model.omega_s = 1.0")
            .replace("bath.gamma = 5.0", "bath.gamma = 0.5")
            .replace("sim.initial_state = bell_psi_plus", "sim.initial_state = ket_ee")
            + "sweep.parameter = g\nsweep.values = 0.4,1.0\n"
        )
        csv = tmp_path / "gen.csv"
        proc = run_simulator("sweep", str(cfg), "--out", str(csv))
        assert proc.returncode == 0, proc.stderr
        out = tmp_path / "gen.svg"
        assert main_lines(["--csv", str(csv), "--out", str(out)]) == 0
        assert out.stat().st_size > 1000

    def test_single_run_result_lines(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(BASE_CONFIG)
        csv = tmp_path / "run.csv"
        proc = run_simulator("run", str(cfg), "--out", str(csv))
        assert proc.returncode == 0, proc.stderr
        out = tmp_path / "run.svg"
        assert main_lines(["--csv", str(csv), "--out", str(out)]) == 0
        assert out.stat().st_size > 1000
