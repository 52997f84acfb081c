import subprocess
import sys
import time

import numpy as np
import pytest

from plotkit import GridData, PlotSpec, RenderError, load_grid, render
from plotkit.cli import run

HEADER = "# sle-densities/v1 kind=test kappa=6 L=1"


def write_csv(path, rows, header=HEADER):
    path.write_text("\n".join([header] + rows) + "\n")


def grid_rows(nx, ny, fn):
    xs = np.linspace(-1, 1, nx)
    ys = np.linspace(0.1, 1.0, ny)
    return [
        f"{x},{y},{fn(x, y)}"
        for y in ys
        for x in xs
    ]


def test_refuses_untagged_csv(tmp_path):
    f = tmp_path / "bad.csv"
    write_csv(f, ["0,0.1,1.0"], header="# some-other-schema v0")
    with pytest.raises(RenderError):
        load_grid(f)


def test_malformed_rows_rejected(tmp_path, capsys):
    f = tmp_path / "bad.csv"
    write_csv(f, ["0,0.1", "1,0.1,2.0"])
    assert run(["render", "--in", str(f), "--out", str(tmp_path / "x.png")]) == 2


def test_single_cell_grid_is_an_error(tmp_path):
    f = tmp_path / "one.csv"
    write_csv(f, ["0,0.1,1.0"])
    with pytest.raises(RenderError):
        render(PlotSpec(input_csv=str(f), output_png=str(tmp_path / "x.png")))


def test_constant_grid_renders(tmp_path):
    f = tmp_path / "const.csv"
    write_csv(f, grid_rows(8, 6, lambda x, y: 1.0))
    out = tmp_path / "const.png"
    nan_count = render(PlotSpec(input_csv=str(f), output_png=str(out)))
    assert nan_count == 0
    assert out.stat().st_size > 1000


def test_nan_cells_masked_with_warning(tmp_path):
    f = tmp_path / "holes.csv"
    rows = grid_rows(6, 5, lambda x, y: 2.0 + x)
    rows[7] = rows[7].rsplit(",", 1)[0] + ",nan"
    write_csv(f, rows)
    out = tmp_path / "holes.png"
    with pytest.warns(UserWarning, match="NaN"):
        nan_count = render(PlotSpec(input_csv=str(f), output_png=str(out)))
    assert nan_count == 1
    assert out.exists()


def test_render_does_not_mutate_input_and_is_deterministic(tmp_path):
    f = tmp_path / "g.csv"
    write_csv(f, grid_rows(10, 8, lambda x, y: 1.0 / (0.1 + x * x + y * y)))
    before = f.read_bytes()
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    render(PlotSpec(input_csv=str(f), output_png=str(a), log_scale=True))
    render(PlotSpec(input_csv=str(f), output_png=str(b), log_scale=True))
    assert f.read_bytes() == before
    assert a.read_bytes() == b.read_bytes()


def test_rho110_smoke_topology(tmp_path):
    """[SECONDARY] acceptance: a real rho110 grid (kappa = 6) renders to a
    PNG and its maximum-density cells sit in the strip |x| < L/2, y < L/10."""
    t0 = time.perf_counter()
    csv_path = tmp_path / "rho110.csv"
    cmd = [
        sys.executable, "-m", "sle_densities", "grid",
        "--kind", "rho110", "--kappa", "6", "--L", "1",
        "--xmin", "-2", "--xmax", "2", "--ymin", "0.02", "--ymax", "2",
        "--nx", "80", "--ny", "60", "--out", str(csv_path),
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    out_png = tmp_path / "rho110.png"
    assert run(["render", "--in", str(csv_path), "--out", str(out_png), "--log"]) == 0
    assert out_png.stat().st_size > 5000

    grid = load_grid(csv_path)
    values = grid.values
    top = np.argsort(values, axis=None)[-10:]
    jj, ii = np.unravel_index(top, values.shape)
    assert np.all(np.abs(grid.xs[ii]) < 0.5)
    assert np.all(grid.ys[jj] < 0.1)
    dt = time.perf_counter() - t0
    print(f"PASS renderer-smoke ({dt:.2f}s, limit 10s)")
    assert dt < 10.0
