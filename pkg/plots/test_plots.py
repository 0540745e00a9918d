"""Tests for the figure-rendering script (CSV in, image out).

These tests intentionally never import the simulator package: the plotting
component talks to it only through CSV files.
"""

import hashlib
import pathlib
import sys

import matplotlib.pyplot as plt
import pytest

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

import plot  # noqa: E402

GOLDEN = pathlib.Path(__file__).resolve().parent / "golden"
TRACE = str(GOLDEN / "trace_small.csv")
SWEEP_V = str(GOLDEN / "sweep_v.csv")
SWEEP_VARPHI = str(GOLDEN / "sweep_varphi.csv")
SWEEP_COMPARE = str(GOLDEN / "sweep_compare.csv")
SWEEP_FAIRNESS = str(GOLDEN / "sweep_fairness.csv")

KIND_TO_CSV = {
    "queues": TRACE,
    "vqueues": TRACE,
    "battery": TRACE,
    "vsweep": SWEEP_V,
    "tradeoff": SWEEP_VARPHI,
    "compare": SWEEP_COMPARE,
    "fairness": SWEEP_FAIRNESS,
}


def _hlines(ax):
    """y-values of horizontal lines drawn on the axes."""
    ys = []
    for line in ax.get_lines():
        ydata = line.get_ydata()
        if len(ydata) == 2 and ydata[0] == ydata[1]:
            xdata = line.get_xdata()
            if tuple(xdata) == (0, 1):  # axhline uses axes-fraction x
                ys.append(float(ydata[0]))
    return ys


@pytest.mark.parametrize("kind", plot.KINDS)
def test_each_kind_renders_from_golden(kind, tmp_path):
    out = tmp_path / f"{kind}.png"
    fig = plot.render(kind, KIND_TO_CSV[kind], str(out))
    plt.close(fig)
    assert out.exists() and out.stat().st_size > 1000


def test_battery_draws_both_bounds(tmp_path):
    out = tmp_path / "battery.png"
    fig = plot.render("battery", TRACE, str(out), s_max=400.0)
    ys = _hlines(fig.axes[0])
    plt.close(fig)
    assert 0.0 in ys and 400.0 in ys


def test_queues_draws_q_max_bound(tmp_path):
    out = tmp_path / "queues.png"
    fig = plot.render("queues", TRACE, str(out), q_max=5000.0)
    ys = _hlines(fig.axes[0])
    plt.close(fig)
    assert 5000.0 in ys


def test_axes_are_labeled(tmp_path):
    for kind in plot.KINDS:
        fig = plot.render(kind, KIND_TO_CSV[kind],
                          str(tmp_path / f"{kind}.png"))
        ax = fig.axes[0]
        assert ax.get_xlabel() and ax.get_ylabel()
        plt.close(fig)


def test_rendering_is_read_only(tmp_path):
    before = {p: hashlib.sha256(pathlib.Path(p).read_bytes()).hexdigest()
              for p in set(KIND_TO_CSV.values())}
    for kind, csv_path in KIND_TO_CSV.items():
        fig = plot.render(kind, csv_path, str(tmp_path / f"{kind}.png"))
        plt.close(fig)
    after = {p: hashlib.sha256(pathlib.Path(p).read_bytes()).hexdigest()
             for p in before}
    assert before == after


def test_two_point_sweep_renders(tmp_path):
    csv_path = tmp_path / "two.csv"
    csv_path.write_text(
        "axis,value,policy,runs,objective,rbar_total,p_bar,fairness,errors\n"
        "v,25,free,1,-10.0,1.0,50.0,0.9,\n"
        "v,50,free,1,-8.0,1.2,45.0,0.9,\n")
    out = tmp_path / "two.png"
    fig = plot.render("vsweep", str(csv_path), str(out))
    line = fig.axes[0].get_lines()[0]
    assert len(line.get_xdata()) == 2
    plt.close(fig)
    assert out.exists()


def test_missing_column_names_it(tmp_path):
    csv_path = tmp_path / "bad.csv"
    csv_path.write_text("axis,value,policy\nv,25,free\n")
    with pytest.raises(plot.SchemaError, match="objective"):
        plot.render("vsweep", str(csv_path), str(tmp_path / "x.png"))


def test_trace_without_queue_columns_names_prefix(tmp_path):
    csv_path = tmp_path / "bad.csv"
    csv_path.write_text("t,S\n0,100\n")
    with pytest.raises(plot.SchemaError, match="Q_1"):
        plot.render("queues", str(csv_path), str(tmp_path / "x.png"))


def test_empty_csv_names_zero_rows(tmp_path):
    csv_path = tmp_path / "empty.csv"
    csv_path.write_text("t,S,Q_1,U_1\n")
    with pytest.raises(plot.SchemaError, match="0 data rows"):
        plot.render("battery", str(csv_path), str(tmp_path / "x.png"))


def test_headerless_file_errors(tmp_path):
    csv_path = tmp_path / "blank.csv"
    csv_path.write_text("")
    with pytest.raises(plot.SchemaError, match="no header"):
        plot.render("battery", str(csv_path), str(tmp_path / "x.png"))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown figure kind"):
        plot.render("pie", TRACE, str(tmp_path / "x.png"))


def test_cli_success_and_error_codes(tmp_path):
    out = tmp_path / "b.png"
    assert plot.main(["battery", TRACE, str(out)]) == 0
    assert out.exists()
    assert plot.main(["battery", str(tmp_path / "missing.csv"),
                      str(tmp_path / "x.png")]) == 2


def test_secondary_acceptance(tmp_path):
    """All 7 kinds render from golden CSVs; battery overlays 0/S^max and
    queues overlays Q^max."""
    ok = True
    for kind in plot.KINDS:
        out = tmp_path / f"{kind}.png"
        fig = plot.render(kind, KIND_TO_CSV[kind], str(out))
        rendered = out.exists() and out.stat().st_size > 0
        if kind == "battery":
            ys = _hlines(fig.axes[0])
            rendered &= 0.0 in ys and plot.DEFAULT_S_MAX in ys
        if kind == "queues":
            rendered &= plot.DEFAULT_Q_MAX in _hlines(fig.axes[0])
        plt.close(fig)
        ok &= rendered
    print(f"{'PASS' if ok else 'FAIL'} figure-rendering: "
          f"{len(plot.KINDS)} kinds from golden CSVs with bound overlays")
    assert ok
