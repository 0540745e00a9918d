#!/usr/bin/env python3
"""Render figures from simulator trace/sweep CSV files.

Usage:
    python3 plots/plot.py <kind> <csv> <out> [--qmax Q] [--smax S]

Kinds:
    queues    data-queue backlogs Q_n(t) from a trace CSV (overlay: Q^max)
    vqueues   virtual-queue backlogs U_n(t) from a trace CSV
    battery   stored energy S(t) from a trace CSV (overlays: 0 and S^max)
    vsweep    time-average objective vs the control parameter V (sweep CSV)
    tradeoff  total throughput vs average grid power (sweep CSV)
    compare   objective vs axis value, one line per policy (sweep CSV)
    fairness  fairness index vs axis value, one line per policy (sweep CSV)

The script only reads the CSVs; it never imports the simulator package.
Bound overlays default to the reference scenario (Q^max = 50000 bits,
S^max = 3000 J) and can be overridden with --qmax / --smax.
"""

from __future__ import annotations

import argparse
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

KINDS = ("queues", "vqueues", "battery", "vsweep", "tradeoff", "compare",
         "fairness")

DEFAULT_Q_MAX = 50000.0
DEFAULT_S_MAX = 3000.0


class SchemaError(ValueError):
    """Raised when a CSV is missing required columns or has no data rows."""


def read_csv(path: str) -> tuple[list[str], list[dict[str, str]]]:
    """Read a CSV into (header, rows); rows keep string values."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, no header row")
        rows = list(reader)
    return list(reader.fieldnames), rows


def _require(header: list[str], rows: list[dict], needed: list[str],
             path: str) -> None:
    missing = [c for c in needed if c not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing column(s) {', '.join(missing)}")
    if not rows:
        raise SchemaError(f"{path}: 0 data rows, nothing to plot")


def _indexed(header: list[str], prefix: str) -> list[str]:
    """Columns named prefix_1, prefix_2, ... in index order."""
    cols = []
    i = 1
    while f"{prefix}_{i}" in header:
        cols.append(f"{prefix}_{i}")
        i += 1
    return cols


def _column(rows: list[dict], name: str) -> list[float]:
    return [float(r[name]) for r in rows]


# --- trace-based figures -----------------------------------------------------

def _plot_queue_family(header, rows, path, prefix, ylabel, bound=None,
                       bound_label=None):
    cols = _indexed(header, prefix)
    if not cols:
        raise SchemaError(f"{path}: missing column(s) {prefix}_1, ...")
    _require(header, rows, ["t"] + cols, path)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    t = _column(rows, "t")
    for c in cols:
        ax.plot(t, _column(rows, c), lw=0.8, label=c)
    if bound is not None:
        ax.axhline(bound, color="k", ls="--", lw=1.2, label=bound_label)
    ax.set_xlabel("slot t")
    ax.set_ylabel(ylabel)
    if len(cols) <= 12:
        ax.legend(fontsize=7, ncol=2)
    return fig


def plot_queues(header, rows, path, q_max=DEFAULT_Q_MAX):
    fig = _plot_queue_family(header, rows, path, "Q",
                             "data queue backlog Q_n(t) [bits]",
                             bound=q_max, bound_label="Q^max")
    fig.axes[0].set_title("Data queue backlogs")
    return fig


def plot_vqueues(header, rows, path):
    fig = _plot_queue_family(header, rows, path, "U",
                             "virtual queue backlog U_n(t) [bits]")
    fig.axes[0].set_title("Virtual queue backlogs")
    return fig


def plot_battery(header, rows, path, s_max=DEFAULT_S_MAX):
    _require(header, rows, ["t", "S"], path)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(_column(rows, "t"), _column(rows, "S"), lw=0.9, color="tab:green")
    ax.axhline(0.0, color="k", ls="--", lw=1.2, label="empty (0 J)")
    ax.axhline(s_max, color="r", ls="--", lw=1.2, label="S^max")
    ax.set_xlabel("slot t")
    ax.set_ylabel("stored energy S(t) [J]")
    ax.set_title("Battery energy level")
    ax.legend(fontsize=8)
    return fig


# --- sweep-based figures -----------------------------------------------------

def _by_policy(rows):
    groups = defaultdict(list)
    for r in rows:
        groups[r.get("policy", "")].append(r)
    for g in groups.values():
        g.sort(key=lambda r: float(r["value"]))
    return groups


def plot_vsweep(header, rows, path):
    _require(header, rows, ["value", "objective"], path)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for policy, g in sorted(_by_policy(rows).items()):
        ax.plot([float(r["value"]) for r in g],
                [float(r["objective"]) for r in g],
                marker="o", label=policy or "run")
    ax.set_xlabel("control parameter V")
    ax.set_ylabel("time-average objective [utility units]")
    ax.set_title("Objective vs V")
    ax.legend(fontsize=8)
    return fig


def plot_tradeoff(header, rows, path):
    _require(header, rows, ["value", "rbar_total", "p_bar"], path)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for policy, g in sorted(_by_policy(rows).items()):
        p = [float(r["p_bar"]) for r in g]
        rt = [float(r["rbar_total"]) for r in g]
        ax.plot(p, rt, marker="o", label=policy or "run")
        for r, x, y in zip(g, p, rt):
            ax.annotate(r["value"], (x, y), fontsize=7,
                        textcoords="offset points", xytext=(4, 4))
    ax.set_xlabel("average grid power [W]")
    ax.set_ylabel("total admitted throughput [bits/slot]")
    ax.set_title("Throughput vs grid power (labels: price weight)")
    ax.legend(fontsize=8)
    return fig


def plot_compare(header, rows, path):
    _require(header, rows, ["value", "policy", "objective"], path)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for policy, g in sorted(_by_policy(rows).items()):
        ax.plot([float(r["value"]) for r in g],
                [float(r["objective"]) for r in g],
                marker="o", label=policy)
    ax.set_xlabel("swept parameter value")
    ax.set_ylabel("time-average objective [utility units]")
    ax.set_title("Policy comparison")
    ax.legend(fontsize=8)
    return fig


def plot_fairness(header, rows, path):
    _require(header, rows, ["value", "fairness"], path)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for policy, g in sorted(_by_policy(rows).items()):
        ax.plot([float(r["value"]) for r in g],
                [float(r["fairness"]) for r in g],
                marker="s", label=policy or "run")
    ax.set_ylim(0.0, 1.05)
    ax.set_xlabel("swept parameter value")
    ax.set_ylabel("fairness index [dimensionless, 1 = equal]")
    ax.set_title("Rate fairness")
    ax.legend(fontsize=8)
    return fig


# --- driver ------------------------------------------------------------------

def render(kind: str, csv_path: str, out_path: str,
           q_max: float = DEFAULT_Q_MAX, s_max: float = DEFAULT_S_MAX):
    """Render one figure kind from a CSV and write the image. Returns the
    matplotlib Figure (useful for inspection in tests)."""
    if kind not in KINDS:
        raise ValueError(f"unknown figure kind {kind!r}; choose from {KINDS}")
    header, rows = read_csv(csv_path)
    if kind == "queues":
        fig = plot_queues(header, rows, csv_path, q_max=q_max)
    elif kind == "vqueues":
        fig = plot_vqueues(header, rows, csv_path)
    elif kind == "battery":
        fig = plot_battery(header, rows, csv_path, s_max=s_max)
    elif kind == "vsweep":
        fig = plot_vsweep(header, rows, csv_path)
    elif kind == "tradeoff":
        fig = plot_tradeoff(header, rows, csv_path)
    elif kind == "compare":
        fig = plot_compare(header, rows, csv_path)
    else:
        fig = plot_fairness(header, rows, csv_path)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("csv", help="input trace or sweep CSV")
    parser.add_argument("out", help="output image path (.png/.pdf/.svg)")
    parser.add_argument("--qmax", type=float, default=DEFAULT_Q_MAX,
                        help="queue bound overlay [bits]")
    parser.add_argument("--smax", type=float, default=DEFAULT_S_MAX,
                        help="battery capacity overlay [J]")
    args = parser.parse_args(argv)
    try:
        fig = render(args.kind, args.csv, args.out,
                     q_max=args.qmax, s_max=args.smax)
        plt.close(fig)
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
