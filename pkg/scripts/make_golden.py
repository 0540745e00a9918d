#!/usr/bin/env python3
"""Regenerate the golden CSV fixtures used by the plots test suite.

Runs a small, fast scenario (seconds, deterministic) and writes:
    plots/golden/trace_small.csv     200-slot trace (queues/vqueues/battery)
    plots/golden/sweep_v.csv         3-point V sweep (vsweep)
    plots/golden/sweep_varphi.csv    3-point price sweep (tradeoff)
    plots/golden/sweep_compare.csv   V sweep under two policies (compare)
    plots/golden/sweep_fairness.csv  fairness vs user count, two policies
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

import dataclasses

from hybridrelay import sim
from hybridrelay.model import SystemConfig, validate_config

OUT = pathlib.Path(__file__).resolve().parents[1] / "plots" / "golden"

SMALL = validate_config(SystemConfig(
    num_users=4, num_relays=2, num_subcarriers=16, power_mask=0.2,
    p_b_max=2.0, dp_b=10.0, p_i_max=1.0, dp_i=2.0,
    o_max=18.0, j_max=18.0, s_max=400.0,
    renewable_states=((20.0, 0.5), (5.0, 0.5)),
    arrival_rate=2.0, mean_packet_size=500.0, buffer_packets=10,
    a_max=2000.0, phi=4.0, varphi=0.5, V=50.0))


def fairness_rows(user_counts, seeds, slots=300):
    """Fairness-vs-N rows in the sweep CSV schema (axis 'n')."""
    rows = []
    for policy in (sim.FREE, sim.PER_SLOT_NUM):
        for n in user_counts:
            cfg = validate_config(dataclasses.replace(
                SMALL, num_users=n, theta=None, q_max=None, w_max=None))
            sums = [sim.metrics(sim.run(cfg, policy, s, slots))
                    for s in seeds]
            rows.append({
                "axis": "n", "value": float(n), "policy": policy,
                "runs": len(sums),
                "objective": sum(s.objective for s in sums) / len(sums),
                "rbar_total": sum(float(s.rbar.sum()) for s in sums)
                / len(sums),
                "p_bar": sum(s.p_bar for s in sums) / len(sums),
                "fairness": sum(s.fairness for s in sums) / len(sums),
                "errors": ""})
    return rows


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)

    sim.write_trace(sim.run(SMALL, sim.FREE, 0, 200),
                    str(OUT / "trace_small.csv"))

    sim.write_sweep(sim.sweep(SMALL, "v", [25.0, 50.0, 100.0], [0, 1],
                              slots=200),
                    str(OUT / "sweep_v.csv"))
    sim.write_sweep(sim.sweep(SMALL, "varphi", [1.0, 0.5, 0.25], [0, 1],
                              slots=200),
                    str(OUT / "sweep_varphi.csv"))

    compare = (sim.sweep(SMALL, "v", [25.0, 50.0, 100.0], [0], slots=200)
               + sim.sweep(SMALL, "v", [25.0, 50.0, 100.0], [0], slots=200,
                           policy=sim.ON_GRID_ONLY))
    sim.write_sweep(compare, str(OUT / "sweep_compare.csv"))

    sim.write_sweep(fairness_rows([4, 6, 8], [0, 1]),
                    str(OUT / "sweep_fairness.csv"))

    for p in sorted(OUT.glob("*.csv")):
        print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
