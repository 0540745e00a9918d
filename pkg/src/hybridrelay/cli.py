"""Command-line entry point: run, sweep, verify, paper-scenario."""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import alloc, oracle, sim
from .model import ConfigError, SystemConfig, validate_config

_SKIP_KEYS = {"theta", "q_max", "w_max"}  # derived; never read from files


def parse_config_text(text: str) -> SystemConfig:
    """Flat `key = value` format, one per line; `#` starts a comment.

    renewable_states is encoded as `value:prob` pairs joined by commas,
    e.g. `renewable_states = 195:0.6,100:0.4`.
    """
    fields = {f.name: f.type for f in dataclasses.fields(SystemConfig)}
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in fields or key in _SKIP_KEYS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if key == "renewable_states":
            try:
                pairs = tuple(tuple(float(x) for x in item.split(":"))
                              for item in value.split(","))
                out[key] = tuple((v, p) for v, p in pairs)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"line {lineno}: bad renewable_states "
                                  f"(want v:p,v:p): {exc}") from exc
        elif key in ("num_users", "num_relays", "num_subcarriers",
                     "buffer_packets", "dual_max_iters"):
            out[key] = int(value)
        else:
            out[key] = float(value)
    return SystemConfig(**out)


def format_config(cfg: SystemConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        if f.name in _SKIP_KEYS:
            continue
        v = getattr(cfg, f.name)
        if f.name == "renewable_states":
            v = ",".join(f"{val:g}:{prob:g}" for val, prob in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def load_config(path: str | None) -> SystemConfig:
    if path is None:
        return validate_config(SystemConfig())
    with open(path, encoding="utf-8") as f:
        return validate_config(parse_config_text(f.read()))


# ---------------------------------------------------------------------------
# oracle verification
# ---------------------------------------------------------------------------

def draw_subproblem_params(rng: np.random.Generator, kind: str) -> dict:
    """One randomized parameter draw spanning the regimes the closed forms
    branch on: signed battery coefficient, gains over several decades,
    occasional zero weight."""
    w = 0.0 if rng.uniform() < 0.1 else rng.uniform(0.0, 50.0)
    coef_b = rng.uniform(-50.0, 50.0)
    pmask = rng.uniform(0.05, 1.0)

    def gain():
        return 10.0 ** rng.uniform(-2.0, 3.0)

    if kind == "direct":
        return {"w": w, "coef_b": coef_b, "h": gain(), "pmask": pmask}
    return {"w": w, "coef_b": coef_b, "price": rng.uniform(0.01, 60.0),
            "h_br": gain(), "h_bu": gain(), "h_ru": gain(), "pmask": pmask}


def check_subproblem(kind: str, params: dict,
                     resolution: int) -> tuple[bool, float, float]:
    """Compare the closed form against the grid search.

    Passes when the closed form is within 1e-4 above the grid value (plus
    the analytic grid-error bound) and never below grid - grid-error.
    Returns (ok, closed_value, grid_value)."""
    if kind == "direct":
        closed, _ = alloc.closed_form_direct(params["w"], params["coef_b"],
                                             params["h"], params["pmask"])
    else:
        closed, _ = alloc.closed_form_coop(
            params["w"], params["coef_b"], params["price"], params["h_br"],
            params["h_bu"], params["h_ru"], params["pmask"])
    grid, _ = oracle.grid_search_subproblem(kind, params, resolution)
    err = oracle.grid_error_bound(kind, params, resolution)
    ok = (closed >= grid - err - 1e-9) and (closed <= grid + err + 1e-4)
    return ok, closed, grid


def run_verification(cases: int, resolution: int, seed: int = 0) -> int:
    """Randomized subproblem equivalence suite; returns the failure count."""
    rng = np.random.Generator(np.random.PCG64(seed))
    failures = 0
    for kind in ("direct", "coop"):
        worst = 0.0
        for _ in range(cases):
            params = draw_subproblem_params(rng, kind)
            ok, closed, grid = check_subproblem(kind, params, resolution)
            worst = max(worst, abs(closed - grid))
            if not ok:
                failures += 1
                print(f"FAIL {kind}: closed={closed:.6g} grid={grid:.6g} "
                      f"params={params}")
        print(f"{kind}: {cases} cases, worst |closed-grid| = {worst:.3g}, "
              f"failures = {failures}")
    return failures


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    trace = sim.run(cfg, args.policy, args.seed, args.slots)
    os.makedirs(args.out, exist_ok=True)
    tag = f"{args.policy}_seed{args.seed}"
    sim.write_trace(trace, os.path.join(args.out, f"trace_{tag}.csv"))
    if trace.records:
        sim.write_summary(sim.metrics(trace),
                          os.path.join(args.out, f"summary_{tag}.txt"))
    print(f"wrote trace_{tag}.csv ({len(trace.records)} slots)")
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    values = [float(v) for v in args.values.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    rows = sim.sweep(cfg, args.axis, values, seeds, policy=args.policy,
                     slots=args.slots)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"sweep_{args.axis}_{args.policy}.csv")
    sim.write_sweep(rows, path)
    bad = [r for r in rows if r["errors"]]
    print(f"wrote {path} ({len(rows)} rows, {len(bad)} with errors)")
    return 1 if any(r["runs"] == 0 for r in rows) else 0


def _cmd_verify(args) -> int:
    failures = run_verification(args.cases, args.resolution, args.seed)
    return 0 if failures == 0 else 1


def _cmd_paper_scenario(args) -> int:
    """Reference scenario: all four policies on the default config, plus
    the control-parameter and price sweeps."""
    cfg = validate_config(SystemConfig())
    os.makedirs(args.out, exist_ok=True)
    for policy in sim.POLICIES:
        trace = sim.run(cfg, policy, args.seed, args.slots)
        sim.write_trace(trace, os.path.join(args.out, f"trace_{policy}.csv"))
        sim.write_summary(sim.metrics(trace, window=args.slots // 2),
                          os.path.join(args.out, f"summary_{policy}.txt"))
        print(f"{policy}: done")
    seeds = [args.seed + i for i in range(3)]
    v_rows = sim.sweep(cfg, "v", [25, 50, 100, 200, 400], seeds,
                       slots=args.slots)
    sim.write_sweep(v_rows, os.path.join(args.out, "sweep_v.csv"))
    phi_rows = sim.sweep(cfg, "varphi", [1.0, 0.75, 0.5, 0.25, 0.1], seeds,
                         slots=args.slots)
    sim.write_sweep(phi_rows, os.path.join(args.out, "sweep_varphi.csv"))
    print(f"wrote sweeps to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hybridrelay",
        description="Hybrid-energy OFDMA relay downlink simulator")
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="simulate one policy and write a trace")
    pr.add_argument("--config", default=None)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--slots", type=int, default=2000)
    pr.add_argument("--policy", choices=sim.POLICIES, default=sim.FREE)
    pr.add_argument("--out", default=".")
    pr.set_defaults(func=_cmd_run)

    ps = sub.add_parser("sweep", help="sweep V or varphi over seeds")
    ps.add_argument("--config", default=None)
    ps.add_argument("--axis", choices=("v", "varphi"), required=True)
    ps.add_argument("--values", required=True, help="comma-separated")
    ps.add_argument("--seeds", required=True, help="comma-separated")
    ps.add_argument("--policy", choices=sim.POLICIES, default=sim.FREE)
    ps.add_argument("--slots", type=int, default=2000)
    ps.add_argument("--out", default=".")
    ps.set_defaults(func=_cmd_sweep)

    pv = sub.add_parser("verify",
                        help="closed forms vs grid-search oracle")
    pv.add_argument("--cases", type=int, default=1000)
    pv.add_argument("--resolution", type=int, default=2000)
    pv.add_argument("--seed", type=int, default=0)
    pv.set_defaults(func=_cmd_verify)

    pp = sub.add_parser("paper-scenario",
                        help="default scenario: 4 policies + both sweeps")
    pp.add_argument("--out", default="scenario_out")
    pp.add_argument("--seed", type=int, default=0)
    pp.add_argument("--slots", type=int, default=2000)
    pp.set_defaults(func=_cmd_paper_scenario)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"invariant failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
