"""Slot loop composing environment, flow control, allocation and energy
management, plus policy variants, metrics, sweeps and CSV export.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import alloc, energy, env, flow, phy
from .model import (SlotDecision, SystemConfig, SystemState, TraceRecord,
                    UNASSIGNED, validate_config)

# Policies
FREE = "free"                  # queue-driven allocation + threshold battery
NO_RELAY_HYBRID = "norelay"    # same, relays removed
ON_GRID_ONLY = "ongrid"        # battery disabled, all energy from the grid
PER_SLOT_NUM = "perslot"       # memoryless per-slot rate/power tradeoff,
                               # greedy battery (discharge first, always charge)
POLICIES = (FREE, NO_RELAY_HYBRID, ON_GRID_ONLY, PER_SLOT_NUM)


@dataclass
class Trace:
    cfg: SystemConfig
    policy: str
    seed: int
    records: list[TraceRecord] = field(default_factory=list)


@dataclass
class Summary:
    """Time-averaged results of one run (or one averaging window)."""

    rbar: np.ndarray            # (N,) time-average admitted rate
    p_bar: float                # time-average grid power
    objective: float            # phi * sum ln(1 + rbar_n) - varphi * p_bar
    fairness: float             # Jain index over rbar
    max_q: float
    max_u: float
    battery_min: float
    battery_max: float
    xi: float                   # drift-bound constant
    xi_over_v: float            # optimality-gap diagnostic
    energy_balance_gap: float   # |mean O - mean delta*w|
    u_stability: float          # rel. diff of mean sum-U, last quarter vs half

    def as_dict(self) -> dict:
        d = {f"rbar_{n + 1}": float(v) for n, v in enumerate(self.rbar)}
        d.update(rbar_total=float(self.rbar.sum()), p_bar=self.p_bar,
                 objective=self.objective, fairness=self.fairness,
                 max_q=self.max_q, max_u=self.max_u,
                 battery_min=self.battery_min, battery_max=self.battery_max,
                 xi=self.xi, xi_over_v=self.xi_over_v,
                 energy_balance_gap=self.energy_balance_gap,
                 u_stability=self.u_stability)
        return d


class InvariantError(AssertionError):
    """A runtime feasibility invariant failed during a run."""


def _check_slot(decision: SlotDecision, state: SystemState, s_next: float,
                cfg: SystemConfig) -> None:
    eps = 1e-9
    if np.any(decision.p_b > cfg.power_mask + eps) or \
            np.any(decision.p_r > cfg.power_mask + eps):
        raise InvariantError("per-subcarrier power mask violated")
    if decision.p_b_total() > cfg.p_b_max + eps:
        raise InvariantError("BS sum-power cap violated")
    if cfg.num_relays and np.any(
            decision.relay_dynamic(cfg.num_relays) > cfg.p_i_max + eps):
        raise InvariantError("relay sum-power cap violated")
    if np.any((decision.assign_kind == UNASSIGNED)
              & ((decision.p_b > 0) | (decision.p_r > 0))):
        raise InvariantError("power on an unassigned subcarrier")
    demand = energy.bs_demand(decision.p_b_total(), cfg)
    if abs(decision.grid_j + decision.discharge_o - demand) > 1e-6:
        raise InvariantError("supply identity J + O != demand")
    if not -eps <= s_next <= cfg.s_max + eps:
        raise InvariantError("battery level outside [0, s_max]")
    if np.any(state.q > cfg.q_max + eps):
        raise InvariantError("data queue exceeded q_max")


def run(cfg: SystemConfig, policy: str, seed: int, slots: int,
        s0: float = 0.0) -> Trace:
    """Simulate `slots` slots under the given policy from empty queues and
    battery level s0."""
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; choose from {POLICIES}")
    cfg = validate_config(cfg)
    if policy == NO_RELAY_HYBRID and cfg.num_relays:
        cfg = validate_config(dataclasses.replace(
            cfg, num_relays=0, theta=None, q_max=None, w_max=None))

    streams = env.RngStreams.from_seed(seed)
    geom = env.build_geometry(cfg, streams.geometry)
    state = SystemState.initial(cfg.num_users, s0)
    dual = None
    trace = Trace(cfg=cfg, policy=policy, seed=seed)

    for t in range(slots):
        arrivals = env.sample_arrivals(cfg, streams.traffic)
        ch = env.sample_channels(geom, cfg, streams.fading)
        w = env.sample_renewable(cfg, streams.renewable)
        ch_meas = env.perturb_channels(ch, cfg.channel_uncertainty,
                                       streams.uncertainty)

        if policy == PER_SLOT_NUM:
            # Memoryless rate/power tradeoff with identity utility: constant
            # rate weight phi, every watt priced at the grid weight.
            res = alloc.solve_allocation(
                np.full(cfg.num_users, cfg.phi), -cfg.varphi, cfg.varphi,
                ch_meas, cfg, dual_init=dual)
            mu = np.minimum(res.rate_mu, phy.rates_for_assignment(
                res.assign_kind, res.assign_user, res.assign_relay,
                res.p_b, res.p_r, ch))
            admit_r = mu.copy()
            aux_x = mu.copy()
            j, o, delta = energy.heuristic_energy(
                float(res.p_b.sum()), state.s, w, cfg)
            q_next, u_next = state.q, state.u
        else:
            aux_x = flow.aux_rate(state.u, cfg)
            admit_r = flow.admit(state.q, arrivals, cfg)
            if policy == ON_GRID_ONLY:
                # No battery: BS transmit power is priced at the grid weight.
                weights = state.u * state.q / cfg.q_max
                res = alloc.solve_allocation(
                    weights, -cfg.V * cfg.varphi, cfg.V * cfg.varphi,
                    ch_meas, cfg, dual_init=dual)
            else:
                res = alloc.solve_slot(state, ch_meas, cfg, dual_init=dual)
            mu = np.minimum(res.rate_mu, phy.rates_for_assignment(
                res.assign_kind, res.assign_user, res.assign_relay,
                res.p_b, res.p_r, ch))
            if policy == ON_GRID_ONLY:
                demand = energy.bs_demand(float(res.p_b.sum()), cfg)
                j, o, delta = demand, 0.0, 0.0
                if j > cfg.j_max + 1e-9:
                    raise energy.EnergyFeasibilityError(
                        f"grid draw {j} exceeds j_max")
            else:
                j, o, delta = energy.manage_energy(
                    float(res.p_b.sum()), state.s, w, cfg)
            q_next = np.maximum(state.q - mu, 0.0) + admit_r
            u_next = np.maximum(state.u - admit_r, 0.0) + aux_x
        dual = res.dual

        decision = SlotDecision(
            admit_r=admit_r, aux_x=aux_x, assign_kind=res.assign_kind,
            assign_user=res.assign_user, assign_relay=res.assign_relay,
            p_b=res.p_b, p_r=res.p_r, rate_mu=mu, grid_j=j, discharge_o=o,
            charge_frac=delta, harvested_w=w)
        s_next = energy.update_battery(state.s, o, delta, w, cfg)
        p_grid = energy.grid_power(j, decision.relay_dynamic(cfg.num_relays),
                                   cfg)
        _check_slot(decision, state, s_next, cfg)

        if policy == PER_SLOT_NUM:
            util = cfg.phi * float(np.sum(aux_x))
        else:
            util = cfg.phi * float(np.sum(np.log(1.0 + aux_x)))
        lyap = 0.5 * (float(state.q @ state.q) + float(state.u @ state.u)
                      + (state.s - cfg.theta) ** 2)
        trace.records.append(TraceRecord(
            t=t, state=state.copy(), decision=decision, grid_power=p_grid,
            utility_term=util, energy_term=cfg.varphi * p_grid,
            dual_iters=res.iterations, lyapunov_value=lyap))

        state = SystemState(q=np.asarray(q_next, dtype=float),
                            u=np.asarray(u_next, dtype=float),
                            s=s_next, t=t + 1)
        if np.any(state.q > cfg.q_max + 1e-9):
            raise InvariantError("data queue exceeded q_max")
    return trace


def drift_bound_constant(cfg: SystemConfig) -> float:
    """Constant of the time-average optimality bound:
    0.5*N*a_max*q_max + N*((q_max-a_max)/q_max)*a_max^2
    + 0.5*(w_max^2 + o_max^2)."""
    return (0.5 * cfg.num_users * cfg.a_max * cfg.q_max
            + cfg.num_users * ((cfg.q_max - cfg.a_max) / cfg.q_max)
            * cfg.a_max ** 2
            + 0.5 * (cfg.w_max ** 2 + cfg.o_max ** 2))


def metrics(trace: Trace, window: int | None = None) -> Summary:
    """Summarize a trace. `window` keeps only the last `window` records
    (None = all); averages are empirical means over the kept records."""
    if not trace.records:
        raise ValueError("empty trace")
    cfg = trace.cfg
    recs = trace.records if window is None else trace.records[-window:]

    r = np.array([rec.decision.admit_r for rec in recs])       # (T, N)
    rbar = r.mean(axis=0)
    p_bar = float(np.mean([rec.grid_power for rec in recs]))
    objective = cfg.phi * float(np.sum(np.log(1.0 + rbar))) \
        - cfg.varphi * p_bar
    sq = float(np.sum(rbar) ** 2)
    denom = cfg.num_users * float(np.sum(rbar ** 2))
    fairness = sq / denom if denom > 0 else 1.0

    q = np.array([rec.state.q for rec in recs])
    u = np.array([rec.state.u for rec in recs])
    s = np.array([rec.state.s for rec in recs])
    o = np.array([rec.decision.discharge_o for rec in recs])
    dw = np.array([rec.decision.charge_frac * rec.decision.harvested_w
                   for rec in recs])

    usum = u.sum(axis=1)
    half = usum[len(usum) // 2:]
    quarter = usum[3 * len(usum) // 4:]
    mh, mq = float(half.mean()), float(quarter.mean())
    u_stability = abs(mq - mh) / max(abs(mh), 1e-12)

    xi = drift_bound_constant(cfg)
    return Summary(
        rbar=rbar, p_bar=p_bar, objective=objective, fairness=fairness,
        max_q=float(q.max()), max_u=float(u.max()),
        battery_min=float(s.min()), battery_max=float(s.max()),
        xi=xi, xi_over_v=xi / cfg.V,
        energy_balance_gap=abs(float(o.mean()) - float(dw.mean())),
        u_stability=u_stability)


def sweep(cfg: SystemConfig, axis: str, values, seeds, policy: str = FREE,
          slots: int = 2000) -> list[dict]:
    """Run the (value x seed) matrix, summarizing the last half of each run.

    Returns one row dict per axis value with seed-averaged columns; per-run
    failures are recorded in the row's `errors` field and skipped from the
    averages."""
    if axis not in ("v", "varphi"):
        raise ValueError("axis must be 'v' or 'varphi'")
    rows = []
    for value in values:
        repl = {"V" if axis == "v" else "varphi": float(value),
                "theta": None, "q_max": None, "w_max": None}
        sums, errors = [], []
        for seed in seeds:
            try:
                cfg_v = validate_config(dataclasses.replace(cfg, **repl))
                tr = run(cfg_v, policy, int(seed), slots)
                sums.append(metrics(tr, window=slots // 2))
            except Exception as exc:  # noqa: BLE001 - record and continue
                errors.append(f"seed {seed}: {exc}")
        row = {"axis": axis, "value": float(value), "policy": policy,
               "runs": len(sums), "errors": "; ".join(errors)}
        if sums:
            row.update(
                objective=float(np.mean([s.objective for s in sums])),
                rbar_total=float(np.mean([s.rbar.sum() for s in sums])),
                p_bar=float(np.mean([s.p_bar for s in sums])),
                fairness=float(np.mean([s.fairness for s in sums])))
        else:
            row.update(objective=float("nan"), rbar_total=float("nan"),
                       p_bar=float("nan"), fairness=float("nan"))
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# CSV export (fixed formatting so identical runs give identical bytes)
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".10g")


def trace_header(cfg: SystemConfig) -> list[str]:
    n, k = cfg.num_users, cfg.num_relays
    cols = ["t"]
    cols += [f"Q_{i + 1}" for i in range(n)]
    cols += [f"U_{i + 1}" for i in range(n)]
    cols += ["S", "w", "delta", "O", "J", "P_grid"]
    cols += [f"mu_{i + 1}" for i in range(n)]
    cols += [f"R_{i + 1}" for i in range(n)]
    cols += [f"X_{i + 1}" for i in range(n)]
    cols += ["p_B_total"]
    cols += [f"p_i_total_{i + 1}" for i in range(k)]
    cols += ["dual_iters", "lyapunov"]
    return cols


def write_trace(trace: Trace, path: str) -> None:
    """One CSV row per slot; header always written, even for empty traces."""
    cfg = trace.cfg
    lines = [",".join(trace_header(cfg))]
    for rec in trace.records:
        d = rec.decision
        row = [str(rec.t)]
        row += [_fmt(v) for v in rec.state.q]
        row += [_fmt(v) for v in rec.state.u]
        row += [_fmt(rec.state.s), _fmt(d.harvested_w), _fmt(d.charge_frac),
                _fmt(d.discharge_o), _fmt(d.grid_j), _fmt(rec.grid_power)]
        row += [_fmt(v) for v in d.rate_mu]
        row += [_fmt(v) for v in d.admit_r]
        row += [_fmt(v) for v in d.aux_x]
        row += [_fmt(d.p_b_total())]
        row += [_fmt(v) for v in d.relay_dynamic(cfg.num_relays)]
        row += [str(rec.dual_iters), _fmt(rec.lyapunov_value)]
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_summary(summary: Summary, path: str) -> None:
    lines = [f"{k} = {_fmt(v)}" for k, v in summary.as_dict().items()]
    _atomic_write(path, "\n".join(lines) + "\n")


def write_sweep(rows: list[dict], path: str) -> None:
    cols = ["axis", "value", "policy", "runs", "objective", "rbar_total",
            "p_bar", "fairness", "errors"]
    lines = [",".join(cols)]
    for row in rows:
        out = []
        for c in cols:
            v = row.get(c, "")
            if c in ("axis", "policy", "errors"):
                out.append(str(v))
            elif c == "runs":
                out.append(str(int(v)))
            else:
                out.append(_fmt(v))
        lines.append(",".join(out))
    _atomic_write(path, "\n".join(lines) + "\n")


def _atomic_write(path: str, content: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(content)
    os.replace(tmp, path)
