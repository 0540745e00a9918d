"""Battery-aware energy sourcing and battery state evolution.

The sourcing rule is a threshold policy: draw from the battery once it
holds at least o_max (= theta - varphi*V), from the grid otherwise, and
charge whenever the level is below theta.
"""

from __future__ import annotations

import numpy as np

from .model import SystemConfig


class EnergyFeasibilityError(RuntimeError):
    """Demand exceeded what grid and battery can jointly supply, or the
    battery left its feasible band; indicates a config or policy bug."""


def bs_demand(p_b_total: float, cfg: SystemConfig) -> float:
    """BS supply demand for the slot. The static draw dp_b is only incurred
    while the transmitter is active; an idle BS demands nothing."""
    return p_b_total + cfg.dp_b if p_b_total > 0 else 0.0


def manage_energy(p_b_total: float, s: float, w: float,
                  cfg: SystemConfig) -> tuple[float, float, float]:
    """Split the BS demand between grid draw J and battery discharge O and
    decide the charge fraction delta. Returns (J, O, delta)."""
    demand = bs_demand(p_b_total, cfg)
    threshold = cfg.theta - cfg.varphi * cfg.V  # == o_max
    if s >= threshold:
        j = 0.0
        o = min(demand, cfg.o_max)
        delta = 1.0 if s < cfg.theta else 0.0
    else:
        j = min(demand, cfg.j_max)
        o = max(0.0, demand - j)
        delta = 1.0
    o = min(o, s, cfg.o_max)
    j = min(max(j, demand - o), cfg.j_max)
    if j + o < demand - 1e-9:
        raise EnergyFeasibilityError(
            f"demand {demand} exceeds grid+battery supply {j + o}")
    # Clip the accepted charge so the battery cannot overflow.
    headroom = cfg.s_max - (s - o)
    if delta > 0 and w > 0 and delta * w > headroom:
        delta = max(0.0, headroom / w)
    return j, o, delta


def heuristic_energy(p_b_total: float, s: float, w: float,
                     cfg: SystemConfig) -> tuple[float, float, float]:
    """Baseline battery rule: always discharge first, always charge while
    there is space."""
    demand = bs_demand(p_b_total, cfg)
    o = min(demand, s, cfg.o_max)
    j = min(demand - o, cfg.j_max)
    if j + o < demand - 1e-9:
        raise EnergyFeasibilityError(
            f"demand {demand} exceeds grid+battery supply {j + o}")
    headroom = cfg.s_max - (s - o)
    delta = 1.0
    if w > 0 and w > headroom:
        delta = max(0.0, headroom / w)
    return j, o, delta


def update_battery(s: float, o: float, delta: float, w: float,
                   cfg: SystemConfig) -> float:
    """Battery queue update s' = s - O + delta*w, with the feasibility band
    0 <= s' <= s_max asserted (it must hold for every validated config)."""
    if o > min(s, cfg.o_max) + 1e-9:
        raise EnergyFeasibilityError(f"discharge {o} exceeds min(s, o_max)")
    s_next = s - o + delta * w
    if not (-1e-9 <= s_next <= cfg.s_max + 1e-9):
        raise EnergyFeasibilityError(
            f"battery level {s_next} left [0, {cfg.s_max}]")
    return float(np.clip(s_next, 0.0, cfg.s_max))


def grid_power(j: float, relay_dynamic: np.ndarray, cfg: SystemConfig) -> float:
    """Total grid withdrawal this slot: direct BS draw plus every deployed
    relay's dynamic + static consumption."""
    return float(j + np.sum(relay_dynamic) + cfg.num_relays * cfg.dp_i)
