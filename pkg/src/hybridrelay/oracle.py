"""Brute-force verifiers for the allocator.

Two independent checks: a fine grid search of each per-subcarrier subproblem
objective (against the closed forms), and full enumeration of tiny slot
instances (against the dual-decomposition solver). Neither shares code with
the allocator beyond the rate formulas.
"""

from __future__ import annotations

import math

import numpy as np

from .model import ChannelRealization, SystemConfig, SystemState

LN2 = math.log(2.0)


def grid_search_direct(w: float, coef_b: float, h: float, pmask: float,
                       resolution: int = 2000) -> tuple[float, float]:
    """Max of w*log2(1+p*h) + coef_b*p over a uniform grid of [0, pmask].

    Returns (objective, p)."""
    p = np.linspace(0.0, pmask, resolution + 1)
    obj = w * np.log2(1.0 + p * h) + coef_b * p
    i = int(np.argmax(obj))
    return float(obj[i]), float(p[i])


def grid_search_coop(w: float, coef_b: float, price: float, h_br: float,
                     h_bu: float, h_ru: float, pmask: float,
                     resolution: int = 2000) -> tuple[float, tuple[float, float]]:
    """Max of the cooperative candidate score over the 2-D power grid.

    Score: w * 0.5*min{log2(1+p_b*h_br), log2(1+p_b*h_bu+p_r*h_ru)}
           + coef_b*p_b - price*p_r.
    Returns (objective, (p_b, p_r))."""
    p = np.linspace(0.0, pmask, resolution + 1)
    p_b = p[:, None]
    p_r = p[None, :]
    rate = 0.5 * np.minimum(np.log2(1.0 + p_b * h_br),
                            np.log2(1.0 + p_b * h_bu + p_r * h_ru))
    obj = w * rate + coef_b * p_b - price * p_r
    flat = int(np.argmax(obj))
    ib, ir = np.unravel_index(flat, obj.shape)
    return float(obj[ib, ir]), (float(p[ib]), float(p[ir]))


def grid_search_subproblem(kind: str, params: dict,
                           resolution: int = 2000):
    """Dispatch: kind 'direct' expects {w, coef_b, h, pmask}; kind 'coop'
    expects {w, coef_b, price, h_br, h_bu, h_ru, pmask}."""
    if resolution < 100:
        raise ValueError("resolution must be >= 100 points per power axis")
    if kind == "direct":
        return grid_search_direct(params["w"], params["coef_b"], params["h"],
                                  params["pmask"], resolution)
    if kind == "coop":
        return grid_search_coop(params["w"], params["coef_b"], params["price"],
                                params["h_br"], params["h_bu"],
                                params["h_ru"], params["pmask"], resolution)
    raise ValueError(f"unknown subproblem kind: {kind!r}")


def grid_error_bound(kind: str, params: dict, resolution: int) -> float:
    """Worst-case gap between the continuum optimum and the grid optimum:
    step size times a Lipschitz constant of the objective per power axis."""
    step = params["pmask"] / resolution
    w = params["w"]
    if kind == "direct":
        lip = w * params["h"] / LN2 + abs(params["coef_b"])
        return step * lip
    lip_b = 0.5 * w * max(params["h_br"], params["h_bu"]) / LN2 \
        + abs(params["coef_b"])
    lip_r = 0.5 * w * params["h_ru"] / LN2 + params["price"]
    return step * (lip_b + lip_r)


def _subcarrier_candidates(m: int, weights: np.ndarray, coef_b: float,
                           price: float, ch: ChannelRealization,
                           pmask: float, resolution: int):
    """All (score, p_b, p_r) tuples for one subcarrier: stay idle, every
    direct user at every grid power, every (relay, user) pair at every grid
    power pair."""
    n_users = ch.h_bu.shape[0]
    k_relays = ch.h_br.shape[0]
    p = np.linspace(0.0, pmask, resolution + 1)

    vals = [np.zeros(1)]
    pbs = [np.zeros(1)]
    prs = [np.zeros(1)]
    for n in range(n_users):
        v = weights[n] * np.log2(1.0 + p * ch.h_bu[n, m]) + coef_b * p
        vals.append(v)
        pbs.append(p)
        prs.append(np.zeros_like(p))
    for i in range(k_relays):
        for n in range(n_users):
            pb = p[:, None]
            pr = p[None, :]
            rate = 0.5 * np.minimum(
                np.log2(1.0 + pb * ch.h_br[i, m]),
                np.log2(1.0 + pb * ch.h_bu[n, m] + pr * ch.h_ru[i, n, m]))
            v = weights[n] * rate + coef_b * pb - price * pr
            vals.append(v.ravel())
            pbs.append(np.broadcast_to(pb, v.shape).ravel())
            prs.append(np.broadcast_to(pr, v.shape).ravel())
    return (np.concatenate(vals), np.concatenate(pbs), np.concatenate(prs))


def exhaustive_slot(state: SystemState, ch: ChannelRealization,
                    cfg: SystemConfig, resolution: int = 30) -> float:
    """Maximum per-slot allocation objective by full enumeration.

    Enumerates every assignment and discretized power vector that respects
    the per-subcarrier mask and the BS / per-relay sum-power caps, and
    returns the best value of

        sum_n w_n mu_n + (S - theta) * sum p_B - V*varphi * sum p_r.

    Only tiny instances (N <= 2, K <= 1, M <= 3) are accepted.
    """
    n_users, n_sub = ch.h_bu.shape
    k_relays = ch.h_br.shape[0]
    if n_users > 2 or k_relays > 1 or n_sub > 3:
        raise ValueError("instance too large to enumerate "
                         f"(N={n_users}, K={k_relays}, M={n_sub})")
    weights = state.u * state.q / cfg.q_max
    coef_b = state.s - cfg.theta
    price = cfg.V * cfg.varphi
    eps = 1e-12

    acc_v = np.zeros(1)
    acc_pb = np.zeros(1)
    acc_pr = np.zeros(1)
    for m in range(n_sub):
        v, pb, pr = _subcarrier_candidates(m, weights, coef_b, price, ch,
                                           cfg.power_mask, resolution)
        tot_v = (acc_v[:, None] + v[None, :]).ravel()
        tot_pb = (acc_pb[:, None] + pb[None, :]).ravel()
        tot_pr = (acc_pr[:, None] + pr[None, :]).ravel()
        keep = (tot_pb <= cfg.p_b_max + eps) & (tot_pr <= cfg.p_i_max + eps)
        acc_v, acc_pb, acc_pr = tot_v[keep], tot_pb[keep], tot_pr[keep]
        if acc_v.size == 0:
            return 0.0
    return float(np.max(acc_v))
