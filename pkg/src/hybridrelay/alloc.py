"""Per-slot radio resource allocation by Lagrangian dual decomposition.

The per-slot problem maximizes

    sum_n w_n * mu_n + c_B * p_B - price_R * sum_i p_i

over subcarrier assignment and powers, subject to per-subcarrier masks and
BS / per-relay sum-power caps, where for the queue-driven policy
w_n = U_n Q_n / Q^max, c_B = S - theta and price_R = V * varphi. Relaxing
the sum-power caps with multipliers (lambda_B, lambda_i >= 0) decouples the
problem into one closed-form subproblem per subcarrier and candidate.

All rate-weight logs live in the natural-log domain internally; q_w below
is w_n / (2 ln 2), the coefficient multiplying ln(1 + SNR) for cooperative
candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import phy
from .model import (COOP, DIRECT, UNASSIGNED, ChannelRealization,
                    SystemConfig, SystemState)

LN2 = math.log(2.0)

_TINY = 1e-300


@dataclass
class DualState:
    """Multipliers for the BS and per-relay sum-power constraints."""

    lambda_b: float = 0.0
    lambda_r: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iteration: int = 0

    @staticmethod
    def zeros(num_relays: int) -> "DualState":
        return DualState(lambda_b=0.0, lambda_r=np.zeros(num_relays), iteration=0)


@dataclass
class SubcarrierSolution:
    """Best score and powers for one (subcarrier, candidate) pair."""

    omega: float
    mode: tuple
    p_b: float
    p_r: float = 0.0


# ---------------------------------------------------------------------------
# closed-form kernels (vectorized; all arguments broadcast)
# ---------------------------------------------------------------------------

def _direct_power(w, coef_b, h, pmask):
    """Optimal BS power for a direct candidate: full mask when the battery
    term is non-negative, water-filling style interior point otherwise."""
    w = np.asarray(w, dtype=float)
    h = np.asarray(h, dtype=float)
    if coef_b >= 0:
        return np.full(np.broadcast(w, h).shape, pmask)
    with np.errstate(divide="ignore"):
        inv_h = np.where(h > 0, 1.0 / np.maximum(h, _TINY), np.inf)
        p = w / ((-coef_b) * LN2) - inv_h
    return np.clip(np.nan_to_num(p, nan=0.0, posinf=pmask, neginf=0.0),
                   0.0, pmask)


def _direct_omega(w, coef_b, h, p):
    return w * np.log2(1.0 + p * h) + coef_b * p


def _coop_omega(w, coef_b, price, h_br, h_bu, h_ru, p_b, p_r):
    """Score of a cooperative candidate, always with the achievable DF rate."""
    rate = 0.5 * np.minimum(np.log2(1.0 + p_b * h_br),
                            np.log2(1.0 + p_b * h_bu + p_r * h_ru))
    return w * rate + coef_b * p_b - price * p_r


def _coop_case1_powers(q_w, coef_b, price, h_br, h_bu, h_ru, pmask):
    """Closed-form powers for the relay-bottlenecked region (combined SNR
    below the first hop): full BS power and an interior relay power when
    the battery-adjusted coefficient is non-negative, zero otherwise."""
    safe_ru = np.maximum(h_ru, _TINY)
    coef1 = coef_b + price * h_bu / safe_ru
    active = (h_ru > 0) & (coef1 >= 0)

    d_tilde = q_w * h_ru / np.maximum(price, _TINY) - 1.0
    d = np.maximum(0.0, np.minimum(
        d_tilde, np.minimum(pmask * h_br, pmask * (h_ru + h_bu))))
    p_r = np.clip((d - pmask * h_bu) / safe_ru, 0.0, pmask)

    p_b = np.where(active, pmask, 0.0)
    p_r = np.where(active, p_r, 0.0)
    return p_b, p_r


def _coop_corner_powers(q_w, coef_b, price, h_br, h_bu, h_ru, pmask):
    """Exact optimum of the relay-bottlenecked region when the
    battery-adjusted coefficient is negative.

    The published branch simply zeroes both powers there, but the region can
    still hold a profitable interior point (large queue weight, first hop
    stronger than the direct link): with p_B at its minimum feasible value
    the problem reduces to one concave 1-D search per linear segment of that
    minimum. Returns zeros wherever the corner does not apply.
    """
    safe_ru = np.maximum(h_ru, _TINY)
    safe_bu = np.maximum(h_bu, _TINY)
    safe_br = np.maximum(h_br, _TINY)
    coef1 = coef_b + price * h_bu / safe_ru
    applies = (h_ru > 0) & (coef1 < 0) & (h_br > h_bu) & (q_w > 0)

    gap = np.maximum(h_br - h_bu, _TINY)

    # Segment A: p_B = d / h_br (region boundary), valid until the second-hop
    # mask binds.
    da_hi = np.minimum(pmask * h_br, pmask * h_ru * h_br / gap)
    slope_a = coef1 / safe_br - price / safe_ru          # < 0 where applies
    da = np.clip(q_w / np.maximum(-slope_a, _TINY) - 1.0, 0.0, da_hi)
    pb_a = da / safe_br
    pr_a = np.clip((da - pb_a * h_bu) / safe_ru, 0.0, pmask)

    # Segment B: relay at full mask, p_B = (d - pmask*h_ru)/h_bu; exists only
    # when the first hop dominates both links combined.
    has_b = applies & (h_bu > 0) & (h_br >= h_bu + h_ru)
    db_lo = pmask * h_ru * h_br / gap
    db_hi = pmask * (h_bu + h_ru)
    slope_b = coef1 / safe_bu - price / safe_ru
    db = np.clip(q_w / np.maximum(-slope_b, _TINY) - 1.0, db_lo, db_hi)
    pb_b = np.clip((db - pmask * h_ru) / safe_bu, 0.0, pmask)
    pr_b = np.where(has_b, pmask, 0.0)

    omega_a = _coop_omega(2.0 * LN2 * q_w, coef_b, price,
                          h_br, h_bu, h_ru, pb_a, pr_a)
    omega_b = np.where(has_b,
                       _coop_omega(2.0 * LN2 * q_w, coef_b, price,
                                   h_br, h_bu, h_ru, pb_b, pr_b),
                       -np.inf)
    use_b = has_b & (omega_b > omega_a)
    p_b = np.where(use_b, pb_b, pb_a)
    p_r = np.where(use_b, pr_b, pr_a)
    p_b = np.where(applies, p_b, 0.0)
    p_r = np.where(applies, p_r, 0.0)
    return p_b, p_r


def _coop_silent_powers(q_w, coef_b, h_br, h_bu, pmask):
    """Optimal BS power along the silent-relay line p_r = 0, where the DF
    rate is governed by min(h_br, h_bu). Covers the second-hop-limited
    silent optimum the published branches skip (first hop stronger than the
    direct link but BS power still priced)."""
    hmin = np.minimum(h_br, h_bu)
    if coef_b >= 0:
        p_b = np.full(np.broadcast(np.asarray(q_w), hmin).shape, pmask)
    else:
        with np.errstate(divide="ignore"):
            inv = np.where(hmin > 0, 1.0 / np.maximum(hmin, _TINY), np.inf)
            p = q_w / (-coef_b) - inv
        p_b = np.clip(np.nan_to_num(p, nan=0.0, posinf=pmask, neginf=0.0),
                      0.0, pmask)
    return p_b, np.zeros_like(p_b)


def _coop_case2_powers(q_w, coef_b, h_br, h_bu, pmask):
    """Closed-form powers for the first-hop-bottlenecked region: the relay
    stays silent, and the BS transmits only when the relay link is no better
    than the direct one."""
    allowed = h_br <= h_bu
    if coef_b >= 0:
        p_b = np.where(allowed, pmask, 0.0)
    else:
        with np.errstate(divide="ignore"):
            inv = np.where(h_br > 0, 1.0 / np.maximum(h_br, _TINY), np.inf)
            p = q_w / (-coef_b) - inv
        p_b = np.where(allowed,
                       np.clip(np.nan_to_num(p, nan=0.0, posinf=pmask,
                                             neginf=0.0), 0.0, pmask),
                       0.0)
    return p_b, np.zeros_like(p_b)


def closed_form_direct(w: float, coef_b: float, h: float,
                       pmask: float) -> tuple[float, float]:
    """Scalar closed-form optimum of the direct candidate score
    w*log2(1+p*h) + coef_b*p over p in [0, pmask]. Returns (score, p)."""
    p = float(_direct_power(w, coef_b, h, pmask))
    if w == 0.0 and coef_b < 0:
        p = 0.0
    return float(_direct_omega(w, coef_b, h, p)), p


def closed_form_coop(w: float, coef_b: float, price: float, h_br: float,
                     h_bu: float, h_ru: float,
                     pmask: float) -> tuple[float, tuple[float, float]]:
    """Scalar closed-form optimum of the cooperative candidate score over
    the (p_b, p_r) box: best of the two bottleneck branches, the silent-relay
    line and the minimum-BS-power corner. Returns (score, (p_b, p_r))."""
    q_w = w / (2.0 * LN2)
    candidates = [
        _coop_case1_powers(q_w, coef_b, price, h_br, h_bu, h_ru, pmask),
        _coop_silent_powers(q_w, coef_b, h_br, h_bu, pmask),
        _coop_corner_powers(q_w, coef_b, price, h_br, h_bu, h_ru, pmask),
        (0.0, 0.0),
    ]
    best, best_p = -np.inf, (0.0, 0.0)
    for p_b, p_r in candidates:
        p_b, p_r = float(p_b), float(p_r)
        omega = float(_coop_omega(w, coef_b, price, h_br, h_bu, h_ru,
                                  p_b, p_r))
        if omega > best:
            best, best_p = omega, (p_b, p_r)
    return best, best_p


# ---------------------------------------------------------------------------
# per-(subcarrier, candidate) entry points
# ---------------------------------------------------------------------------

def _weight(state: SystemState, n: int, cfg: SystemConfig) -> float:
    return float(state.u[n] * state.q[n] / cfg.q_max)


def direct_subproblem(m: int, n: int, state: SystemState,
                      ch: ChannelRealization, lambda_b: float,
                      cfg: SystemConfig) -> SubcarrierSolution:
    """Best direct-transmission score for user n on subcarrier m."""
    w = _weight(state, n, cfg)
    coef_b = state.s - cfg.theta - lambda_b
    h = float(ch.h_bu[n, m])
    p = float(_direct_power(w, coef_b, h, cfg.power_mask))
    if w == 0.0 and coef_b < 0:
        p = 0.0
    return SubcarrierSolution(omega=float(_direct_omega(w, coef_b, h, p)),
                              mode=("direct", n), p_b=p)


def coop_case1(m: int, i: int, n: int, state: SystemState,
               ch: ChannelRealization, lambda_b: float, lambda_i: float,
               cfg: SystemConfig) -> SubcarrierSolution:
    """Relay-bottlenecked cooperative candidate (published branch only)."""
    w = _weight(state, n, cfg)
    q_w = w / (2.0 * LN2)
    coef_b = state.s - cfg.theta - lambda_b
    price = cfg.V * cfg.varphi + lambda_i
    args = (q_w, coef_b, price, float(ch.h_br[i, m]), float(ch.h_bu[n, m]),
            float(ch.h_ru[i, n, m]), cfg.power_mask)
    p_b, p_r = (float(x) for x in _coop_case1_powers(*args))
    omega = float(_coop_omega(w, coef_b, price, args[3], args[4], args[5],
                              p_b, p_r))
    return SubcarrierSolution(omega=omega, mode=("coop", i, n),
                              p_b=p_b, p_r=p_r)


def coop_case2(m: int, i: int, n: int, state: SystemState,
               ch: ChannelRealization, lambda_b: float, lambda_i: float,
               cfg: SystemConfig) -> SubcarrierSolution:
    """First-hop-bottlenecked cooperative candidate (relay silent)."""
    w = _weight(state, n, cfg)
    q_w = w / (2.0 * LN2)
    coef_b = state.s - cfg.theta - lambda_b
    price = cfg.V * cfg.varphi + lambda_i
    h_br, h_bu = float(ch.h_br[i, m]), float(ch.h_bu[n, m])
    p_b, p_r = (float(x) for x in
                _coop_case2_powers(q_w, coef_b, h_br, h_bu, cfg.power_mask))
    omega = float(_coop_omega(w, coef_b, price, h_br, h_bu,
                              float(ch.h_ru[i, n, m]), p_b, p_r))
    return SubcarrierSolution(omega=omega, mode=("coop", i, n),
                              p_b=p_b, p_r=p_r)


def coop_subproblem(m: int, i: int, n: int, state: SystemState,
                    ch: ChannelRealization, lambda_b: float, lambda_i: float,
                    cfg: SystemConfig) -> SubcarrierSolution:
    """Best cooperative candidate for (relay i, user n) on subcarrier m.

    Evaluates both published bottleneck branches plus two completions that
    make the candidate set cover every stationary point of the score over
    the power box: the silent-relay line (second-hop-limited, relay off)
    and the minimum-BS-power corner of the relay-bottlenecked region."""
    c1 = coop_case1(m, i, n, state, ch, lambda_b, lambda_i, cfg)
    c2 = coop_case2(m, i, n, state, ch, lambda_b, lambda_i, cfg)
    best = c1 if c1.omega >= c2.omega else c2

    w = _weight(state, n, cfg)
    q_w = w / (2.0 * LN2)
    coef_b = state.s - cfg.theta - lambda_b
    price = cfg.V * cfg.varphi + lambda_i
    h_br, h_bu = float(ch.h_br[i, m]), float(ch.h_bu[n, m])
    h_ru = float(ch.h_ru[i, n, m])
    extras = [_coop_silent_powers(q_w, coef_b, h_br, h_bu, cfg.power_mask),
              _coop_corner_powers(q_w, coef_b, price, h_br, h_bu, h_ru,
                                  cfg.power_mask)]
    for p_b_a, p_r_a in extras:
        p_b, p_r = float(p_b_a), float(p_r_a)
        omega = float(_coop_omega(w, coef_b, price, h_br, h_bu, h_ru,
                                  p_b, p_r))
        if omega > best.omega:
            best = SubcarrierSolution(omega=omega, mode=("coop", i, n),
                                      p_b=p_b, p_r=p_r)
    return best


def assign_subcarriers(direct_scores: np.ndarray,
                       coop_scores: np.ndarray) -> tuple[np.ndarray, ...]:
    """Argmax assignment per subcarrier.

    direct_scores: (N, M); coop_scores: (K, N, M). Candidates with the
    maximal score tie-break lexicographically: direct before cooperative,
    then relay index, then user index. A subcarrier whose best score is
    <= 0 stays unassigned.
    Returns (kind, user, relay) arrays of shape (M,).
    """
    n_users, n_sub = direct_scores.shape
    k = coop_scores.shape[0] if coop_scores.size else 0
    stacked = np.concatenate(
        [direct_scores, coop_scores.reshape(k * n_users, n_sub)], axis=0) \
        if k else direct_scores
    idx = np.argmax(stacked, axis=0)          # first max wins: direct first
    best = stacked[idx, np.arange(n_sub)]
    kind = np.where(best > 0,
                    np.where(idx < n_users, DIRECT, COOP), UNASSIGNED)
    user = np.where(idx < n_users, idx, (idx - n_users) % n_users)
    user = np.where(kind == UNASSIGNED, -1, user)
    relay = np.where(kind == COOP, (idx - n_users) // n_users, -1)
    return kind.astype(int), user.astype(int), relay.astype(int)


def dual_update(dual: DualState, p_b_sum: float, p_r_sums: np.ndarray,
                cfg: SystemConfig) -> DualState:
    """Projected subgradient step with diminishing step size s0/sqrt(k)."""
    k = dual.iteration + 1
    step = cfg.dual_step0 / math.sqrt(k)
    lam_b = max(0.0, dual.lambda_b + step * (p_b_sum - cfg.p_b_max))
    lam_r = np.maximum(0.0, dual.lambda_r + step * (p_r_sums - cfg.p_i_max))
    return DualState(lambda_b=lam_b, lambda_r=lam_r, iteration=k)


# ---------------------------------------------------------------------------
# full per-slot solve
# ---------------------------------------------------------------------------

@dataclass
class AllocResult:
    assign_kind: np.ndarray
    assign_user: np.ndarray
    assign_relay: np.ndarray
    p_b: np.ndarray
    p_r: np.ndarray
    rate_mu: np.ndarray
    objective: float
    iterations: int
    dual: DualState
    recovery_scale_b: float
    recovery_scale_r: np.ndarray


def _coop_tables(q_w, w, coef_b, price_r, ch: ChannelRealization, pmask):
    """Best cooperative powers and scores per (relay, user, subcarrier)."""
    h_br = ch.h_br[:, None, :]            # (K, 1, M)
    h_bu = ch.h_bu[None, :, :]            # (1, N, M)
    h_ru = ch.h_ru                        # (K, N, M)
    q3 = q_w[None, :, None]
    w3 = w[None, :, None]
    price3 = price_r[:, None, None]

    pb1, pr1 = _coop_case1_powers(q3, coef_b, price3, h_br, h_bu, h_ru, pmask)
    om1 = _coop_omega(w3, coef_b, price3, h_br, h_bu, h_ru, pb1, pr1)

    pbc, prc = _coop_corner_powers(q3, coef_b, price3, h_br, h_bu, h_ru, pmask)
    omc = _coop_omega(w3, coef_b, price3, h_br, h_bu, h_ru, pbc, prc)

    # Silent-relay line; subsumes the first-hop-bottlenecked branch exactly.
    pb2, pr2 = _coop_silent_powers(q3, coef_b,
                                   np.broadcast_to(h_br, h_ru.shape),
                                   np.broadcast_to(h_bu, h_ru.shape), pmask)
    om2 = _coop_omega(w3, coef_b, price3, h_br, h_bu, h_ru, pb2, pr2)

    omega = np.maximum(np.maximum(om1, omc), om2)
    p_b = np.where(om1 >= np.maximum(omc, om2), pb1,
                   np.where(omc >= om2, pbc, pb2))
    p_r = np.where(om1 >= np.maximum(omc, om2), pr1,
                   np.where(omc >= om2, prc, pr2))
    return omega, p_b, p_r


def solve_allocation(weights: np.ndarray, bs_power_coef: float,
                     relay_price: float, ch: ChannelRealization,
                     cfg: SystemConfig,
                     dual_init: DualState | None = None) -> AllocResult:
    """Dual-decomposition solve of the per-slot allocation for arbitrary
    rate weights and power prices. Returns the best feasible primal
    candidate found across all dual iterations (after proportional
    sum-power recovery), never an infeasible one."""
    n_users, n_sub = ch.h_bu.shape
    k_relays = ch.h_br.shape[0]
    pmask = cfg.power_mask
    w = np.asarray(weights, dtype=float)
    q_w = w / (2.0 * LN2)

    dual = dual_init if dual_init is not None else DualState.zeros(k_relays)
    dual = DualState(dual.lambda_b, dual.lambda_r.copy(), 0)

    empty = AllocResult(
        assign_kind=np.full(n_sub, UNASSIGNED), assign_user=np.full(n_sub, -1),
        assign_relay=np.full(n_sub, -1), p_b=np.zeros(n_sub),
        p_r=np.zeros(n_sub), rate_mu=np.zeros(n_users), objective=0.0,
        iterations=0, dual=dual, recovery_scale_b=1.0,
        recovery_scale_r=np.ones(k_relays))
    best = empty

    for it in range(1, cfg.dual_max_iters + 1):
        coef_b = bs_power_coef - dual.lambda_b
        price_r = relay_price + dual.lambda_r

        p_dir = _direct_power(w[:, None], coef_b, ch.h_bu, pmask)
        om_dir = _direct_omega(w[:, None], coef_b, ch.h_bu, p_dir)
        # An idle candidate (zero weight, battery-poor) must not attract power.
        if coef_b < 0:
            p_dir = np.where(w[:, None] > 0, p_dir, 0.0)
            om_dir = np.where(w[:, None] > 0, om_dir, 0.0)

        if k_relays:
            om_coop, pb_coop, pr_coop = _coop_tables(
                q_w, w, coef_b, price_r, ch, pmask)
        else:
            om_coop = np.zeros((0, n_users, n_sub))
            pb_coop = pr_coop = om_coop

        kind, user, relay = assign_subcarriers(om_dir, om_coop)

        p_b = np.zeros(n_sub)
        p_r = np.zeros(n_sub)
        sel_d = kind == DIRECT
        p_b[sel_d] = p_dir[user[sel_d], np.flatnonzero(sel_d)]
        sel_c = kind == COOP
        mc = np.flatnonzero(sel_c)
        p_b[sel_c] = pb_coop[relay[sel_c], user[sel_c], mc]
        p_r[sel_c] = pr_coop[relay[sel_c], user[sel_c], mc]

        raw_pb_sum = float(p_b.sum())
        raw_pr_sums = np.zeros(k_relays)
        if mc.size:
            np.add.at(raw_pr_sums, relay[sel_c], p_r[sel_c])

        # Feasibility recovery: proportional scaling onto the sum caps.
        scale_b = min(1.0, cfg.p_b_max / raw_pb_sum) if raw_pb_sum > 0 else 1.0
        scale_r = np.where(raw_pr_sums > cfg.p_i_max,
                           cfg.p_i_max / np.maximum(raw_pr_sums, _TINY), 1.0)
        p_b_rec = p_b * scale_b
        p_r_rec = p_r.copy()
        if mc.size:
            p_r_rec[sel_c] = p_r[sel_c] * scale_r[relay[sel_c]]

        mu = phy.rates_for_assignment(kind, user, relay, p_b_rec, p_r_rec, ch)
        obj = (float(w @ mu) + bs_power_coef * float(p_b_rec.sum())
               - relay_price * float(p_r_rec.sum()))
        if obj > best.objective:
            best = AllocResult(
                assign_kind=kind, assign_user=user, assign_relay=relay,
                p_b=p_b_rec, p_r=p_r_rec, rate_mu=mu, objective=obj,
                iterations=it, dual=dual, recovery_scale_b=scale_b,
                recovery_scale_r=scale_r)

        new_dual = dual_update(dual, raw_pb_sum, raw_pr_sums, cfg)
        denom_b = max(abs(dual.lambda_b), 1e-9)
        rel = abs(new_dual.lambda_b - dual.lambda_b) / denom_b
        if k_relays:
            denom_r = np.maximum(np.abs(dual.lambda_r), 1e-9)
            rel = max(rel, float(np.max(
                np.abs(new_dual.lambda_r - dual.lambda_r) / denom_r)))
        dual = new_dual
        if rel < cfg.dual_tol:
            break

    best.iterations = dual.iteration
    best.dual = dual
    return best


def solve_slot(state: SystemState, ch: ChannelRealization, cfg: SystemConfig,
               dual_init: DualState | None = None) -> AllocResult:
    """Queue- and battery-driven per-slot allocation: rate weights
    U_n Q_n / Q^max, BS power coefficient S - theta, relay power price
    V * varphi."""
    weights = state.u * state.q / cfg.q_max
    return solve_allocation(weights, state.s - cfg.theta, cfg.V * cfg.varphi,
                            ch, cfg, dual_init=dual_init)
