"""Achievable-rate formulas for direct and DF cooperative links.

All gains are normalized (divided by gamma_gap * N0) and the sub-bandwidth
is 1, so rates are plain log2 values in bits/slot.
"""

from __future__ import annotations

import numpy as np

from .model import COOP, DIRECT, ChannelRealization, SlotDecision


def direct_rate(p, h):
    """log2(1 + p*h). Accepts scalars or arrays; rejects negative inputs."""
    p = np.asarray(p, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.any(p < 0) or np.any(h < 0):
        raise ValueError("power and gain must be non-negative")
    return np.log2(1.0 + p * h)


def df_rate(p_b, p_r, h_br, h_bu, h_ru):
    """Half-duplex decode-and-forward rate.

    0.5 * min{log2(1 + p_b*h_br), log2(1 + p_b*h_bu + p_r*h_ru)}: the relay
    must first decode (first hop) and the destination combines both hops.
    """
    p_b = np.asarray(p_b, dtype=float)
    p_r = np.asarray(p_r, dtype=float)
    for a in (p_b, p_r, np.asarray(h_br), np.asarray(h_bu), np.asarray(h_ru)):
        if np.any(np.asarray(a) < 0):
            raise ValueError("powers and gains must be non-negative")
    first_hop = np.log2(1.0 + p_b * np.asarray(h_br, dtype=float))
    combined = np.log2(1.0 + p_b * np.asarray(h_bu, dtype=float)
                       + p_r * np.asarray(h_ru, dtype=float))
    return 0.5 * np.minimum(first_hop, combined)


def rates_for_assignment(kind: np.ndarray, user: np.ndarray,
                         relay: np.ndarray, p_b: np.ndarray, p_r: np.ndarray,
                         ch: ChannelRealization) -> np.ndarray:
    """Per-user service rate mu_n from raw assignment arrays (each length M)."""
    n_users = ch.h_bu.shape[0]
    mu = np.zeros(n_users)

    md = np.flatnonzero(kind == DIRECT)
    if md.size:
        users = user[md]
        rates = direct_rate(p_b[md], ch.h_bu[users, md])
        np.add.at(mu, users, rates)

    mc = np.flatnonzero(kind == COOP)
    if mc.size:
        users = user[mc]
        relays = relay[mc]
        rates = df_rate(p_b[mc], p_r[mc], ch.h_br[relays, mc],
                        ch.h_bu[users, mc], ch.h_ru[relays, users, mc])
        np.add.at(mu, users, rates)
    return mu


def user_rates(decision: SlotDecision, ch: ChannelRealization) -> np.ndarray:
    """Per-user service rate mu_n: sum of per-subcarrier rates assigned to n."""
    return rates_for_assignment(decision.assign_kind, decision.assign_user,
                                decision.assign_relay, decision.p_b,
                                decision.p_r, ch)
