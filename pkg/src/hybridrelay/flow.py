"""Per-slot flow control: admissions, auxiliary rates and queue updates.

The utility is f(x) = ln(1 + x) (natural log), whose derivative inverts in
closed form: f'^{-1}(y) = 1/y - 1.
"""

from __future__ import annotations

import numpy as np

from .model import SlotDecision, SystemConfig, SystemState


def admit(q_n, a_n, cfg: SystemConfig):
    """Admission rule: accept the whole arrival while the buffer has room
    for a worst-case burst, drop it entirely otherwise.

    Vectorized over users; q_n and a_n may be arrays.
    """
    q_n = np.asarray(q_n, dtype=float)
    a_n = np.asarray(a_n, dtype=float)
    return np.where(q_n > cfg.q_max - cfg.a_max, 0.0, a_n)


def aux_rate(u_n, cfg: SystemConfig):
    """Auxiliary rate X_n: stationary point of the virtual-queue drift minus
    V*phi*f(X), clipped to [0, a_max].

    The stationarity argument is y = (q_max - a_max) * u_n / (q_max * V * phi);
    with f = ln(1+x), X = 1/y - 1. y -> 0 maps to the a_max clip.
    """
    u_n = np.asarray(u_n, dtype=float)
    y = (cfg.q_max - cfg.a_max) * u_n / (cfg.q_max * cfg.V * cfg.phi)
    with np.errstate(divide="ignore"):
        x = np.where(y > 0, 1.0 / np.maximum(y, 1e-300) - 1.0, np.inf)
    return np.clip(x, 0.0, cfg.a_max)


def update_queues(state: SystemState, decision: SlotDecision) -> SystemState:
    """Advance data and virtual queues one slot.

    Q <- [Q - mu]+ + R;  U <- [U - R]+ + X.
    """
    q_next = np.maximum(state.q - decision.rate_mu, 0.0) + decision.admit_r
    u_next = np.maximum(state.u - decision.admit_r, 0.0) + decision.aux_x
    return SystemState(q=q_next, u=u_next, s=state.s, t=state.t + 1)
