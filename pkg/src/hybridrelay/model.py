"""Domain types and configuration validation.

Units convention: rates and queue backlogs are in bits (sub-bandwidth
normalized to 1), powers in watts, slot duration is 1 time unit so energy
per slot and watts are numerically identical.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """Raised when a configuration violates a feasibility assumption."""


@dataclass(frozen=True)
class SystemConfig:
    """All physical, economic and algorithmic parameters of one scenario.

    Defaults reproduce the reference downlink scenario: 8 users in a 2 km
    cell, 4 relays halfway to the cell edge, 128 subcarriers, a 3000-unit
    battery fed by a two-state solar source, BS 20 W dynamic / 194.24 W
    static, relays 10 W dynamic / 40 W static each.
    """

    # Topology
    num_users: int = 8
    num_relays: int = 4
    num_subcarriers: int = 128

    # Radio
    cell_radius: float = 2000.0          # m
    pathloss_exponent: float = 4.0
    noise_power: float = 1e-10           # W
    gamma_gap: float = 1.0               # SNR gap to capacity, >= 1
    p_b_max: float = 20.0                # W, BS sum-power cap
    dp_b: float = 194.24                 # W, BS static draw
    p_i_max: float = 10.0                # W, per-relay sum-power cap
    dp_i: float = 40.0                   # W, per-relay static draw
    power_mask: float = 0.2              # W, per-subcarrier cap (uniform)

    # Energy storage / supply
    s_max: float = 3000.0                # battery capacity
    o_max: float = 1.5 * (20.0 + 194.24) # max discharge per slot
    j_max: float = 1.5 * (20.0 + 194.24) # max direct grid draw per slot
    renewable_states: tuple[tuple[float, float], ...] = ((195.0, 0.6), (100.0, 0.4))

    # Traffic
    arrival_rate: float = 8.0            # packets/slot, per user
    mean_packet_size: float = 5000.0     # bits
    buffer_packets: int = 10
    a_max: float = 40000.0               # bits/slot, arrival truncation

    # Control
    phi: float = 16.0                    # utility weight
    varphi: float = 0.5                  # grid energy price weight
    V: float = 100.0                     # drift-plus-penalty control parameter
    channel_uncertainty: float = 0.0     # relative gain measurement error, in [0, 1)

    # Dual solver
    dual_step0: float = 0.05             # subgradient step scale (default 1/p_b_max)
    dual_max_iters: int = 25
    dual_tol: float = 1e-3

    # Derived (filled by validate_config); None until validated
    theta: float | None = None           # battery charging threshold, varphi*V + o_max
    q_max: float | None = None           # bits, buffer_packets * mean_packet_size
    w_max: float | None = None           # max renewable draw per slot

    @property
    def validated(self) -> bool:
        return self.theta is not None

    def mean_arrival_bits(self) -> float:
        return self.arrival_rate * self.mean_packet_size


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Check every standing assumption and fill the derived fields.

    Idempotent: validating an already validated config returns an equal one.
    Raises ConfigError naming the violated inequality otherwise.
    """
    _require(cfg.num_users >= 1, "num_users must be a positive integer")
    _require(cfg.num_relays >= 0, "num_relays must be non-negative")
    _require(cfg.num_subcarriers >= 1, "num_subcarriers must be a positive integer")
    _require(cfg.cell_radius > 0, "cell_radius must be positive")
    _require(cfg.pathloss_exponent > 0, "pathloss_exponent must be positive")
    _require(cfg.noise_power > 0, "noise_power must be positive")
    _require(cfg.gamma_gap >= 1.0, "gamma_gap must be >= 1")
    _require(cfg.p_b_max > 0 and cfg.p_i_max >= 0, "power caps must be positive")
    _require(cfg.dp_b >= 0 and cfg.dp_i >= 0, "static powers must be non-negative")
    _require(cfg.power_mask > 0, "power_mask must be positive")
    _require(cfg.phi > 0, "phi must be positive")
    _require(cfg.varphi > 0, "varphi must be positive")
    _require(0.0 <= cfg.channel_uncertainty < 1.0,
             "channel_uncertainty must lie in [0, 1)")
    _require(cfg.dual_step0 > 0 and cfg.dual_max_iters >= 1 and cfg.dual_tol > 0,
             "dual solver parameters must be positive")

    states = tuple((float(v), float(p)) for v, p in cfg.renewable_states)
    _require(len(states) >= 1, "renewable_states must be non-empty")
    probs = np.array([p for _, p in states])
    vals = np.array([v for v, _ in states])
    _require(abs(probs.sum() - 1.0) < 1e-9,
             "renewable_states probabilities must sum to 1")
    _require(np.all(probs >= 0), "renewable_states probabilities must be >= 0")
    _require(np.all(vals >= 0), "renewable_states values must be >= 0")
    w_max = float(vals.max())

    # Hybrid-supply assumptions: grid and battery must each be able to carry
    # the full BS demand alone.
    _require(cfg.j_max >= cfg.p_b_max + cfg.dp_b,
             f"j_max ({cfg.j_max}) must be >= p_b_max + dp_b ({cfg.p_b_max + cfg.dp_b})")
    _require(cfg.o_max >= cfg.p_b_max + cfg.dp_b,
             f"o_max ({cfg.o_max}) must be >= p_b_max + dp_b ({cfg.p_b_max + cfg.dp_b})")

    # Battery feasibility window for the control parameter.
    v_cap = (cfg.s_max - w_max - cfg.o_max) / cfg.varphi
    _require(cfg.V > 0, "V must be > 0")
    _require(cfg.V <= v_cap,
             f"V ({cfg.V}) must be <= (s_max - w_max - o_max)/varphi ({v_cap})")

    q_max = float(cfg.buffer_packets) * cfg.mean_packet_size
    _require(cfg.buffer_packets >= 1, "buffer_packets must be >= 1")
    _require(q_max > cfg.a_max,
             f"q_max ({q_max}) must exceed a_max ({cfg.a_max})")
    _require(cfg.a_max >= cfg.mean_arrival_bits(),
             f"a_max ({cfg.a_max}) must be >= mean arrival bits/slot "
             f"({cfg.mean_arrival_bits()})")

    # Avoid trivially slack sum-power constraints.
    _require(cfg.num_subcarriers * cfg.power_mask > cfg.p_b_max,
             f"M * power_mask ({cfg.num_subcarriers * cfg.power_mask}) must "
             f"exceed p_b_max ({cfg.p_b_max})")
    _require(cfg.num_users * cfg.num_subcarriers * cfg.power_mask > cfg.p_i_max,
             f"N * M * power_mask must exceed p_i_max ({cfg.p_i_max})")

    theta = cfg.varphi * cfg.V + cfg.o_max
    out = dataclasses.replace(cfg, renewable_states=states,
                              theta=theta, q_max=q_max, w_max=w_max)
    if cfg.validated:
        _require(abs(cfg.theta - theta) < 1e-12 and cfg.q_max == q_max
                 and cfg.w_max == w_max, "stale derived fields")
    return out


@dataclass(frozen=True)
class ChannelRealization:
    """Normalized gains for one slot: already divided by gamma_gap * N0."""

    h_bu: np.ndarray   # (N, M) BS -> user
    h_br: np.ndarray   # (K, M) BS -> relay
    h_ru: np.ndarray   # (K, N, M) relay -> user

    def __post_init__(self):
        for name in ("h_bu", "h_br", "h_ru"):
            a = getattr(self, name)
            if not (np.all(np.isfinite(a)) and np.all(a >= 0)):
                raise ValueError(f"{name} must be finite and non-negative")


@dataclass
class SystemState:
    """Queue and battery state at a slot boundary."""

    q: np.ndarray      # (N,) data backlog, bits
    u: np.ndarray      # (N,) virtual queue, bits
    s: float           # battery level
    t: int = 0

    @staticmethod
    def initial(num_users: int, s0: float = 0.0) -> "SystemState":
        return SystemState(q=np.zeros(num_users), u=np.zeros(num_users), s=s0, t=0)

    def copy(self) -> "SystemState":
        return SystemState(q=self.q.copy(), u=self.u.copy(), s=self.s, t=self.t)


# Subcarrier assignment encoding in SlotDecision.assign_kind
UNASSIGNED = 0
DIRECT = 1
COOP = 2


@dataclass
class SlotDecision:
    """All decisions taken in one slot."""

    admit_r: np.ndarray     # (N,) admitted bits
    aux_x: np.ndarray       # (N,) auxiliary rates, bits
    assign_kind: np.ndarray # (M,) UNASSIGNED | DIRECT | COOP
    assign_user: np.ndarray # (M,) destination user, -1 if unassigned
    assign_relay: np.ndarray# (M,) helping relay, -1 unless COOP
    p_b: np.ndarray         # (M,) BS power per subcarrier
    p_r: np.ndarray         # (M,) relay power on the assigned pair, 0 elsewhere
    rate_mu: np.ndarray     # (N,) service rate, bits/slot
    grid_j: float = 0.0
    discharge_o: float = 0.0
    charge_frac: float = 0.0
    harvested_w: float = 0.0

    def p_b_total(self) -> float:
        return float(self.p_b.sum())

    def relay_dynamic(self, num_relays: int) -> np.ndarray:
        """Per-relay dynamic power totals, (K,)."""
        out = np.zeros(num_relays)
        coop = self.assign_kind == COOP
        np.add.at(out, self.assign_relay[coop], self.p_r[coop])
        return out

    def p_r_dense(self, num_relays: int, num_users: int) -> np.ndarray:
        """Relay powers as a dense (K, N, M) array."""
        m = self.p_b.shape[0]
        out = np.zeros((num_relays, num_users, m))
        for mm in np.flatnonzero(self.assign_kind == COOP):
            out[self.assign_relay[mm], self.assign_user[mm], mm] = self.p_r[mm]
        return out


@dataclass
class TraceRecord:
    """One logged slot; all metrics and figures derive from these."""

    t: int
    state: SystemState
    decision: SlotDecision
    grid_power: float
    utility_term: float     # phi * sum f(X_n)
    energy_term: float      # varphi * grid_power
    dual_iters: int
    lyapunov_value: float
