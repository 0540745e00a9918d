"""Seeded stochastic inputs: cell geometry, fading, traffic and renewables.

Every random quantity is drawn from its own named substream derived from a
single master seed, so changing how one stream is consumed never perturbs
the others.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ChannelRealization, SystemConfig

_STREAMS = ("traffic", "fading", "renewable", "geometry", "uncertainty")


@dataclass
class RngStreams:
    traffic: np.random.Generator
    fading: np.random.Generator
    renewable: np.random.Generator
    geometry: np.random.Generator
    uncertainty: np.random.Generator

    @staticmethod
    def from_seed(master_seed: int) -> "RngStreams":
        children = np.random.SeedSequence(master_seed).spawn(len(_STREAMS))
        gens = {name: np.random.Generator(np.random.PCG64(ss))
                for name, ss in zip(_STREAMS, children)}
        return RngStreams(**gens)


@dataclass(frozen=True)
class Geometry:
    """Node positions in meters, BS at the origin."""

    user_positions: np.ndarray   # (N, 2)
    relay_positions: np.ndarray  # (K, 2)

    def user_distances(self) -> np.ndarray:
        return np.hypot(self.user_positions[:, 0], self.user_positions[:, 1])

    def relay_distances(self) -> np.ndarray:
        return np.hypot(self.relay_positions[:, 0], self.relay_positions[:, 1])

    def relay_user_distances(self) -> np.ndarray:
        """(K, N) distances between every relay and every user."""
        diff = self.relay_positions[:, None, :] - self.user_positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])


def build_geometry(cfg: SystemConfig, rng: np.random.Generator) -> Geometry:
    """Users uniform in the cell disk, relays equally angle-spaced on the
    circle at half the cell radius (angles start at 0)."""
    n, k = cfg.num_users, cfg.num_relays
    radii = cfg.cell_radius * np.sqrt(rng.uniform(size=n))
    angles = rng.uniform(0.0, 2.0 * np.pi, size=n)
    users = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])

    relay_angles = 2.0 * np.pi * np.arange(k) / max(k, 1)
    r = cfg.cell_radius / 2.0
    relays = np.column_stack([r * np.cos(relay_angles), r * np.sin(relay_angles)])
    if k == 0:
        relays = np.zeros((0, 2))
    return Geometry(user_positions=users, relay_positions=relays)


def _link_gains(dist: np.ndarray, num_sub: int, cfg: SystemConfig,
                rng: np.random.Generator) -> np.ndarray:
    """Normalized gains d^-alpha * |g|^2 / (Gamma * N0) with unit-mean
    exponential Rayleigh power, i.i.d. per subcarrier."""
    if np.any(dist <= 0):
        raise ValueError("zero link distance")
    fading = rng.exponential(scale=1.0, size=dist.shape + (num_sub,))
    pathloss = dist[..., None] ** (-cfg.pathloss_exponent)
    return pathloss * fading / (cfg.gamma_gap * cfg.noise_power)


def sample_channels(geom: Geometry, cfg: SystemConfig,
                    rng: np.random.Generator) -> ChannelRealization:
    """One slot of i.i.d. Rayleigh-faded normalized gains for every link."""
    m = cfg.num_subcarriers
    h_bu = _link_gains(geom.user_distances(), m, cfg, rng)
    if cfg.num_relays > 0:
        h_br = _link_gains(geom.relay_distances(), m, cfg, rng)
        h_ru = _link_gains(geom.relay_user_distances(), m, cfg, rng)
    else:
        h_br = np.zeros((0, m))
        h_ru = np.zeros((0, cfg.num_users, m))
    return ChannelRealization(h_bu=h_bu, h_br=h_br, h_ru=h_ru)


def sample_arrivals(cfg: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    """Per-user arrivals in bits: compound Poisson (packet count) with
    exponential packet sizes, truncated at a_max."""
    counts = rng.poisson(cfg.arrival_rate, size=cfg.num_users)
    bits = np.zeros(cfg.num_users)
    for n, c in enumerate(counts):
        if c > 0:
            bits[n] = rng.exponential(cfg.mean_packet_size, size=c).sum()
    return np.minimum(bits, cfg.a_max)


def sample_renewable(cfg: SystemConfig, rng: np.random.Generator) -> float:
    """One draw from the finite-state harvest distribution."""
    vals = np.array([v for v, _ in cfg.renewable_states])
    probs = np.array([p for _, p in cfg.renewable_states])
    return float(rng.choice(vals, p=probs))


def perturb_channels(ch: ChannelRealization, uncertainty: float,
                     rng: np.random.Generator) -> ChannelRealization:
    """Measured gains H*(1 +/- u) with a random sign per entry."""
    if uncertainty <= 0:
        return ch

    def jitter(a: np.ndarray) -> np.ndarray:
        signs = rng.integers(0, 2, size=a.shape) * 2 - 1
        return a * (1.0 + uncertainty * signs)

    return ChannelRealization(h_bu=jitter(ch.h_bu), h_br=jitter(ch.h_br),
                              h_ru=jitter(ch.h_ru))
