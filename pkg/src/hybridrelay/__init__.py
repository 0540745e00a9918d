"""Hybrid-energy OFDMA relay downlink: online queue/battery-driven control
with dual-decomposition resource allocation, baselines and brute-force
verification oracles."""

from .model import (ChannelRealization, ConfigError, SlotDecision,
                    SystemConfig, SystemState, TraceRecord, validate_config)
from .sim import (FREE, NO_RELAY_HYBRID, ON_GRID_ONLY, PER_SLOT_NUM,
                  POLICIES, Summary, Trace, metrics, run, sweep)

__all__ = [
    "ChannelRealization", "ConfigError", "SlotDecision", "SystemConfig",
    "SystemState", "TraceRecord", "validate_config",
    "FREE", "NO_RELAY_HYBRID", "ON_GRID_ONLY", "PER_SLOT_NUM", "POLICIES",
    "Summary", "Trace", "metrics", "run", "sweep",
]
