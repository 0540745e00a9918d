import numpy as np
import pytest

from hybridrelay import alloc, oracle
from hybridrelay.model import (ChannelRealization, SystemConfig, SystemState,
                               validate_config)

TINY = validate_config(SystemConfig(
    num_users=2, num_relays=1, num_subcarriers=2, power_mask=1.0,
    p_b_max=1.2, dp_b=0.5, p_i_max=0.8, dp_i=0.1, o_max=2.0, j_max=2.0,
    s_max=6.0, renewable_states=((1.0, 1.0),), varphi=0.5, V=1.0, phi=1.0,
    buffer_packets=10, mean_packet_size=1.0, a_max=4.0, arrival_rate=2.0))


def test_direct_grid_monotone_objective():
    # battery-rich: objective increasing in p -> grid best at the mask
    obj, p = oracle.grid_search_direct(w=2.0, coef_b=1.0, h=1.0, pmask=0.5,
                                       resolution=200)
    assert p == 0.5
    assert obj == pytest.approx(2.0 * np.log2(1.5) + 0.5)


def test_zero_weight_negative_terms_zero_powers():
    obj, (p_b, p_r) = oracle.grid_search_coop(
        w=0.0, coef_b=-1.0, price=1.0, h_br=1.0, h_bu=1.0, h_ru=1.0,
        pmask=1.0, resolution=150)
    assert (obj, p_b, p_r) == (0.0, 0.0, 0.0)


def test_grid_matches_closed_form_case1_example():
    # relay-bottlenecked branch, interior relay power
    params = {"w": 2.0 * 2.0 * np.log(2.0), "coef_b": -0.4, "price": 1.0,
              "h_br": 10.0, "h_bu": 1.0, "h_ru": 2.0, "pmask": 1.0}
    closed, _ = alloc.closed_form_coop(
        params["w"], params["coef_b"], params["price"], params["h_br"],
        params["h_bu"], params["h_ru"], params["pmask"])
    grid, _ = oracle.grid_search_subproblem("coop", params, 2000)
    assert closed == pytest.approx(grid, abs=1e-4)


def test_resolution_refinement_never_hurts_much():
    params = {"w": 5.0, "coef_b": -2.0, "price": 0.5, "h_br": 3.0,
              "h_bu": 1.0, "h_ru": 2.0, "pmask": 1.0}
    coarse, _ = oracle.grid_search_subproblem("coop", params, 200)
    fine, _ = oracle.grid_search_subproblem("coop", params, 400)
    err = oracle.grid_error_bound("coop", params, 200)
    assert fine >= coarse - 1e-12
    assert fine - coarse <= err


def test_resolution_floor_enforced():
    with pytest.raises(ValueError):
        oracle.grid_search_subproblem("direct",
                                      {"w": 1, "coef_b": 0, "h": 1,
                                       "pmask": 1}, resolution=50)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        oracle.grid_search_subproblem("weird", {}, 200)


def _state(u, q, s):
    return SystemState(q=np.asarray(q, dtype=float),
                       u=np.asarray(u, dtype=float), s=float(s))


def test_exhaustive_rejects_large_instances():
    big = ChannelRealization(h_bu=np.ones((3, 2)), h_br=np.ones((1, 2)),
                             h_ru=np.ones((1, 3, 2)))
    with pytest.raises(ValueError, match="too large"):
        oracle.exhaustive_slot(_state(np.ones(3), np.ones(3), 0.0), big,
                               TINY, 10)


def test_exhaustive_empty_queues_zero():
    ch = ChannelRealization(h_bu=np.ones((2, 2)), h_br=np.ones((1, 2)),
                            h_ru=np.ones((1, 2, 2)))
    assert oracle.exhaustive_slot(_state(np.zeros(2), np.zeros(2), 0.0),
                                  ch, TINY, 20) == 0.0


def test_exhaustive_degenerate_matches_1d_grid():
    # M=1, K=0: reduces to the direct subproblem grid + sum-power check
    cfg = validate_config(SystemConfig(
        num_users=1, num_relays=0, num_subcarriers=2, power_mask=1.0,
        p_b_max=1.2, dp_b=0.5, p_i_max=0.8, o_max=2.0, j_max=2.0, s_max=6.0,
        renewable_states=((1.0, 1.0),), varphi=0.5, V=1.0, phi=1.0,
        buffer_packets=10, mean_packet_size=1.0, a_max=4.0, arrival_rate=2.0))
    st = _state([4.0], [5.0], cfg.theta - 1.0)
    ch = ChannelRealization(h_bu=np.array([[2.0]]), h_br=np.zeros((0, 1)),
                            h_ru=np.zeros((0, 1, 1)))
    w = 4.0 * 5.0 / cfg.q_max
    grid, _ = oracle.grid_search_direct(w, -1.0, 2.0, cfg.power_mask,
                                        resolution=500)
    assert oracle.exhaustive_slot(st, ch, cfg, 500) == pytest.approx(grid)


def test_exhaustive_deterministic():
    rng = np.random.default_rng(2)
    ch = ChannelRealization(h_bu=rng.uniform(0.1, 3, (2, 2)),
                            h_br=rng.uniform(0.1, 3, (1, 2)),
                            h_ru=rng.uniform(0.1, 3, (1, 2, 2)))
    st = _state(rng.uniform(0, 10, 2), rng.uniform(0, 10, 2), 1.0)
    a = oracle.exhaustive_slot(st, ch, TINY, 25)
    b = oracle.exhaustive_slot(st, ch, TINY, 25)
    assert a == b


def test_exhaustive_respects_sum_caps():
    """With gains so good every subcarrier wants full power, the oracle value
    must still be attainable under the sum cap: it can never exceed the
    unconstrained per-subcarrier sum."""
    ch = ChannelRealization(h_bu=np.full((2, 2), 50.0),
                            h_br=np.full((1, 2), 50.0),
                            h_ru=np.full((1, 2, 2), 50.0))
    st = _state([10.0, 10.0], [10.0, 10.0], TINY.theta + 3.0)
    val = oracle.exhaustive_slot(st, ch, TINY, 40)
    # unconstrained: both subcarriers at the full 1.0 W mask
    w = 10.0 * 10.0 / TINY.q_max
    unconstrained = 2 * (w * np.log2(1 + 1.0 * 50.0)
                         + (st.s - TINY.theta) * 1.0)
    assert 0.0 < val < unconstrained
