import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridrelay import phy
from hybridrelay.model import (COOP, DIRECT, UNASSIGNED, ChannelRealization,
                               SlotDecision)

finite_power = st.floats(0.0, 100.0, allow_nan=False)
finite_gain = st.floats(0.0, 1e4, allow_nan=False)


def test_direct_rate_values():
    assert phy.direct_rate(1.0, 1.0) == pytest.approx(1.0)
    assert phy.direct_rate(0.0, 7.3) == pytest.approx(0.0)
    assert phy.direct_rate(3.0, 1.0) == pytest.approx(2.0)


def test_direct_rate_rejects_negative():
    with pytest.raises(ValueError):
        phy.direct_rate(-1.0, 1.0)
    with pytest.raises(ValueError):
        phy.direct_rate(1.0, -1.0)


def test_df_rate_values():
    assert phy.df_rate(1, 1, 3, 1, 1) == pytest.approx(0.5 * np.log2(3))
    assert phy.df_rate(0, 0, 5, 5, 5) == pytest.approx(0.0)
    assert phy.df_rate(1, 1, 1, 0.5, 0.5) == pytest.approx(0.5)


def test_df_rate_rejects_negative():
    with pytest.raises(ValueError):
        phy.df_rate(1, -1, 1, 1, 1)


@given(finite_power, finite_power, finite_gain, finite_gain, finite_gain)
def test_df_rate_first_hop_cap(p_b, p_r, h_br, h_bu, h_ru):
    assert phy.df_rate(p_b, p_r, h_br, h_bu, h_ru) <= \
        0.5 * phy.direct_rate(p_b, h_br) + 1e-12


@given(finite_power, finite_power, finite_power,
       finite_gain, finite_gain, finite_gain)
def test_df_rate_monotone_in_relay_power(p_b, p_r, dp, h_br, h_bu, h_ru):
    assert phy.df_rate(p_b, p_r + dp, h_br, h_bu, h_ru) >= \
        phy.df_rate(p_b, p_r, h_br, h_bu, h_ru) - 1e-12


def _decision(kind, user, relay, p_b, p_r, n=2):
    m = len(kind)
    return SlotDecision(
        admit_r=np.zeros(n), aux_x=np.zeros(n),
        assign_kind=np.array(kind), assign_user=np.array(user),
        assign_relay=np.array(relay), p_b=np.array(p_b, dtype=float),
        p_r=np.array(p_r, dtype=float), rate_mu=np.zeros(n))


def _channels(n=2, k=1, m=3, fill=1.0):
    return ChannelRealization(h_bu=np.full((n, m), fill),
                              h_br=np.full((k, m), fill),
                              h_ru=np.full((k, n, m), fill))


def test_user_rates_all_unassigned():
    d = _decision([UNASSIGNED] * 3, [-1] * 3, [-1] * 3, [0] * 3, [0] * 3)
    assert np.all(phy.user_rates(d, _channels()) == 0.0)


def test_user_rates_single_direct():
    d = _decision([DIRECT, UNASSIGNED, UNASSIGNED], [0, -1, -1],
                  [-1, -1, -1], [1.0, 0, 0], [0, 0, 0])
    mu = phy.user_rates(d, _channels())
    assert mu[0] == pytest.approx(1.0)
    assert mu[1] == 0.0


def test_user_rates_additive_same_user():
    d = _decision([DIRECT, DIRECT, COOP], [1, 1, 1], [-1, -1, 0],
                  [1.0, 3.0, 1.0], [0, 0, 1.0])
    ch = _channels()
    mu = phy.user_rates(d, ch)
    expected = 1.0 + 2.0 + phy.df_rate(1.0, 1.0, 1.0, 1.0, 1.0)
    assert mu[1] == pytest.approx(expected)
    assert mu[0] == 0.0


def test_user_rates_permutation_equivariant():
    rng = np.random.default_rng(3)
    ch = ChannelRealization(h_bu=rng.uniform(0.1, 2, (2, 3)),
                            h_br=rng.uniform(0.1, 2, (1, 3)),
                            h_ru=rng.uniform(0.1, 2, (1, 2, 3)))
    d = _decision([DIRECT, COOP, DIRECT], [0, 1, 1], [-1, 0, -1],
                  [0.5, 0.7, 0.2], [0, 0.3, 0])
    mu = phy.user_rates(d, ch)

    perm = [1, 0]
    ch_p = ChannelRealization(h_bu=ch.h_bu[perm], h_br=ch.h_br,
                              h_ru=ch.h_ru[:, perm, :])
    d_p = _decision([DIRECT, COOP, DIRECT],
                    [perm.index(0), perm.index(1), perm.index(1)],
                    [-1, 0, -1], [0.5, 0.7, 0.2], [0, 0.3, 0])
    mu_p = phy.user_rates(d_p, ch_p)
    assert mu_p[perm] == pytest.approx(mu)
