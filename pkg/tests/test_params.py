import math

import pytest
from hypothesis import given, strategies as st

from cavity_dressed.errors import ConfigError, ValidationError
from cavity_dressed.params import (
    KHZ, Detuning, SystemParams, cooperativity, paper_params, params_from_linear_khz, to_linear_khz,
)

BASE = {"g0": 66, "kappa": 70, "gamma": 182.4}


def test_paper_cooperativity():
    c1, c = cooperativity(paper_params(n_atoms=25000))
    assert c1 == pytest.approx(0.341, abs=5e-4)
    assert 0.33 <= c1 <= 0.35
    assert c == pytest.approx(25000 * 66**2 / (70 * 182.4), rel=1e-12)
    assert c == pytest.approx(8.5e3, rel=0.01)


def test_zero_atoms_zero_collective():
    assert cooperativity(paper_params(n_atoms=0))[1] == 0.0


def test_identity_cooperativity():
    p = SystemParams(g0=2.0, kappa=1.0, gamma=4.0)
    assert cooperativity(p)[0] == 1.0


def test_conversion_factor():
    p = params_from_linear_khz({**BASE, "eta": 87000, "delta_omega": 900, "gamma_d": 1, "n_atoms": 25000})
    assert p.eta == pytest.approx(2 * math.pi * 87e6, rel=1e-15)
    assert p.delta_omega == pytest.approx(2 * math.pi * 0.9e6, rel=1e-15)
    assert p.gamma_d == pytest.approx(2 * math.pi * 1e3, rel=1e-15)
    assert p.n_atoms == 25000


def test_zero_drive_valid():
    assert params_from_linear_khz({**BASE, "eta": 0}).eta == 0


@pytest.mark.parametrize("key", ["g0", "kappa", "gamma"])
def test_missing_key_named(key):
    values = dict(BASE)
    del values[key]
    with pytest.raises(ConfigError, match=key):
        params_from_linear_khz(values)


@pytest.mark.parametrize("key", ["eta", "gamma_d", "delta_omega", "n_atoms"])
def test_negative_rejected(key):
    with pytest.raises(ValidationError, match=key):
        params_from_linear_khz({**BASE, key: -1})


def test_nonpositive_rates_rejected():
    with pytest.raises(ValidationError):
        SystemParams(g0=0.0, kappa=1.0, gamma=1.0)


def test_detuning_must_be_finite():
    with pytest.raises(ValidationError):
        Detuning(float("nan"), 0.0)


rate = st.floats(min_value=1e-3, max_value=1e6, allow_nan=False)


@given(g0=rate, kappa=rate, gamma=rate, eta=st.floats(0, 1e6), dw=st.floats(0, 1e5),
       n=st.floats(0, 1e6))
def test_unit_round_trip(g0, kappa, gamma, eta, dw, n):
    values = {"g0": g0, "kappa": kappa, "gamma": gamma, "eta": eta, "delta_omega": dw,
              "gamma_d": 0.0, "n_atoms": n}
    back = to_linear_khz(params_from_linear_khz(values))
    for k, v in values.items():
        assert back[k] == pytest.approx(v, rel=1e-12, abs=0)


def test_khz_constant():
    assert KHZ == 2 * math.pi * 1000
