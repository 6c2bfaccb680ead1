import math

import pytest
from hypothesis import given, strategies as st

from spin1cdd.physconfig import FieldConfig, epsilon_from_field, noise_scale_from_field, omega0_from_field

RB87 = dict(gF=-0.5, gS=2.0023193, gI=-0.000995, muB=9.2740100783e-24, muN=5.0507837461e-27,
            hbar=1.054571817e-34, deltaW_hf=6.62607015e-34 * 6.8347e9)


def cfg(B0=1e-4, dB=1e-7, **kw):
    return FieldConfig(B0=B0, deltaB_rms=dB, **{**RB87, **kw})


def test_zero_field():
    c = cfg(B0=0.0, dB=0.0)
    assert omega0_from_field(c) == 0.0
    assert noise_scale_from_field(c) == 0.0
    assert epsilon_from_field(c) == 0.0


def test_rb87_one_gauss_larmor():
    # hand calculation: 0.5 * (2.0023193 * 9.2740100783e-24 + 0.000995 * 5.0507837461e-27) * 1e-4
    #   = 9.284786e-28 J, / hbar = 8.80431e6 rad/s = 2 pi * 1.40124 MHz
    w = omega0_from_field(cfg())
    assert w < 0
    assert abs(w) / (2 * math.pi) == pytest.approx(1.40124e6, rel=1e-5)


def test_rb87_one_milligauss_noise():
    assert abs(noise_scale_from_field(cfg())) / (2 * math.pi) == pytest.approx(1.40124e3, rel=1e-5)


def test_rb87_quadratic_zeeman():
    # (1.856952e-27)^2 / (4 * 4.528771e-24 * 1.054572e-34) = 1805.4 rad/s = 2 pi * 287.3 Hz
    eps = epsilon_from_field(cfg())
    assert eps > 0
    assert eps / (2 * math.pi) == pytest.approx(287.34, rel=1e-3)


@given(st.floats(1e-8, 1.0), st.floats(0.0, 1e-3))
def test_noise_to_larmor_ratio(B0, dB):
    c = cfg(B0=B0, dB=dB)
    assert noise_scale_from_field(c) / omega0_from_field(c) == pytest.approx(dB / B0, rel=1e-12)


@given(st.floats(1e-8, 1.0))
def test_scaling(B0):
    assert omega0_from_field(cfg(B0=2 * B0)) == 2 * omega0_from_field(cfg(B0=B0))
    assert epsilon_from_field(cfg(B0=B0)) / epsilon_from_field(cfg(B0=2 * B0)) == pytest.approx(0.25, rel=1e-15)
    assert epsilon_from_field(cfg(B0=4 * B0)) == pytest.approx(16 * epsilon_from_field(cfg(B0=B0)), rel=1e-15)
    assert math.isfinite(epsilon_from_field(cfg(B0=B0)))


@pytest.mark.parametrize("kw", [dict(B0=-1.0), dict(dB=-1e-9), dict(deltaW_hf=0.0), dict(hbar=0.0),
                                dict(B0=math.nan)])
def test_invalid_config(kw):
    with pytest.raises(ValueError):
        cfg(**kw)
