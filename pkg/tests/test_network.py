import math

import pytest
from hypothesis import given, strategies as st

from fdnet.network import (AntennaConfig, Combiner, InvalidParameter, ReceiverStrategy, db_to_linear,
                           dbm_to_watts, from_decibels, linear_to_db, default_params, validate, watts_to_dbm)


def test_43_dbm_in_watts():
    assert dbm_to_watts(43.0) == pytest.approx(19.953, rel=1e-4)


@pytest.mark.trivial
def test_zero_dbm_is_a_milliwatt():
    assert dbm_to_watts(0.0) == pytest.approx(1e-3, rel=1e-15)


@pytest.mark.trivial
def test_minus_60_db():
    assert db_to_linear(-60.0) == pytest.approx(1e-6, rel=1e-15)


def test_from_decibels_pair():
    w, lin = from_decibels(24.0, -50.0)
    assert w == pytest.approx(0.25119, rel=1e-4)
    assert lin == pytest.approx(1e-5, rel=1e-12)


@given(st.floats(-150, 150, allow_nan=False))
def test_decibel_round_trip(x):
    assert linear_to_db(db_to_linear(x)) == pytest.approx(x, rel=1e-12, abs=1e-12)
    assert watts_to_dbm(dbm_to_watts(x)) == pytest.approx(x, rel=1e-12, abs=1e-12)


def test_defaults_accepted():
    checked = validate(default_params(), AntennaConfig(2, 2))
    assert checked.ant.n_rx == 2


@pytest.mark.trivial
def test_alpha_two_rejected():
    with pytest.raises(InvalidParameter, match="alpha must exceed 2"):
        validate(default_params().replace(alpha=2.0), AntennaConfig())


@pytest.mark.trivial
def test_m_cancel_equal_to_n_rx_rejected():
    with pytest.raises(InvalidParameter, match="m_cancel"):
        validate(default_params(), AntennaConfig(2, 2, m_cancel=2))


@pytest.mark.parametrize("field,value,message", [
    ("lam", 0.0, "lambda"), ("p_ul", -1.0, "p_ul"), ("r_dl", 0.0, "r_dl"), ("theta", 0.0, "theta"),
    ("noise", 1e-12, "noise"), ("lam", math.nan, "finite"),
])
def test_named_violations(field, value, message):
    with pytest.raises(InvalidParameter, match=message):
        validate(default_params().replace(**{field: value}), AntennaConfig())


def test_noise_allowed_for_simulation_only():
    validate(default_params().replace(noise=1e-12), AntennaConfig(), allow_noise=True)


def test_strategy_constraints():
    with pytest.raises(InvalidParameter, match="n_rx >= 2"):
        validate(default_params(), AntennaConfig(1, 1), ReceiverStrategy(Combiner.PZF_SI))
    with pytest.raises(InvalidParameter, match="2-antenna DL node"):
        validate(default_params(), AntennaConfig(1, 1), ReceiverStrategy(Combiner.DL_PZF_INTERNODE))
    validate(default_params(), AntennaConfig(1, 1, n_dl=2), ReceiverStrategy(Combiner.DL_PZF_INTERNODE))
    with pytest.raises(InvalidParameter):
        validate(default_params(), AntennaConfig(2, 2), ReceiverStrategy(Combiner.PZF_SI_PLUS_NEAREST, 1))


def test_strategy_parse_and_name():
    s = ReceiverStrategy.parse("PZF-Nearest", 2)
    assert s.kind is Combiner.PZF_NEAREST and str(s) == "pzf-nearest(2)" and s.cancelled == 2
    with pytest.raises(InvalidParameter, match="unknown strategy"):
        ReceiverStrategy.parse("zf")


@given(st.floats(1e-6, 1e-2), st.floats(2.1, 6.0), st.integers(1, 8))
def test_validate_is_pure(lam, alpha, n):
    p = default_params(lam).replace(alpha=alpha)
    assert validate(p, AntennaConfig(n, n)) == validate(p, AntennaConfig(n, n))
