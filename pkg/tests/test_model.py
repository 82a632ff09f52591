import math

import pytest

from ofdm_dcsk.model import (Allocation, InvalidParameterError, SystemParams,
                             ebn0_db_to_linear, require_valid, validate)


@pytest.mark.parametrize("db,expected", [(0.0, 1.0), (10.0, 10.0), (-10.0, 0.1)])
def test_db_conversion_exact_points(db, expected):
    assert ebn0_db_to_linear(db) == pytest.approx(expected, rel=1e-15)


def test_db_conversion_nine_db():
    # 10**0.9 to 40 digits, evaluated with mpmath
    assert ebn0_db_to_linear(9.0) == pytest.approx(7.943282347242815426780619801726, rel=1e-14)


def test_db_conversion_scales_with_n0():
    assert ebn0_db_to_linear(3.0, n0=2.5) == pytest.approx(2.5 * 10**0.3)


@pytest.mark.parametrize("db,n0", [(math.nan, 1.0), (math.inf, 1.0), (0.0, 0.0), (0.0, -1.0)])
def test_db_conversion_rejects(db, n0):
    with pytest.raises(InvalidParameterError):
        ebn0_db_to_linear(db, n0)


def test_valid_reference_point():
    params = SystemParams.from_ebn0_db(64, 128, 1, 10.0)
    assert validate(params, Allocation(12, 1.0, 1.0)) == []
    assert params.ebn0_db == pytest.approx(10.0)


def test_n_equal_m_rejected():
    params = SystemParams(64, 128, 1, 10.0)
    problems = validate(params, Allocation(64))
    assert len(problems) == 1 and "n_ref < n_subcarriers" in problems[0]


def test_budget_violation():
    params = SystemParams(64, 128, 1, 10.0)
    alloc = Allocation(63, 1.0, 1.0)
    assert alloc.power_sum(64) == 64
    problems = validate(params, alloc, budget=10.0)
    assert problems == ["power_sum <= budget (got 64.0 > 10.0)"]
    assert validate(params, alloc, budget=None) == []


@pytest.mark.parametrize("params", [
    SystemParams(1, 128, 1, 10.0),
    SystemParams(64, 0, 1, 10.0),
    SystemParams(64, 128, 0, 10.0),
    SystemParams(64, 128, 1, 0.0),
    SystemParams(64, 128, 1, 10.0, n0=math.inf),
    SystemParams(64.5, 128, 1, 10.0),
])
def test_bad_params_reported(params):
    assert validate(params)
    with pytest.raises(InvalidParameterError) as err:
        require_valid(params)
    assert err.value.violations


def test_validate_collects_everything_and_never_raises():
    params = SystemParams("x", None, -1, math.nan, -2.0)
    problems = validate(params, Allocation(None, -1.0, math.nan), budget=1.0)
    assert len(problems) == 8


def test_bad_powers_reported():
    params = SystemParams(16, 32, 1, 10.0)
    assert len(validate(params, Allocation(3, 0.0, -1.0))) == 2
