import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cmp3d.power_model import (
    DEFAULT_ALPHA,
    DomainError,
    IdleModel,
    PowerLawParams,
    chip_power_asymmetric,
    chip_power_symmetric,
    core_power,
    idle_power,
    valid_core_sizes,
)

P = PowerLawParams()
# 25 * 2**-1.75, evaluated with mpmath at 30 digits
P64 = 7.432544468767006666984374816
P1 = float(Fraction(25, 128))


def test_alpha_from_pollack_and_power_performance_exponents():
    assert DEFAULT_ALPHA == 0.875


@pytest.mark.parametrize("r, expected", [(256, 25.0), (1, P1), (64, P64)])
def test_core_power(r, expected):
    assert core_power(r, P) == pytest.approx(expected, rel=1e-14)


def test_unit_core_is_exact_power_of_two_fraction():
    # 256**0.875 == 2**7
    assert core_power(1, P) == 0.1953125


@pytest.mark.parametrize("r", [0, 0.5, 257, -3])
def test_core_power_rejects_out_of_range(r):
    with pytest.raises(DomainError, match=str(r)):
        core_power(r, P)


@pytest.mark.parametrize("r, k, expected", [(256, 0.2, 5.0), (1, 0.2, 0.0390625), (64, 0.0, 0.0)])
def test_idle_power(r, k, expected):
    assert idle_power(r, P, IdleModel(k)) == pytest.approx(expected, rel=1e-14, abs=0)


@pytest.mark.parametrize("r, expected", [(1, 50.0), (256, 25.0), (64, 4 * P64)])
def test_chip_power_symmetric(r, expected):
    assert chip_power_symmetric(r, P) == pytest.approx(expected, rel=1e-14)


def test_chip_power_symmetric_requires_divisor():
    with pytest.raises(DomainError):
        chip_power_symmetric(3, P)


@pytest.mark.parametrize("r, expected", [(256, 25.0), (1, 50.0), (64, P64 + 192 * P1)])
def test_chip_power_asymmetric(r, expected):
    assert chip_power_asymmetric(r, P) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("kwargs", [
    {"p_full": 0}, {"budget": 0}, {"budget": 2.5}, {"alpha": 0}, {"alpha": 1.2}, {"chip_area": -1},
])
def test_params_invariants(kwargs):
    with pytest.raises(DomainError):
        PowerLawParams(**kwargs)


@pytest.mark.parametrize("k", [-0.1, 1.5])
def test_idle_model_invariants(k):
    with pytest.raises(DomainError):
        IdleModel(k)


def test_valid_core_sizes():
    assert valid_core_sizes(256) == [1, 2, 4, 8, 16, 32, 64, 128, 256]
    assert valid_core_sizes(48) == [1, 2, 4, 8, 16]


alphas = st.floats(min_value=0.05, max_value=1.0)
sizes = st.sampled_from(valid_core_sizes(256))


@given(alphas, st.floats(1, 255))
def test_core_power_increasing(alpha, r):
    p = PowerLawParams(alpha=alpha)
    assert core_power(min(256, r + 1), p) > core_power(r, p)


@given(st.floats(0.05, 0.999))
def test_symmetric_power_decreasing_for_sublinear_alpha(alpha):
    p = PowerLawParams(alpha=alpha)
    vals = [chip_power_symmetric(r, p) for r in valid_core_sizes(256)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_symmetric_power_constant_for_linear_alpha():
    p = PowerLawParams(alpha=1.0)
    for r in valid_core_sizes(256):
        assert chip_power_symmetric(r, p) == pytest.approx(25.0, rel=1e-14)


@given(alphas, sizes)
def test_asymmetric_dominates_symmetric(alpha, r):
    p = PowerLawParams(alpha=alpha)
    assert chip_power_asymmetric(r, p) >= chip_power_symmetric(r, p) * (1 - 1e-14)


@given(alphas, st.floats(1, 64), st.sampled_from([64, 128, 256, 1024]))
def test_scale_free(alpha, frac_r, budget):
    # same r / budget ratio => same p / p_full
    a = PowerLawParams(p_full=3.0, budget=budget, alpha=alpha)
    b = PowerLawParams(p_full=40.0, budget=2 * budget, alpha=alpha)
    r = frac_r * budget / 64
    assert core_power(r, a) / a.p_full == pytest.approx(core_power(2 * r, b) / b.p_full, rel=1e-12)
    assert math.isclose(core_power(budget, a), a.p_full)
