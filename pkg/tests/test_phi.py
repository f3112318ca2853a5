import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from besovkit.errors import ArgumentError, DomainError, RangeError
from besovkit.phi import (
    PhiSpec,
    catalog,
    check_epsilon_condition,
    check_gp_membership,
    check_integral_condition,
    evaluate,
    find_epsilon,
    log_decay_example,
    normalize,
    smallest_powerlog_shift,
    times_power,
)

T = np.geomspace(1e-4, 1e4, 41)


def brute_member(fn, p, d, t=np.geomspace(1e-6, 1e6, 2001)):
    v = np.array([fn(x) for x in t])
    w = v * t ** (-d / p)
    return bool(np.all(np.diff(v) >= -1e-12 * v[1:]) and np.all(np.diff(w) <= 1e-12 * w[1:]))


def test_evaluate_closed_forms():
    assert np.allclose(evaluate(PhiSpec.constant(2.5), T), 2.5)
    assert np.allclose(evaluate(PhiSpec.power(0.3), T), T**0.3, rtol=1e-14)
    pw = PhiSpec.piecewise_power(2.0, 4.0, d=2)
    assert np.allclose(evaluate(pw, T), np.where(T <= 1, T ** (2 / 2.0), T ** (2 / 4.0)), rtol=1e-14)
    pl = PhiSpec.power_log(-1.0, 10.0, d=1, p=2.0)
    assert np.allclose(evaluate(pl, T), T**0.5 * np.log(10.0 + T) ** -1.0, rtol=1e-13)


def test_tabulated_interpolates_in_log_space_and_guards_range():
    knots = [0.1, 1.0, 10.0]
    phi = PhiSpec.tabulated(knots, [0.1, 1.0, 10.0])
    assert evaluate(phi, 3.0) == pytest.approx(3.0, rel=1e-12)
    with pytest.raises(RangeError):
        evaluate(phi, 100.0)
    with pytest.raises(DomainError):
        evaluate(PhiSpec.power(0.5), -1.0)


@pytest.mark.parametrize("d,p", [(1, 2.0), (2, 0.75), (3, 4.0)])
def test_power_membership_boundary_inclusive(d, p):
    assert check_gp_membership(PhiSpec.power(d / p, d, p)).member
    assert check_gp_membership(PhiSpec.power(0.0, d, p)).member
    res = check_gp_membership(PhiSpec.power(d / p + 0.1, d, p))
    assert not res.member
    t, s = res.witness
    assert t < s


@given(u=st.floats(0.0, 4.0), p=st.sampled_from([0.75, 1.5, 2.0, 4.0]), d=st.integers(1, 3))
def test_power_membership_matches_loop_oracle(u, p, d):
    got = check_gp_membership(PhiSpec.power(u, d, p), analytic=False).member
    if abs(u - d / p) > 1e-6:
        assert got == brute_member(lambda t: t**u, p, d)


def test_piecewise_belongs_to_smaller_exponent():
    for a, b in [(1.0, 3.0), (5.0, 0.5), (2.0, 2.0)]:
        assert check_gp_membership(PhiSpec.piecewise_power(a, b, 1, min(a, b))).member
        assert check_gp_membership(PhiSpec.piecewise_power(a, b, 1, 0.5 * min(a, b))).member
        assert not check_gp_membership(PhiSpec.piecewise_power(a, b, 1, 1.1 * min(a, b))).member


def test_power_log_shift_and_grid_agree():
    L0 = smallest_powerlog_shift(-1.0, 2.0, 1)
    assert L0 is not None and L0 > 1
    big = PhiSpec.power_log(-1.0, 2 * L0, 1, 2.0)
    assert check_gp_membership(big).member
    assert check_gp_membership(big, analytic=False).member
    oracle = brute_member(lambda t: t**0.5 * math.log(2 * L0 + t) ** -1.0, 2.0, 1)
    assert oracle


def test_log_decay_example_rejected():
    for u in (0.001, 0.01, 0.04):
        assert not check_gp_membership(log_decay_example(u, 1, 2.0)).member


@pytest.mark.parametrize("u", [0.0, 0.1, 0.25])
def test_epsilon_for_powers(u):
    phi = PhiSpec.power(u, 1, 2.0)
    eps = find_epsilon(phi)
    assert eps == pytest.approx(0.5 - u, abs=1e-3)
    assert check_epsilon_condition(phi, eps=eps).holds
    assert not check_epsilon_condition(phi, eps=0.5 - u + 0.01).holds


def test_critical_power_has_no_epsilon():
    assert find_epsilon(PhiSpec.power(0.5, 1, 2.0)) is None


@pytest.mark.parametrize("u,p", [(0.0, 2.0), (0.2, 2.0), (0.5, 0.75)])
def test_tail_integral_matches_closed_form(u, p):
    phi = PhiSpec.power(u, 1, p)
    k = 1 / p - u
    res = check_integral_condition(phi, variant="nintc")
    assert res.holds
    assert res.estimated_C == pytest.approx(1 / k, rel=1e-2)
    res2 = check_integral_condition(phi, variant="nintc2", u=2.0)
    assert res2.estimated_C == pytest.approx(1 / (2 * k), rel=1e-2)


def test_integral_diverges_at_critical_power():
    assert not check_integral_condition(PhiSpec.power(0.5, 1, 2.0), variant="nintc").holds


@given(
    variant=st.sampled_from(["constant", "power", "piecewise", "power_log"]),
    p=st.sampled_from([0.75, 2.0]),
    d=st.integers(1, 2),
)
def test_json_round_trip(variant, p, d):
    phi = {
        "constant": PhiSpec.constant(1.5, d, p),
        "power": PhiSpec.power(0.2, d, p),
        "piecewise": PhiSpec.piecewise_power(1.0, 2.0, d, p),
        "power_log": PhiSpec.power_log(-0.5, 20.0, d, p),
    }[variant]
    back = PhiSpec.from_json(json.loads(json.dumps(phi.to_json())))
    assert back == phi
    assert np.allclose(evaluate(back, T), evaluate(phi, T), rtol=0)


def test_malformed_json_and_bad_params():
    with pytest.raises(ArgumentError):
        PhiSpec.from_json({"params": {}})
    with pytest.raises(ArgumentError):
        PhiSpec("nope")
    with pytest.raises(ArgumentError):
        PhiSpec.power_log(-1.0, 0.5)


def test_normalize_and_times_power():
    phi = PhiSpec.power(0.3, 1, 2.0, scale=4.0)
    assert evaluate(normalize(phi), 1.0) == pytest.approx(1.0)
    tp = times_power(PhiSpec.constant(1.0, 1, 2.0), 0.25)
    assert evaluate(tp, 16.0) == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("p", [0.75, 1.5, 2.0, 4.0])
@pytest.mark.parametrize("d", [1, 2])
def test_catalog_members_are_admissible(p, d):
    for name, phi in catalog(p, d).items():
        assert check_gp_membership(phi).member, name
