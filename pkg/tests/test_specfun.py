import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsocap.errors import ConfigurationError, ConvergenceError, DomainError
from fsocap.specfun import (
    BesselUnderflowWarning,
    ContourConfig,
    MellinBarnesSpec,
    bessel_k,
    digamma,
    fox_h,
    fox_h_spec,
    ln_gamma,
    ln_gamma_complex,
    ln_gamma_shift,
    log_bessel_k,
    meijer_g_spec,
    mellin_barnes,
    mellin_barnes_eval,
)
from oracles import bessel_k_integral

mp.mp.dps = 50


# ---------------------------------------------------------------- log-gamma


def test_ln_gamma_known_values():
    assert ln_gamma_complex(1.0) == pytest.approx(0.0, abs=1e-15)
    assert ln_gamma_complex(0.5).real == pytest.approx(0.5723649429247001, rel=1e-14)
    assert ln_gamma(10.0) == pytest.approx(math.log(362880.0), rel=1e-14)


@pytest.mark.parametrize("z", [3 + 4j, 0.1 + 0.01j, -2.5 + 0.5j, 25 - 60j, 90 + 30j, -7.3 - 2.2j])
def test_ln_gamma_complex_against_mpmath(z):
    got = ln_gamma_complex(z)
    want = complex(mp.loggamma(mp.mpc(z.real, z.imag)))
    assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


def test_ln_gamma_complex_exponentiates_to_gamma():
    rng = np.random.default_rng(11)
    z = rng.uniform(-9.5, 60, 300) + 1j * rng.uniform(-30, 30, 300)
    got = np.exp(ln_gamma_complex(z))
    want = np.array([complex(mp.gamma(mp.mpc(v.real, v.imag))) for v in z])
    assert np.all(np.abs(got - want) <= 1e-11 * np.abs(want))


def test_ln_gamma_complex_recurrence_on_strip():
    rng = np.random.default_rng(5)
    z = rng.uniform(0, 20, 1000) + 1j * rng.uniform(-20, 20, 1000)
    lhs = np.exp(ln_gamma_complex(z + 1) - ln_gamma_complex(z))
    assert np.max(np.abs(lhs / z - 1)) <= 1e-10


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 20), st.floats(-20, 20))
def test_ln_gamma_recurrence_property(x, y):
    z = complex(x, y)
    ratio = np.exp(ln_gamma_complex(z + 1) - ln_gamma_complex(z))
    assert abs(ratio / z - 1) <= 1e-10


@pytest.mark.parametrize("z", [0, -1, -7, complex(-3, 0)])
def test_ln_gamma_pole_raises(z):
    with pytest.raises(DomainError, match="pole"):
        ln_gamma_complex(z)


@pytest.mark.parametrize("x,d", [(0.3, 2.0), (19.9, 0.4), (20.0, 4.0), (350.0, -1.5), (8.0e4, 2.0), (1e7, 0.25)])
def test_ln_gamma_shift_against_mpmath(x, d):
    X, D = mp.mpf(x), mp.mpf(d)
    want = mp.loggamma(X + D) - mp.loggamma(X) - D * mp.log(X) + D
    assert ln_gamma_shift(x, d) == pytest.approx(float(want), rel=1e-13, abs=1e-15)


def test_ln_gamma_shift_domain():
    with pytest.raises(DomainError):
        ln_gamma_shift(1.0, -1.0)


# ---------------------------------------------------------------- digamma


def test_digamma_constants():
    assert digamma(1.0) == pytest.approx(-0.5772156649015329, abs=1e-14)
    assert digamma(2.0) == pytest.approx(1 - 0.5772156649015329, abs=1e-14)
    assert digamma(7.37) == pytest.approx(float(mp.digamma(mp.mpf("7.37"))), abs=1e-13)


def test_digamma_grid_against_mpmath():
    xs = np.geomspace(1e-3, 1e3, 241)
    got = digamma(xs)
    want = np.array([float(mp.digamma(mp.mpf(float(x)))) for x in xs])
    assert np.max(np.abs(got - want)) <= 1e-12


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_digamma_domain(x):
    with pytest.raises(DomainError):
        digamma(x)


# ---------------------------------------------------------------- Bessel K


def test_bessel_half_integer_closed_form():
    assert bessel_k(0.5, 2.0) == pytest.approx(math.sqrt(math.pi / 4) * math.exp(-2), rel=1e-14)
    assert bessel_k(0.5, 2.0) == pytest.approx(0.1199377, abs=1e-7)


def test_bessel_integer_order_against_series_oracle():
    assert bessel_k(3, 1.0) == pytest.approx(float(mp.besselk(3, 1)), rel=1e-12)


def test_bessel_symmetry():
    assert bessel_k(2.3, 5.0) == bessel_k(-2.3, 5.0)


def test_bessel_against_defining_integral():
    rng = np.random.default_rng(2)
    for nu, x in zip(rng.uniform(0, 5, 200), rng.uniform(0.1, 20, 200)):
        assert bessel_k(nu, x) == pytest.approx(bessel_k_integral(nu, x), rel=1e-8)


def test_bessel_relative_accuracy_on_range():
    rng = np.random.default_rng(3)
    nus = rng.uniform(-12, 12, 150)
    xs = np.exp(rng.uniform(math.log(1e-6), math.log(700), 150))
    for nu, x in zip(nus, xs):
        want = mp.besselk(mp.mpf(float(nu)), mp.mpf(float(x)))
        got = log_bessel_k(nu, x)
        assert abs(got - float(mp.log(want))) <= 1e-10 * max(1.0, abs(float(mp.log(want))))
        if want > 1e-300 and want < 1e300:
            assert bessel_k(nu, x) == pytest.approx(float(want), rel=1e-10)


def test_bessel_vector_matches_scalar():
    x = np.geomspace(1e-3, 300, 50)
    vec = log_bessel_k(1.7, x)
    assert np.allclose(vec, [log_bessel_k(1.7, v) for v in x], rtol=1e-13, atol=0)


def test_bessel_underflow_flag():
    with pytest.warns(BesselUnderflowWarning):
        val = bessel_k(1.0, 800.0)
    assert val == 0.0
    assert math.isfinite(log_bessel_k(1.0, 800.0))


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_bessel_domain(x):
    with pytest.raises(DomainError):
        bessel_k(1.0, x)


# ---------------------------------------------------------------- Mellin-Barnes


EXP_SPEC = fox_h_spec(1, 0, [], [(0.0, 1.0)])


def test_mellin_exp_identity_at_one():
    assert mellin_barnes_eval(EXP_SPEC, 1.0) == pytest.approx(0.3678794, abs=1e-7)


@pytest.mark.parametrize("x", [0.01, 0.1, 1.0, 10.0])
def test_mellin_exp_identity(x):
    assert mellin_barnes_eval(EXP_SPEC, x) == pytest.approx(math.exp(-x), abs=1e-8)


@pytest.mark.parametrize("x", [1.0, 0.2, 3.0, 40.0])
def test_mellin_log1p_identity(x):
    # ln(1 + x) = H^{1,2}_{2,2}[x | (1,1),(1,1); (1,1),(0,1)]
    val = fox_h(x, 1, 2, [(1, 1), (1, 1)], [(1, 1), (0, 1)])
    assert val == pytest.approx(math.log1p(x), abs=1e-10)


@pytest.mark.parametrize("mu", [0.7, 2.0, 3.5])
@pytest.mark.parametrize("x", [0.05, 1.0, 20.0])
def test_capacity_kernel_rational_case_against_meijer_oracle(mu, x):
    # alpha = 2 turns every Fox-H scale into 1, i.e. a Meijer G; mpmath evaluates it by hypergeometric series
    val = fox_h(x, 1, 3, [(1, 1), (1, 1), (1 - mu, 1)], [(1, 1), (0, 1)])
    want = mp.meijerg([[1, 1, 1 - mu], []], [[1], [0]], x)
    assert val == pytest.approx(float(want), rel=1e-9, abs=1e-12)


def test_mellin_double_pole_kernel_against_mpmath():
    # G^{6,1}_{2,6} with a repeated lower parameter (double poles)
    u, v = 1.4, 2.2
    a = [-u, 1 - u]
    b = [v / 4, (v + 2) / 4, -v / 4, -(v - 2) / 4, -u, -u]
    spec = meijer_g_spec(6, 1, a, b)
    for x in (0.3, 2.0):
        want = mp.meijerg([[a[0]], [a[1]]], [b, []], x)
        assert mellin_barnes_eval(spec, x) == pytest.approx(float(want), rel=1e-9)


def test_mellin_refinement_self_consistency():
    spec = fox_h_spec(1, 3, [(1, 1), (1, 1), (-1.5, 0.8)], [(1, 1), (0, 1)])
    cfg = ContourConfig(half_height=6.0, nodes=128, tolerance=1e-10)
    big = ContourConfig(half_height=12.0, nodes=256, tolerance=1e-10)
    r1 = mellin_barnes(spec, 3.0, cfg)
    r2 = mellin_barnes(spec, 3.0, big)
    assert abs(r1.value - r2.value) < cfg.tolerance
    assert r1.imag_residue <= 1e-10


def test_mellin_argument_exponent_plus():
    spec = MellinBarnesSpec(sign_terms=[(0.0, 1.0)], argument_exponent=1)
    assert mellin_barnes_eval(spec, 2.0) == pytest.approx(math.exp(-2.0), abs=1e-10)


def test_mellin_overlapping_poles_is_configuration_error():
    spec = MellinBarnesSpec(numerator_terms=[(2.0, 1.0)], sign_terms=[(-3.0, 1.0)])
    with pytest.raises(ConfigurationError, match="overlap"):
        mellin_barnes_eval(spec, 1.0)


def test_mellin_bad_omega_is_configuration_error():
    with pytest.raises(ConfigurationError):
        mellin_barnes_eval(EXP_SPEC, 1.0, ContourConfig(omega=-2.0))


def test_mellin_nonconvergence_carries_estimates():
    cfg = ContourConfig(max_refinements=0)
    with pytest.raises(ConvergenceError) as info:
        mellin_barnes(EXP_SPEC, 1.0, cfg)
    assert len(info.value.estimates) == 1


def test_contour_config_invariants():
    with pytest.raises(ConfigurationError):
        ContourConfig(nodes=32)
    with pytest.raises(ConfigurationError):
        ContourConfig(half_height=0)
    with pytest.raises(ConfigurationError):
        ContourConfig(tolerance=0)


def test_mellin_rejects_nonpositive_argument():
    with pytest.raises(DomainError):
        mellin_barnes_eval(EXP_SPEC, 0.0)


def test_mellin_is_pure():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        a = mellin_barnes(EXP_SPEC, 0.7)
        b = mellin_barnes(EXP_SPEC, 0.7)
    assert a == b
