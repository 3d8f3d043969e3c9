import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from funbias.biasred import h1_design, h2_design, projector_weights, SQUARE
from funbias.curves import CurveProcessParams, generate_sample
from funbias.design import fixed_interval, two_cluster
from funbias.estimator import PhiTransform
from funbias.kernels import ONE_SIDED_NAMES, make_one_sided, make_symmetric
from funbias.theory import (
    PhiLocalSmoothness,
    SmallBallModel,
    compute_constants,
    compute_m2,
    compute_m_constants,
    conditional_variance,
    empirical_small_ball,
    empirical_tau,
    estimate_phi_derivatives,
    fit_power_gamma,
    predicted_bias,
    predicted_bias_double,
    predicted_bias_pilot,
    predicted_variance,
    predicted_variance_factor,
)

SL = make_one_sided("shifted_linear")
QD = make_one_sided("quadratic")
TAU1 = SmallBallModel.power(1.0)


# --------------------------------------------------------- small-ball model


def test_power_model():
    t = SmallBallModel.power(2.0)
    assert t(0.5) == 0.25 and t(1.0) == 1.0
    np.testing.assert_allclose(t(np.array([0.0, 0.5])), [0.0, 0.25])


def test_dirac_and_table_models():
    d = SmallBallModel.dirac()
    assert d(0.99) == 0.0 and d(1.0) == 1.0
    tab = SmallBallModel.table([0.0, 0.5, 1.0], [0.0, 0.2, 1.0])
    assert tab(0.25) == pytest.approx(0.1)
    assert tab(2.0) == 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(family="power", gamma=-1.0),
        dict(family="table", table_s=[0.0, 1.0], table_tau=[0.5, 0.4]),
        dict(family="table", table_s=[0.0, 0.9], table_tau=[0.0, 1.0]),
        dict(family="cauchy"),
    ],
)
def test_model_validation(kwargs):
    with pytest.raises(ValueError):
        SmallBallModel(**kwargs)


# --------------------------------------------------------------- M-constants


def oracle_m(kernel, gamma):
    """Closed-form-free oracle: scipy quad on the defining integrals."""
    K1 = kernel(1.0)
    tau = lambda s: s**gamma
    m0 = K1 - quad(lambda s: (kernel(s) + s * kernel.derivative(s)) * tau(s), 0, 1)[0]
    m1 = K1 - quad(lambda s: kernel.derivative(s) * tau(s), 0, 1)[0]
    m3 = quad(lambda s: (s * s * kernel.derivative(s) + 2 * s * kernel(s)) * tau(s), 0, 1)[0]
    return m0, m1, m3


def test_shifted_linear_constants():
    np.testing.assert_allclose(compute_m_constants(SL, TAU1), (2 / 3, 3 / 2, 7 / 12), atol=1e-8)


def test_quadratic_constants():
    np.testing.assert_allclose(compute_m_constants(QD, TAU1), (3 / 8, 1.0, -1 / 5), atol=1e-8)


@pytest.mark.parametrize("name", ONE_SIDED_NAMES)
def test_m1_equals_k0_for_flat_tau(name):
    k = make_one_sided(name)
    _, m1, _ = compute_m_constants(k, SmallBallModel.power(0.0))
    assert m1 == pytest.approx(k(0.0), abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(ONE_SIDED_NAMES), st.floats(0.0, 4.0))
def test_m_constants_match_scipy(name, gamma):
    k = make_one_sided(name)
    np.testing.assert_allclose(compute_m_constants(k, SmallBallModel.power(gamma)), oracle_m(k, gamma), atol=1e-8)


@pytest.mark.parametrize("gamma", [1, 2, 3])
def test_shifted_linear_closed_forms(gamma):
    # K = 2 - s, K' = -1: M1 = 1 + 1/(g+1), M0 = 1 - int (2 - 2s) s^g, M3 = int (4 s - 3 s^2) s^g
    g = gamma
    m0, m1, m3 = compute_m_constants(SL, SmallBallModel.power(g))
    assert m1 == pytest.approx(1 + 1 / (g + 1), abs=1e-10)
    assert m0 == pytest.approx(1 - 2 / (g + 1) + 2 / (g + 2), abs=1e-10)
    assert m3 == pytest.approx(4 / (g + 2) - 3 / (g + 3), abs=1e-10)


def test_dirac_constants():
    m0, m1, m3 = compute_m_constants(SL, SmallBallModel.dirac())
    assert (m0, m1, m3) == (1.0, 1.0, 0.0)


# ------------------------------------------------------------------------- M2


def test_m2_equal_multipliers_quadratic():
    np.testing.assert_allclose(compute_m2(QD, TAU1, [1.0, 1.0]), 0.6, atol=1e-8)


def oracle_m2(kernel, gamma, ci, cj):
    r = cj / ci
    upper = min(1.0, 1.0 / r)
    val = quad(lambda s: kernel(s) * kernel.derivative(s * r) * s**gamma, 0, upper)[0]
    return kernel(1.0) * kernel(r) - val


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(ONE_SIDED_NAMES), st.floats(0.5, 2.0), st.floats(0.5, 3.0), st.floats(0.0, 3.0))
def test_m2_matches_scipy(name, ci, cj, gamma):
    k = make_one_sided(name)
    m2 = compute_m2(k, SmallBallModel.power(gamma), [ci, cj])
    assert m2[0, 1] == pytest.approx(oracle_m2(k, gamma, ci, cj), abs=1e-8)
    assert m2[1, 0] == pytest.approx(oracle_m2(k, gamma, cj, ci), abs=1e-8)


def test_m2_support_clipping():
    # with ratio 4 the integrand is zero beyond s = 1/4
    m2 = compute_m2(QD, TAU1, [1.0, 4.0])
    direct = -quad(lambda s: QD(s) * (-3 * 4 * s) * s, 0, 0.25)[0]
    assert m2[0, 1] == pytest.approx(direct, abs=1e-10)


def test_m2_not_symmetric_in_general():
    m2 = compute_m2(SL, TAU1, [1.0, 1.5])
    assert abs(m2[0, 1] - m2[1, 0]) > 1e-3


def test_m2_finite_for_table10_cluster():
    d = two_cluster((0.9, 0.91), (1.09, 1.1), 20)
    assert np.all(np.isfinite(compute_m2(QD, TAU1, d.bandwidths / 1.0)))


# ---------------------------------------------------------- variance factor


def test_pilot_variance_factor():
    _, m1, _ = compute_m_constants(QD, TAU1)
    assert predicted_variance_factor(QD, TAU1, [1.0], [1.0]) == pytest.approx(0.6 / m1**2, abs=1e-8)


def test_h1_variance_factor_matches_contraction():
    C = np.array([1.0, 2.0])
    g = projector_weights(h1_design(C)).g
    _, m1, _ = compute_m_constants(SL, TAU1)
    m2 = np.array([[oracle_m2(SL, 1, ci, cj) for cj in C] for ci in C])
    expected = sum(g[i] * g[j] * (1 / C[i]) * m2[i, j] for i in range(2) for j in range(2)) / m1**2
    got = predicted_variance_factor(SL, TAU1, g, C)
    assert got == pytest.approx(expected, abs=1e-8)
    assert got > 0


@pytest.mark.parametrize("design", [fixed_interval(0.9, 1.1, 20), two_cluster((0.9, 0.91), (1.09, 1.1), 20)])
def test_variance_ratio_same_order(design):
    pilot = predicted_variance_factor(QD, TAU1, [1.0], [1.0])
    reduced = compute_constants(QD, TAU1, design).gamma_var
    assert 1.0 <= reduced / pilot <= 10.0


def test_variance_factor_reproducible():
    d = fixed_interval(1, 2, 15)
    a = compute_constants(SL, TAU1, d).gamma_var
    b = compute_constants(SL, TAU1, d).gamma_var
    assert a == b


# ------------------------------------------------------------------ bias


def test_pilot_bias_prediction():
    c = compute_constants(SL, TAU1)
    smooth = PhiLocalSmoothness(phi_prime0=3.0)
    assert predicted_bias_pilot(c, smooth, 0.5) == pytest.approx(3.0 * (2 / 3) / 1.5 * 0.5)


def test_reduced_bias_zero_curvature():
    d = fixed_interval(1, 2, 10)
    c = compute_constants(SL, TAU1, d)
    assert predicted_bias(c, PhiLocalSmoothness(1.0, 0.0), d) == 0.0


def test_reduced_bias_quadruples_with_h0():
    d = fixed_interval(1, 2, 10)
    c = compute_constants(SL, TAU1, d)
    s = PhiLocalSmoothness(0.0, 2.0)
    b1 = predicted_bias(c, s, d, h0=0.1)
    b2 = predicted_bias(c, s, d, h0=0.2)
    assert b2 == pytest.approx(4 * b1, rel=1e-12)
    assert c.s_bias is None
    c2 = compute_constants(SL, TAU1, d, smooth=s)
    assert b1 == pytest.approx(c2.s_bias * 0.01)


def test_density_remainder_added():
    d = fixed_interval(1, 2, 10)
    c = compute_constants(SL, TAU1, d)
    s = PhiLocalSmoothness(0.0, 0.0, remainder_scale=0.5)
    assert predicted_bias(c, s, d, b=0.2) == pytest.approx(0.02)


def test_double_reduction_cancels_b2_with_square_link():
    rng = np.random.default_rng(1)
    h, b = rng.uniform(0.5, 1.5, 8), rng.uniform(0.1, 0.5, 8)
    k0 = make_symmetric("epanechnikov")
    c = compute_constants(SL, TAU1)
    s = PhiLocalSmoothness(0.0, 0.0)
    raw = predicted_bias_double(c, s, h2_design(h, b), k0, f_second=1.0, f_fourth=0.0)
    sq = predicted_bias_double(c, s, h2_design(h, b, b_link=SQUARE), k0, f_second=1.0, f_fourth=0.0)
    assert abs(sq) < 1e-10
    assert abs(raw) > 1e-6


# ---------------------------------------------------------------- variance


def test_conditional_variance_plugins():
    k0 = make_symmetric("epanechnikov")
    assert conditional_variance(PhiTransform.identity(), sigma2=2.0) == 2.0
    assert conditional_variance(PhiTransform.indicator(0.0), cdf=0.3) == pytest.approx(0.21)
    assert conditional_variance(PhiTransform.density(0.0, 0.5, k0), density=0.4) == pytest.approx(0.6 * 0.4 / 0.5)
    with pytest.raises(ValueError):
        conditional_variance(PhiTransform.identity())


def test_predicted_variance():
    assert predicted_variance(2.0, 3.0, 100, 0.5) == pytest.approx(0.12)


# ---------------------------------------------------------------- diagnostics


def test_empirical_small_ball_and_tau():
    d = np.array([0.1, 0.2, 0.3, 0.4])
    np.testing.assert_allclose(empirical_small_ball(d, [0.15, 0.4]), [0.25, 1.0])
    np.testing.assert_allclose(empirical_tau(d, 0.4, [0.5, 1.0]), [0.5, 1.0])
    with pytest.raises(ValueError):
        empirical_tau(d, 0.05, [0.5])


def test_fit_power_gamma_recovers_uniform_ball():
    # distances uniform on [0, 1] have tau_h(s) = s
    d = np.linspace(0, 1, 100_001)[1:]
    assert fit_power_gamma(d, 0.5) == pytest.approx(1.0, abs=1e-3)


def test_phi_derivative_heuristic_on_exact_quadratic():
    d = np.linspace(0, 1, 200)
    y = 1 + 2 * d + 3 * d**2
    s = estimate_phi_derivatives(d, y, 1.0, SL)
    assert s.phi_prime0 == pytest.approx(2.0)
    assert s.phi_doubleprime0 == pytest.approx(6.0)


def test_phi_derivative_heuristic_runs_on_process():
    sample = generate_sample(CurveProcessParams(seed=3), 300)
    chi = sample.curves[0]
    s = estimate_phi_derivatives(sample.distances_to(chi), sample.responses, 8.0, QD)
    assert np.isfinite(s.phi_prime0) and np.isfinite(s.phi_doubleprime0)
