import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from funbias.biasred import closed_form_weights_h1, projector_weights
from funbias.design import DesignSpec, centered_equidistant, fixed_interval, two_cluster, variance_proxy
from funbias.errors import DegenerateDesignError
from funbias.kernels import make_one_sided
from funbias.theory import SmallBallModel, compute_m2, compute_m_constants

SL = make_one_sided("shifted_linear")
TAU1 = SmallBallModel.power(1.0)


def test_centered_small():
    np.testing.assert_allclose(centered_equidistant(1.0, 3, 0.1).bandwidths, [0.9, 1.0, 1.1], atol=1e-15)


def test_centered_table4_grid():
    h = centered_equidistant(1.2, 21, 0.01).bandwidths
    assert len(h) == 21
    assert h[0] == pytest.approx(1.10) and h[-1] == pytest.approx(1.30)
    assert h.mean() == pytest.approx(1.2, abs=1e-14)


def test_centered_nonpositive():
    with pytest.raises(DegenerateDesignError):
        centered_equidistant(0.05, 21, 0.01)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 5), st.integers(2, 60), st.floats(1e-3, 0.01))
def test_centered_properties(h, B, sw):
    d = centered_equidistant(h, B, sw)
    x = d.bandwidths
    assert np.all(np.diff(x) > 0) and np.all(x > 0)
    assert x.mean() == pytest.approx(h, rel=1e-12)


def test_fixed_interval_examples():
    np.testing.assert_allclose(fixed_interval(1, 2, 2).bandwidths, [1.5, 2.0])
    np.testing.assert_allclose(fixed_interval(1, 2, 4).bandwidths, [1.25, 1.5, 1.75, 2.0])
    with pytest.raises(DegenerateDesignError):
        fixed_interval(2, 1, 4)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 3), st.floats(0.01, 3), st.integers(2, 500))
def test_fixed_interval_properties(h0, width, B):
    hu = h0 + width
    x = fixed_interval(h0, hu, B).bandwidths
    assert x[-1] == hu
    assert np.all(x > h0) and np.all(x <= hu)
    assert np.all(np.diff(x) > 0)


def test_two_cluster_table10():
    h = two_cluster((0.9, 0.91), (1.09, 1.1), 20, 0.5).bandwidths
    assert np.sum(h <= 0.91) == 10 and np.sum(h >= 1.09) == 10
    assert np.all(np.diff(h) > 0)


def test_two_cluster_two_points_gives_extrapolation_weights():
    d = two_cluster((0.9, 0.91), (1.09, 1.1), 2, 0.5)
    np.testing.assert_allclose(d.bandwidths, [0.9, 1.09])
    # two-point linear extrapolation to h = 0: g = (h2, -h1) / (h2 - h1)
    expected = np.array([1.09, -0.9]) / (1.09 - 0.9)
    np.testing.assert_allclose(projector_weights(d).g, expected, atol=1e-12)


@pytest.mark.parametrize("prop", [0.0, 1.0, 0.01])
def test_two_cluster_empty(prop):
    with pytest.raises(DegenerateDesignError):
        two_cluster((0.9, 0.91), (1.09, 1.1), 20, prop)


def test_two_cluster_overlap():
    with pytest.raises(DegenerateDesignError):
        two_cluster((0.9, 1.1), (1.0, 1.2), 10)


# ----------------------------------------------------------------- DesignSpec


@pytest.mark.parametrize(
    "text,strategy,B",
    [
        ("centered:1.0,21,0.01", "centered", 21),
        ("interval:1,2,41", "fixed_interval", 41),
        ("cluster:0.9,0.91,1.09,1.1,20", "two_cluster", 20),
        ("cluster:0.9,0.91,1.09,1.1,20,0.3", "two_cluster", 20),
    ],
)
def test_spec_parse_and_roundtrip(text, strategy, B):
    spec = DesignSpec.parse(text)
    assert spec.strategy == strategy and spec.B == B
    assert DesignSpec.from_dict(spec.to_dict()) == spec
    assert spec.build(pilot_h=1.0).B == B


@pytest.mark.parametrize("text", ["centered:1,21", "blob:1,2,3", "centered:a,b,c"])
def test_spec_parse_errors(text):
    with pytest.raises(ValueError):
        DesignSpec.parse(text)


def test_centered_spec_uses_pilot():
    spec = DesignSpec("centered", B=3, stepwidth=0.1)
    np.testing.assert_allclose(spec.build(pilot_h=2.0).bandwidths, [1.9, 2.0, 2.1])
    with pytest.raises(ValueError):
        spec.build()


def test_spec_from_dict_rejects_unknown():
    with pytest.raises(ValueError):
        DesignSpec.from_dict({"strategy": "centered", "B": 3, "stepwidth": 0.1, "colour": "red"})


# ------------------------------------------------------------- variance proxy


def test_proxy_pilot_reduction():
    d = fixed_interval(1, 2, 2)
    g1 = closed_form_weights_h1([1.0, 1.5])
    _, m1, _ = compute_m_constants(SL, TAU1)
    m2 = compute_m2(SL, TAU1, [1.0])
    from funbias.theory import predicted_variance_factor

    assert predicted_variance_factor(SL, TAU1, [1.0], [1.0]) == pytest.approx(TAU1(1.0) * m2[0, 0] / m1**2)
    assert np.isfinite(variance_proxy(d, g1, TAU1, SL, base=1.0))


def test_proxy_scale_invariant():
    d = fixed_interval(1, 2, 10)
    a = variance_proxy(d, None, TAU1, SL)
    b = variance_proxy(d.rescaled(3.0), None, TAU1, SL)
    assert b == pytest.approx(a, rel=1e-10)


def test_proxy_compares_table10_designs():
    eq = fixed_interval(0.9, 1.1, 20)
    cl = two_cluster((0.9, 0.91), (1.09, 1.1), 20)
    q = make_one_sided("quadratic")
    v_eq = variance_proxy(eq, None, TAU1, q, base=1.0)
    v_cl = variance_proxy(cl, None, TAU1, q, base=1.0)
    assert np.isfinite(v_eq) and np.isfinite(v_cl)
    assert variance_proxy(cl, None, TAU1, q, base=1.0) == v_cl
