import numpy as np
import pytest
from conftest import grid_for
from hypothesis import given
from hypothesis import strategies as st

from homf.errors import (
    GridTooCoarse,
    GridTooNarrow,
    IncompatibleGrid,
    InvalidParameters,
    NotNormalized,
    WrongDomain,
)
from homf.spectra import (
    FREQUENCY,
    TIME,
    GaussianJsaParams,
    Grid2D,
    JointAmplitude,
    apply_delays,
    default_grid_points,
    gaussian_jsa,
    intensity_moments,
    moments,
    swap_modes,
    to_spectral,
    to_temporal,
)

bandwidths = st.floats(0.3, 3.0)
norm_cov = st.floats(-0.9, 0.9)


@st.composite
def gaussian_params(draw):
    bw1, bw2, c = draw(bandwidths), draw(bandwidths), draw(norm_cov)
    m1 = draw(st.floats(-2, 2))
    m2 = draw(st.floats(-2, 2))
    return GaussianJsaParams.from_normalized(bw1, bw2, c, m1, m2)


def test_standard_gaussian_peak_and_norm():
    grid = Grid2D.symmetric(-8, 8, 321)  # step 0.05
    jsa = gaussian_jsa(GaussianJsaParams(), grid)
    i, j = np.unravel_index(np.argmax(np.abs(jsa.values)), jsa.values.shape)
    assert jsa.grid.axis1[i] == pytest.approx(0, abs=1e-12)
    assert jsa.grid.axis2[j] == pytest.approx(0, abs=1e-12)
    assert jsa.norm() == pytest.approx(1, abs=1e-9)


def test_six_width_grid_is_too_narrow_for_edge_tolerance():
    # exp(-36/4) ~ 1.2e-4 of the peak survives at +-6 bandwidths
    with pytest.raises(GridTooNarrow):
        gaussian_jsa(GaussianJsaParams(), Grid2D.symmetric(-6, 6, 241))


def test_coarse_grid_rejected():
    with pytest.raises(GridTooCoarse):
        gaussian_jsa(GaussianJsaParams(), Grid2D.symmetric(-8, 8, 33))


@pytest.mark.parametrize("bw1,bw2,cov,tol", [(1, 1, 0, 1e-6), (1, 2, -1, 1e-5), (1, 1, 0.5, 1e-5)])
def test_moments_round_trip(bw1, bw2, cov, tol):
    m = moments(gaussian_jsa(GaussianJsaParams(bw1=bw1, bw2=bw2, cov=cov)))
    assert m.bw1 == pytest.approx(bw1, abs=1e-6)
    assert m.bw2 == pytest.approx(bw2, abs=1e-6)
    assert m.cov == pytest.approx(cov, abs=tol)


def test_product_state_has_zero_covariance():
    grid = Grid2D.symmetric(-10, 10, 201)
    w1, w2 = grid.mesh()
    vals = np.exp(-((w1 - 0.5) ** 2) / 2) * (1 + 0.3 * np.cos(w2)) * np.exp(-(w2**2) / 8)
    amp = JointAmplitude(grid, vals, FREQUENCY).normalized()
    assert abs(moments(amp).cov) < 1e-9


@pytest.mark.parametrize("bad", [dict(bw1=0), dict(bw2=-1), dict(cov=1.0), dict(cov=-1.5), dict(mean1=np.nan)])
def test_params_validation(bad):
    with pytest.raises(InvalidParameters):
        GaussianJsaParams(**bad)


def test_moments_need_frequency_domain_and_normalization():
    jsa = gaussian_jsa(GaussianJsaParams())
    with pytest.raises(WrongDomain):
        moments(to_temporal(jsa))
    with pytest.raises(NotNormalized):
        moments(jsa.with_values(2 * jsa.values))


def test_zero_delay_is_identity():
    jsa = gaussian_jsa(GaussianJsaParams(bw2=1.5, cov=0.3))
    assert np.array_equal(apply_delays(jsa, 0.0, 0.0).values, jsa.values)


@given(gaussian_params(), st.floats(-5, 5), st.floats(-5, 5))
def test_delays_are_unitary_phases(params, t1, t2):
    jsa = gaussian_jsa(params, grid_for(params))
    out = apply_delays(jsa, t1, t2)
    np.testing.assert_allclose(np.abs(out.values), np.abs(jsa.values), rtol=1e-12, atol=1e-300)
    assert out.norm() == pytest.approx(1, abs=1e-12)
    a, b = moments(jsa), moments(out)
    for f in ("mean1", "mean2", "bw1", "bw2", "cov"):
        assert getattr(b, f) == pytest.approx(getattr(a, f), abs=1e-9)


def test_swap_fixed_point_and_involution():
    sym = gaussian_jsa(GaussianJsaParams(cov=-0.4))
    np.testing.assert_allclose(swap_modes(sym).values, sym.values, atol=1e-12)
    jsa = gaussian_jsa(GaussianJsaParams(bw1=1, bw2=2, cov=0.7, mean1=0.3))
    np.testing.assert_allclose(swap_modes(swap_modes(jsa)).values, jsa.values, atol=1e-15)
    m = moments(swap_modes(jsa))
    assert m.bw1 == pytest.approx(2, abs=1e-6)
    assert m.bw2 == pytest.approx(1, abs=1e-6)


def test_swap_requires_identical_axes():
    p = GaussianJsaParams(bw1=1, bw2=2)
    jsa = gaussian_jsa(p, Grid2D.around(p, symmetric=False, n=129))
    with pytest.raises(IncompatibleGrid):
        swap_modes(jsa)


def test_temporal_width_is_fourier_dual():
    jta = to_temporal(gaussian_jsa(GaussianJsaParams()))
    m = intensity_moments(jta)
    assert m.bw1 == pytest.approx(0.5, rel=1e-2)
    assert m.bw2 == pytest.approx(0.5, rel=1e-2)


@given(gaussian_params())
def test_transform_preserves_norm_and_inverts(params):
    jsa = gaussian_jsa(params, grid_for(params))
    jta = to_temporal(jsa)
    assert jta.domain == TIME
    assert jta.norm() == pytest.approx(1, abs=1e-6)
    back = to_spectral(jta)
    np.testing.assert_allclose(back.values, jsa.values, atol=1e-12)


@pytest.mark.parametrize("t1,t2", [(1.0, -0.5), (-2.0, 0.0), (0.7, 1.3)])
def test_delay_moves_temporal_centroid_opposite(t1, t2):
    # kernel exp(-i w t): a delay tau shows up at t = -tau
    jsa = gaussian_jsa(GaussianJsaParams(cov=0.2))
    m0 = intensity_moments(to_temporal(jsa))
    m = intensity_moments(to_temporal(apply_delays(jsa, t1, t2)))
    dt = to_temporal(jsa).grid.step1
    assert m.mean1 - m0.mean1 == pytest.approx(-t1, abs=dt)
    assert m.mean2 - m0.mean2 == pytest.approx(-t2, abs=dt)


def test_env_var_sets_grid_density(monkeypatch):
    monkeypatch.setenv("HOMF_GRID_POINTS", "129")
    assert default_grid_points() == 129
    assert gaussian_jsa(GaussianJsaParams()).grid.n1 == 129
    monkeypatch.setenv("HOMF_GRID_POINTS", "zero")
    with pytest.raises(InvalidParameters):
        default_grid_points()


def test_values_are_read_only():
    jsa = gaussian_jsa(GaussianJsaParams())
    with pytest.raises(ValueError):
        jsa.values[0, 0] = 1.0
