import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import (
    cauchy_smoothed_shifted_mp,
    mp_mass_quadrature,
    mp_quadrature_stieltjes,
)

from misscov.core import (
    ConvergenceError,
    DiagonalModel,
    DomainError,
    ModelMatrices,
    build_model_matrices,
)
from misscov.limit import (
    SolverConfig,
    default_grid,
    invert_to_density,
    m_circ,
    mp_atom_mass,
    mp_shifted_curve,
    mp_shifted_density,
    mp_shifted_stieltjes,
    mp_stieltjes,
    pd_threshold,
    solve_e_circ,
    support_edges,
    support_from_density,
)


def classical_mp_oracle(z, y, sigma2=1.0):
    """Textbook closed form (sigma2(1-y) - z + sqrt(...)) / (2 y z sigma2), branch with Im > 0."""
    disc = cmath.sqrt((z - sigma2 * (1 + y)) ** 2 - 4 * y * sigma2**2)
    cands = [(sigma2 * (1 - y) - z + sgn * disc) / (2 * y * z * sigma2) for sgn in (1, -1)]
    return max(cands, key=lambda s: s.imag)


def null_mm(d=10, sigma2=1.0, p=1.0):
    return build_model_matrices(DiagonalModel.null(d, 1, sigma2, p))


# -- solve_e_circ ------------------------------------------------------------------

def test_complete_data_matches_textbook_mp():
    sol = solve_e_circ(1j, null_mm(), 1.0)
    ref = classical_mp_oracle(1j, 1.0)
    assert abs(sol.m_circ - ref) < 1e-12
    # with R = I the two transforms coincide
    assert abs(sol.e_circ - sol.m_circ) < 1e-12
    assert abs(ref - 1 / (1 / (1 + ref) - 1j)) < 1e-12


@pytest.mark.parametrize("z", [1j, 0.3 + 0.2j, -2 + 0.01j, 5 + 3j])
def test_zero_ratio_is_resolvent_of_t(z):
    model = DiagonalModel([0.5, 1.0, 2.0, 2.0], [0.3, 0.6, 1.0, 0.9], 10)
    mm = build_model_matrices(model)
    sol = solve_e_circ(z, mm, 0.0)
    t = model.t_diag
    assert abs(sol.e_circ - np.mean(mm.r_diag / (t - z))) < 1e-13
    assert abs(sol.m_circ - np.mean(1 / (t - z))) < 1e-13


def test_two_initializations_agree():
    mm = build_model_matrices(DiagonalModel(np.linspace(0.5, 2, 9), np.linspace(0.3, 1, 9), 10))
    for z in (0.7 + 0.05j, -0.5 + 1e-3j, 3 + 0.5j):
        a = solve_e_circ(z, mm, 0.6, e0=1j)
        b = solve_e_circ(z, mm, 0.6, e0=2j * mm.r_diag.max() / z.imag)
        assert abs(a.e_circ - b.e_circ) < 1e-10


def test_plain_picard_with_damping_converges():
    mm = null_mm(p=0.5)
    cfg = SolverConfig(newton=False, damping=0.5, max_iter=100_000)
    sol = solve_e_circ(1 + 0.1j, mm, 0.25, cfg)
    assert abs(sol.m_circ - mp_shifted_stieltjes(1 + 0.1j, 0.25, 1.0, 0.5)) < 1e-10


def test_iteration_cap_raises_with_residual():
    with pytest.raises(ConvergenceError) as info:
        solve_e_circ(1 + 1e-3j, null_mm(p=0.5), 0.25, SolverConfig(max_iter=1, newton=False))
    assert info.value.residual > 0 and info.value.z == 1 + 1e-3j


def test_rejects_real_z():
    with pytest.raises(DomainError):
        solve_e_circ(1.0, null_mm(), 0.5)


@pytest.mark.parametrize("kw", [dict(tol=0), dict(max_iter=0), dict(damping=0), dict(damping=1.5)])
def test_solver_config_validation(kw):
    with pytest.raises(DomainError):
        SolverConfig(**kw)


@st.composite
def diagonal_models(draw):
    d = draw(st.integers(1, 12))
    t = draw(st.lists(st.floats(0.5, 2.0), min_size=d, max_size=d))
    p = draw(st.lists(st.floats(0.3, 1.0), min_size=d, max_size=d))
    return build_model_matrices(DiagonalModel(t, p, 10))


@given(
    diagonal_models(),
    st.floats(0.0, 2.0),
    st.floats(-4, 8),
    st.sampled_from([1e-3, 1e-2, 0.1, 1.0, 10.0]),
)
def test_stieltjes_properties_and_norm_bound(mm, y, u, v):
    z = complex(u, v)
    sol = solve_e_circ(z, mm, y)
    assert sol.converged and sol.residual <= 1e-12
    assert sol.e_circ.imag > 0 and sol.m_circ.imag > 0
    assert abs(sol.e_circ) <= mm.r_diag.max() / v * (1 + 1e-12)


@given(diagonal_models(), st.floats(0.0, 2.0))
def test_total_mass_one_far_out(mm, y):
    z = 1e6j
    assert abs(z * solve_e_circ(z, mm, y).m_circ + 1) < 0.02


# -- m_circ --------------------------------------------------------------------

def test_m_circ_single_atom():
    assert m_circ(1j, 0.3j, null_mm(), 0.0) == pytest.approx(0.5 + 0.5j, abs=1e-15)


@pytest.mark.parametrize("v", [1e3, 1e5, 1e7])
def test_m_circ_large_imaginary_part(v):
    mm = null_mm(p=0.5)
    z = complex(0.0, v)
    sol = solve_e_circ(z, mm, 0.25)
    assert abs(z * sol.m_circ + 1) < 10 / v


def test_m_circ_singularity():
    from misscov.core import SingularityError

    with pytest.raises(SingularityError):
        m_circ(1.0 + 0j, 0.0, null_mm(), 0.0)


# -- closed forms ----------------------------------------------------------------

def test_mp_reduces_to_textbook_for_complete_data():
    for z in (1j, 0.5 + 0.01j, 4.5 + 0.2j, -1 + 2j):
        for y in (0.25, 1.0, 2.5):
            s = mp_shifted_stieltjes(z, y, 1.0, 1.0)
            assert abs(s - classical_mp_oracle(z, y)) < 1e-12
            assert abs(s - 1 / (1 / (1 + y * s) - z)) < 1e-12


@pytest.mark.parametrize("y", [0.1, 0.25, 0.9, 1.0, 1.7])
@pytest.mark.parametrize("p0", [1.0, 0.5, 0.2])
def test_closed_form_matches_quadrature_of_density(y, p0):
    """The Stieltjes root and the density formula describe the same law."""
    sigma2 = 1.3
    shift = sigma2 * (1 - p0) / p0
    for z in (0.4 + 0.3j, 2.0 + 1.0j, -0.5 + 0.05j):
        closed = mp_shifted_stieltjes(z, y, sigma2, p0)
        quad = mp_quadrature_stieltjes(z + shift, y, sigma2 / p0)
        assert abs(closed - quad) < 1e-8


def test_imaginary_part_positive_on_grid():
    us = np.linspace(-3, 6, 10)
    vs = np.geomspace(0.01, 10, 10)
    for u in us:
        for v in vs:
            s = mp_shifted_stieltjes(complex(u, v), 0.25, 1.0, 0.5)
            assert s.imag > 0
            c, shift = 2.0, 1.0
            w = complex(u, v) + shift
            assert abs(s - 1 / (c / (1 + c * 0.25 * s) - w)) < 1e-12


def test_shift_identity_structural():
    for z in (0.2 + 0.1j, 3 + 1j):
        assert mp_shifted_stieltjes(z, 0.4, 1.5, 0.6) == mp_stieltjes(z + 1.5 * 0.4 / 0.6, 0.4, 1.5 / 0.6)


def test_support_edges_examples():
    assert support_edges(0.25, 1.0, 0.5) == pytest.approx((-0.5, 3.5), abs=1e-15)
    y, s2 = 0.3, 2.0
    assert support_edges(y, s2, 1.0) == pytest.approx((s2 * (1 - math.sqrt(y)) ** 2, s2 * (1 + math.sqrt(y)) ** 2))
    a, b = support_edges(1e-12, 1.7, 0.3)
    # width 4 sigma2 sqrt(y) / p0 ~ 2.3e-5
    assert a == pytest.approx(1.7, abs=3e-5) and b == pytest.approx(1.7, abs=3e-5)


@given(st.floats(1e-6, 10), st.floats(0.01, 100), st.floats(0.01, 1.0))
def test_edge_width(y, sigma2, p0):
    a, b = support_edges(y, sigma2, p0)
    assert abs((b - a) - 4 * sigma2 * math.sqrt(y) / p0) <= 1e-12 * max(1.0, abs(a), abs(b))


@given(st.floats(0.01, 0.99), st.floats(0.05, 1.0))
def test_missingness_widens_edges(y, p0):
    a, b = support_edges(y, 1.0, p0)
    a1, b1 = support_edges(y, 1.0, 1.0)
    assert a <= a1 + 1e-12 and b >= b1 - 1e-12


def test_density_support_and_classical_case():
    assert mp_shifted_density(-0.51, 0.25, 1.0, 0.5) == 0.0
    assert mp_shifted_density(3.51, 0.25, 1.0, 0.5) == 0.0
    assert mp_shifted_density(1.0, 0.25, 1.0, 0.5) > 0
    xs = np.linspace(0.01, 3.99, 50)
    np.testing.assert_allclose(mp_shifted_density(xs, 1.0, 1.0, 1.0), np.sqrt((4 - xs) / xs) / (2 * np.pi), rtol=1e-13)


@pytest.mark.parametrize("y", [0.05, 0.25, 0.7, 1.0, 1.5, 3.0])
def test_density_integrates_to_continuous_mass(y):
    expected = 1.0 if y <= 1 else 1.0 / y
    assert mp_mass_quadrature(y, 2.0) == pytest.approx(expected, abs=1e-6)
    curve = mp_shifted_curve(y, 1.0, 0.5)
    assert curve.continuous_mass == pytest.approx(expected, abs=1e-6)
    assert curve.mass == pytest.approx(1.0, abs=1e-6)
    assert mp_atom_mass(y) == pytest.approx(max(0.0, 1 - 1 / y))


@pytest.mark.parametrize("y, p", [(0.25, 0.75), (0.04, 0.36), (0.81, 0.99)])
def test_pd_threshold_examples(y, p):
    assert pd_threshold(y) == pytest.approx(p, abs=1e-15)


def test_pd_threshold_limits_and_domain():
    assert pd_threshold(1e-12) == pytest.approx(0.0, abs=1e-5)
    assert pd_threshold(1 - 1e-12) == pytest.approx(1.0, abs=1e-5)
    for bad in (0.0, 1.0, -0.2, 2.0):
        with pytest.raises(DomainError):
            pd_threshold(bad)


@given(st.floats(0.001, 0.999))
def test_lower_edge_sign_flips_at_threshold(y):
    p_star = pd_threshold(y)
    assert support_edges(y, 1.0, p_star)[0] == pytest.approx(0.0, abs=1e-12)
    if p_star < 0.99:
        assert support_edges(y, 1.0, min(1.0, p_star + 0.01))[0] > 0
    if p_star > 0.01:
        assert support_edges(y, 1.0, p_star - 0.01)[0] < 0


# -- inversion -------------------------------------------------------------------

def test_inversion_matches_cauchy_convolution_pointwise():
    mm = null_mm(p=0.5)
    xs = np.array([-0.6, -0.49, 0.0, 1.0, 2.2, 3.49, 3.6])
    curve = invert_to_density(mm, 0.25, xs, 1e-3)
    ref = [cauchy_smoothed_shifted_mp(u, 1e-3, 0.25, 1.0, 0.5) for u in xs]
    np.testing.assert_allclose(curve.density, ref, atol=1e-4)


def test_inversion_total_mass():
    mm = null_mm(p=0.5)
    a, b = support_edges(0.25, 1.0, 0.5)
    curve = invert_to_density(mm, 0.25, np.linspace(a - 2, b + 2, 4001), 1e-3)
    assert curve.mass == pytest.approx(1.0, abs=0.01)
    lo, hi = support_from_density(curve)
    assert abs(lo - a) < 0.02 and abs(hi - b) < 0.02


def test_inversion_zero_ratio_is_smoothed_population_spectrum():
    model = DiagonalModel([0.5, 1.0, 2.0], [0.4, 0.6, 0.8], 10)
    mm = build_model_matrices(model)
    xs = np.linspace(0, 3, 31)
    v = 0.05
    curve = invert_to_density(mm, 0.0, xs, v)
    ref = np.mean(v / (np.pi * ((xs[:, None] - model.t_diag[None, :]) ** 2 + v * v)), axis=1)
    np.testing.assert_allclose(curve.density, ref, rtol=1e-12)


def test_inversion_reports_failing_grid_point():
    with pytest.raises(ConvergenceError) as info:
        invert_to_density(null_mm(p=0.5), 0.25, [0.0, 1.0], 1e-3, SolverConfig(max_iter=1, newton=False))
    assert info.value.z == complex(0.0, 1e-3)


def test_inversion_validation():
    with pytest.raises(DomainError):
        invert_to_density(null_mm(), 0.25, [1.0, 0.0], 1e-3)
    with pytest.raises(DomainError):
        invert_to_density(null_mm(), 0.25, [0.0, 1.0], 0.0)


def test_default_grid_spans_edges():
    g = default_grid(null_mm(p=0.5), 0.25)
    assert g[0] == pytest.approx(-1.5) and g[-1] == pytest.approx(4.5) and g.size == 2001
    mixed = ModelMatrices([4.0, 4.0 / 3], [3.0, 1.0 / 3])
    g = default_grid(mixed, 0.25)
    assert g[0] <= -4.0 and g[-1] >= 4.0 * 1.5**2
