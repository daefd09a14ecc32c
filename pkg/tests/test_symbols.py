import numpy as np
import pytest
from numpy.testing import assert_allclose

from steklov.bem import SpectralPoincareSteklov
from steklov.clifford import ALPHA, I4, alpha_dot, projector
from steklov.geometry import Chart, chart_metric
from steklov.shared.errors import CapabilityError, DomainError, ResolutionError
from steklov.shared.models import Side
from steklov.symbols import (ParametrixTerm, SymbolField, boundary_residual, cauchy_principal_symbol, eigen_residuals,
                             ellipticity_constant, exterior_semiclassical_symbol, flat_quantize,
                             halfspace_multiplier, l0_eigendecomp, parametrix_term, ps_classical_symbol,
                             ps_semiclassical_symbol, reconstruct, surface_spin_operator, term_coefficients,
                             transport_residual, wavepacket_compare, xi_symbol)

CURVED = Chart.polynomial([[0.0, 0.1, 0.05], [0.2, -0.1, 0.0], [0.15, 0.0, 0.0]])
E3 = np.array([0.0, 0.0, 1.0])


def _unit(rng, count):
    n = rng.standard_normal((count, 3))
    return n / np.linalg.norm(n, axis=1, keepdims=True)


def test_cauchy_symbol_squares_to_a_quarter(rng):
    for y, xi in zip(rng.uniform(-1, 1, (10, 2)), rng.normal(0, 4, (10, 2))):
        metric = chart_metric(CURVED, y)
        sigma = cauchy_principal_symbol(metric, xi)
        assert_allclose(sigma @ sigma, 0.25 * I4, atol=1e-13)
        n = np.append(metric.grad_chi, -1.0) / np.sqrt(metric.g)
        an = alpha_dot(n)
        assert_allclose(sigma @ an + an @ sigma, 0.0, atol=1e-13)


def test_cauchy_symbol_is_undefined_at_zero_frequency():
    with pytest.raises(DomainError):
        cauchy_principal_symbol(chart_metric(Chart.flat(), np.zeros(2)), np.zeros(2))


def test_classical_ps_symbol_is_a_partial_isometry_between_ranges(rng):
    n = _unit(rng, 20)
    xi = rng.standard_normal((20, 3))
    sigma = ps_classical_symbol(n, xi)
    Pp, Pm = projector(n, +1), projector(n, -1)
    assert_allclose(Pm @ sigma, 0.0, atol=1e-14)
    assert_allclose(sigma @ Pp, 0.0, atol=1e-14)
    assert_allclose(np.conj(np.swapaxes(sigma, 1, 2)) @ sigma, Pm, atol=1e-13)


def test_classical_symbol_rejects_normal_frequency():
    with pytest.raises(DomainError):
        ps_classical_symbol(E3, 3.0 * E3)


def test_semiclassical_symbol_limits(rng):
    n = _unit(rng, 5)
    xi = rng.standard_normal((5, 3))
    assert_allclose(ps_semiclassical_symbol(n, 1e7 * xi), ps_classical_symbol(n, xi), atol=1e-6)
    assert_allclose(ps_semiclassical_symbol(n, 0.0 * xi), 0.0)
    exterior = exterior_semiclassical_symbol(n, xi)
    assert_allclose(projector(n, +1) @ exterior, 0.0, atol=1e-14)
    assert_allclose(exterior @ projector(n, -1), 0.0, atol=1e-14)


def test_xi_symbol_runs_from_one_to_a_half():
    assert_allclose(xi_symbol(E3, np.zeros(3)), 1.0)
    assert_allclose(xi_symbol(E3, np.array([1e8, 0.0, 0.0])), 0.5, atol=1e-7)
    values = xi_symbol(E3, np.array([[t, 0.0, 0.0] for t in (0.5, 1.0, 2.0, 4.0)]))
    assert np.all(np.diff(values) < 0)


def test_l0_eigenstructure(rng):
    for y, xi in zip(rng.uniform(-1, 1, (20, 2)), rng.normal(0, 5, (20, 2))):
        e = l0_eigendecomp(CURVED, y, xi, 0.3)
        for name, value in eigen_residuals(e).items():
            assert value <= 1e-12, name
        assert e.rho_plus.real > 0 > e.rho_minus.real


def test_reconstruction_identity(rng):
    e = l0_eigendecomp(CURVED, np.array([0.2, -0.3]), np.array([1.5, -0.7]))
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert_allclose(reconstruct(A, e.normal, e.Pi_plus, e.k_plus), A, atol=1e-12)


def test_ellipticity_constant_is_positive(rng):
    assert ellipticity_constant(CURVED, rng.uniform(-1, 1, (5, 2)), rng.normal(0, 10, (10, 2))) > 0


@pytest.mark.parametrize("chart", [Chart.flat(), CURVED], ids=["flat", "curved"])
def test_leading_amplitude_solves_transport_and_boundary(chart, rng):
    term = parametrix_term(0, chart, h=0.1, z=0.3)
    for y, xi in zip(rng.uniform(-0.5, 0.5, (5, 2)), rng.normal(0, 3, (5, 2))):
        assert transport_residual(term, y, xi, tau=0.05) <= 1e-12
        assert boundary_residual(term, y, xi) <= 1e-12


@pytest.mark.parametrize("chart", [Chart.flat(), CURVED], ids=["flat", "curved"])
def test_first_correction_solves_transport_and_boundary(chart, rng):
    term = parametrix_term(1, chart, h=0.1, z=0.3)
    for y, xi in zip(rng.uniform(-0.5, 0.5, (4, 2)), rng.normal(0, 3, (4, 2))):
        assert transport_residual(term, y, xi, tau=0.05) <= 1e-8
        assert boundary_residual(term, y, xi) <= 1e-8
    assert len(term.coefficients(np.zeros(2), np.ones(2))) == 3


class DoubledTerm(ParametrixTerm):
    """A_j scaled by two, so it no longer balances the A_{j-1} forcing."""

    def coefficients(self, y, xi):
        return [2.0 * b for b in super().coefficients(y, xi)]


@pytest.mark.parametrize("h", [0.1, 0.01])
def test_transport_residual_is_relative_to_the_amplitude(h):
    y, xi = np.array([0.1, -0.2]), np.array([1.5, -0.5])
    doubled = DoubledTerm(j=1, chart=CURVED, h=h, z=0.3)
    assert transport_residual(doubled, y, xi, tau=0.05) > 1e-3


def test_first_correction_on_flat_chart_is_driven_by_z(rng):
    h, z = 0.1, 0.3
    for xi in rng.normal(0, 3, (5, 2)):
        e = l0_eigendecomp(Chart.flat(), np.zeros(2), xi, z)
        B10 = term_coefficients(1, Chart.flat(), h, z, np.zeros(2), xi)[0]
        A0 = e.Pi_minus @ e.P_minus / e.k_plus
        target = -h * e.Pi_plus @ (1j * alpha_dot(e.normal)) @ (z / (2.0 * e.lam) * e.Pi_minus @ A0)
        assert_allclose(e.Pi_plus @ B10, target, atol=1e-10)
    assert_allclose(term_coefficients(1, Chart.flat(), h, 0.0, np.zeros(2), np.ones(2))[0], 0.0, atol=1e-12)


def test_parametrix_order_is_capped():
    with pytest.raises(CapabilityError):
        parametrix_term(3, Chart.flat(), 0.1)


def test_halfspace_multiplier_matches_semiclassical_symbol(rng):
    m = 3.0
    xi = rng.normal(0, 5 * m, (100, 2))
    assert_allclose(halfspace_multiplier(xi, m, 0.0), ps_semiclassical_symbol(-E3, -xi / m), atol=1e-12)
    z = 0.7
    expected = 1j * z * ALPHA[2] @ projector(-E3, -1) / (2 * m)
    assert_allclose(halfspace_multiplier(np.zeros(2), m, z), expected, atol=1e-15)


def test_flat_quantization_of_a_multiplier_on_plane_waves():
    n, m = 16, 2.0
    y = np.arange(n) * (2.0 * np.pi / n)
    k = np.array([3.0, -2.0])
    phase = np.exp(1j * (k[0] * y[:, None] + k[1] * y[None, :]))
    spinor = np.array([1.0, -0.5, 0.25j, 2.0])
    field = phase[:, :, None] * spinor
    symbol = SymbolField.from_frequency(lambda hxi: halfspace_multiplier(hxi, m))
    out = flat_quantize(symbol, 1.0, field)
    assert_allclose(out, phase[:, :, None] * (halfspace_multiplier(k, m) @ spinor), atol=1e-12)


def test_flat_quantization_of_a_position_dependent_symbol(rng):
    n = 8
    field = rng.standard_normal((n, n, 4)) + 1j * rng.standard_normal((n, n, 4))
    symbol = SymbolField(evaluate=lambda y, xi: np.cos(y[0]) * np.broadcast_to(I4, np.shape(xi)[:-1] + (4, 4)),
                         chart=Chart.flat())
    out = flat_quantize(symbol, 0.5, field)
    y = np.arange(n) * (2.0 * np.pi / n)
    assert_allclose(out, np.cos(y)[:, None, None] * field, atol=1e-12)


def test_spin_operator_annihilates_constants(sphere8):
    constant = np.tile([1.0, 2.0, -1.0j, 0.5], (sphere8.size, 1))
    assert_allclose(surface_spin_operator(sphere8, constant), 0.0, atol=1e-9)


def test_wavepacket_error_decreases_with_frequency(sphere16):
    op = SpectralPoincareSteklov(mesh=sphere16, mass=1.0, z=0.0, side=Side.INTERIOR)
    coarse, fine = wavepacket_compare(op, 4), wavepacket_compare(op, 8)
    assert fine < coarse


def test_wavepacket_needs_resolution(sphere8):
    op = SpectralPoincareSteklov(mesh=sphere8, mass=1.0, z=0.0)
    with pytest.raises(ResolutionError):
        wavepacket_compare(op, 8)
