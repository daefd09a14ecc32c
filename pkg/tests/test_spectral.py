from typing import ClassVar

import numpy as np
import pytest
from numpy.testing import assert_allclose

from steklov import radial, spectral
from steklov.bem import identity_operator, sobolev_operator_norm, spectral_ps
from steklov.geometry import Chart, ball_grid, chart_graph_mesh
from steklov.kernels import KernelParams, dirac_apply_fd
from steklov.shared.errors import ArgumentError, BracketError, CapabilityError
from steklov.shared.models import ResolventKind, Side, SpectralScan
from steklov.spectral.scan import ScanProblem, clip_interval, run_scan

GAUSSIAN = spectral.GaussianSource(center=np.array([0.1, 0.05, 0.0]), width=0.15,
                                   spinor=np.array([1.0, 0.0, 0.5, 0.0], dtype=complex))
COUPLINGS = [10.0, 20.0, 40.0, 80.0]
BAND = 0.15


def test_radial_pair_solves_the_channel_equations():
    r = np.linspace(0.3, 1.2, 7)
    step = 1e-5
    for kappa in (-2, -1, 1, 2):
        for E, mass in ((2.5, 1.0), (0.4, 1.0)):
            g, f = radial.regular_pair_real(kappa, E, mass, r)
            gp = (radial.regular_pair_real(kappa, E, mass, r + step)[0]
                  - radial.regular_pair_real(kappa, E, mass, r - step)[0]) / (2 * step)
            fp = (radial.regular_pair_real(kappa, E, mass, r + step)[1]
                  - radial.regular_pair_real(kappa, E, mass, r - step)[1]) / (2 * step)
            assert_allclose(gp + (1 + kappa) * g / r - (E + mass) * f, 0.0, atol=1e-7)
            assert_allclose(fp + (1 - kappa) * f / r + (E - mass) * g, 0.0, atol=1e-7)


def test_radial_rejects_kappa_zero():
    with pytest.raises(ArgumentError):
        radial.orbital_degrees(0)
    with pytest.raises(ArgumentError):
        spectral.radial_oracle(1.0, 1.0, kappa=0)


def test_mit_oracle_roots_satisfy_the_bag_condition():
    roots = spectral.radial_oracle(1.0, 1.0, None, -1, count=3)
    assert len(roots) == 3
    assert np.all(np.diff(roots) > 0) and roots[0] > 1.0
    for E in roots:
        assert abs(radial.mit_condition(-1, E, 1.0, 1.0)) <= 1e-10


def test_step_oracle_approaches_mit_at_rate_one_over_m():
    mit = spectral.radial_oracle(1.0, 1.0, None, -1)[0]
    rows = spectral.expansion_slopes(1.0, 1.0, [100.0, 200.0, 400.0], -1)
    gaps = [abs(value - mit) for _, value, _ in rows]
    assert gaps[0] > gaps[1] > gaps[2]
    slopes = [slope for _, _, slope in rows]
    assert abs(slopes[-1] - slopes[-2]) <= 0.05 * abs(slopes[-1])


def test_oracle_spectrum_reports_degeneracies():
    spectrum = spectral.oracle_spectrum(1.0, 1.0, None, (1.0, 6.0))
    assert spectrum
    assert all(e.degeneracy == 2 * abs(e.kappa) for e in spectrum)
    assert [e.value for e in spectrum] == sorted(e.value for e in spectrum)


def test_oracle_eigenfunction_is_a_normalized_bag_state(sphere12):
    m = 1.0
    E = spectral.radial_oracle(1.0, m, None, -1)[0]
    state = spectral.oracle_eigenfunction(1.0, m, E, -1, 1)
    grid = ball_grid(1.0, 16, 12)
    assert_allclose(grid.norm(state(grid.points)), 1.0, rtol=1e-6)
    trace = state.trace(sphere12)
    assert trace.project(-1).norm() <= 1e-8 * trace.norm()
    inner = grid.points[np.linalg.norm(grid.points, axis=1) < 0.9]
    applied, value = dirac_apply_fd(state, inner, KernelParams(m=m, z=E))
    assert np.max(np.abs(applied)) <= 1e-6 * np.max(np.abs(value))


def test_oracle_eigenfunction_rejects_bad_projection():
    with pytest.raises(ArgumentError):
        spectral.oracle_eigenfunction(1.0, 1.0, 2.0, -1, 3)


def test_krein_blocks_have_the_range_structure(sphere8):
    for exact in (True, False):
        blocks = spectral.krein_blocks(sphere8, 1.0, 10.0, 0.3, exact=exact)
        for name, value in spectral.block_structure_residual(blocks).items():
            assert value <= 1e-8, name
        assert spectral.inverse_identity_residual(blocks) <= 1e-8
        assert blocks.psi_sigma_min > 0


def test_krein_blocks_need_a_positive_coupling(sphere8):
    with pytest.raises(ArgumentError):
        spectral.krein_blocks(sphere8, 1.0, 0.0, 0.0)


def test_transmission_solution_matches_psi_inverse(sphere8, rng):
    blocks = spectral.krein_blocks(sphere8, 1.0, 10.0, 0.2, exact=True)
    data = sphere8.field((sphere8.resolved_columns()[:, :6] @ rng.standard_normal(6)).reshape(-1, 4)).project(+1)
    minus, plus = spectral.transmission_solve(blocks, data)
    phi = blocks.psi_inverse.apply(data)
    assert_allclose(minus.values, phi.project(-1).values, atol=1e-8 * phi.norm())
    assert_allclose(plus.values, phi.project(+1).values, atol=1e-8 * phi.norm())


def test_rate_fit_recovers_a_power_law():
    M = np.array([10.0, 20.0, 40.0, 80.0])
    fit = spectral.rate_fit(zip(M, 3.0 / M))
    assert_allclose(fit.slope, -1.0, atol=1e-12)
    assert_allclose(fit.intercept, np.log(3.0), atol=1e-12)
    assert_allclose(fit.r2, 1.0, atol=1e-12)


@pytest.mark.parametrize("pairs", [[(1.0, 1.0), (2.0, 0.5)], [(1.0, 1.0), (2.0, 0.0), (4.0, 0.25)]])
def test_rate_fit_rejects_bad_input(pairs):
    with pytest.raises(ArgumentError):
        spectral.rate_fit(pairs)


class FlakyProblem(ScanProblem):
    """sigma(a) = |a - 1.7|, failing above a = 2.2."""

    label: ClassVar[str] = "flaky"

    def singular_values(self, a: float) -> np.ndarray:
        if a > 2.2:
            raise ArgumentError(f"no operator at {a}")
        return np.array([1.0, abs(a - 1.7)])


def test_scan_marks_failed_points_and_refines_roots(sphere8):
    problem = FlakyProblem(mesh=sphere8, m=1.0, threads=2)
    scan = run_scan(problem, (1.2, 2.5), 14)
    assert scan.failed and all(scan.grid[i] > 2.2 for i in scan.failed)
    assert all(np.isinf(scan.sigma_min[i]) for i in scan.failed)
    assert scan.problem is problem
    roots = spectral.scan_roots(scan)
    assert len(roots) == 1
    assert_allclose(roots[0].value, 1.7, atol=1e-5)


def test_refinement_needs_an_interior_minimum(sphere8):
    scan = SpectralScan(grid=[1.2, 1.3, 1.4], sigma_min=[0.3, 0.2, 0.1], m=1.0)
    with pytest.raises(BracketError):
        spectral.refine_eigenvalue(scan, (0, 2), FlakyProblem(mesh=sphere8, m=1.0))


def test_refinement_uses_the_problem_recorded_on_the_scan(sphere8):
    scan = run_scan(FlakyProblem(mesh=sphere8, m=1.0), (1.2, 2.2), 11)
    bracket = spectral.scan_minima(scan)[0]
    assert_allclose(spectral.refine_eigenvalue(scan, bracket).value, 1.7, atol=1e-5)
    assert "problem" not in scan.model_dump()
    bare = SpectralScan(grid=scan.grid, sigma_min=scan.sigma_min, m=1.0)
    with pytest.raises(ArgumentError):
        spectral.refine_eigenvalue(bare, bracket)


def test_scan_windows_avoid_branch_points(sphere8):
    problem = spectral.BirmanSchwinger(mesh=sphere8, m=1.0, M=10.0)
    assert clip_interval((1.01, 10.98), problem) == pytest.approx((1.05, 10.95))
    assert clip_interval((1.5, 2.0), problem) == (1.5, 2.0)
    with pytest.raises(ArgumentError):
        clip_interval((1.0, 1.04), problem)
    with pytest.raises(ArgumentError):
        run_scan(problem, (1.5, 2.0), 4)
    with pytest.raises(ArgumentError):
        spectral.bs_scan(sphere8, 1.0, 10.0, (1.5, 12.0), 16)


def test_exact_birman_schwinger_scan_finds_the_step_eigenvalue(sphere8):
    m, M = 1.0, 10.0
    expected = spectral.radial_oracle(1.0, m, M, -1)[0]
    scan = spectral.bs_scan(sphere8, m, M, (expected - 0.15, expected + 0.15), 16, exact=True)
    problem = spectral.BirmanSchwinger(mesh=sphere8, m=m, M=M, exact=True)
    roots = spectral.scan_roots(scan, problem)
    assert min(abs(r.value - expected) for r in roots) <= 1e-5
    match = min(roots, key=lambda r: abs(r.value - expected))
    assert match.multiplicity_hint >= 2


def test_gaussian_free_resolvent_solves_the_dirac_equation():
    points = np.array([[0.4, 0.1, -0.2], [1.5, 0.0, 0.3], [-0.7, 0.8, 0.2]])
    for z in (0.0, 0.5 + 0.2j):
        p = KernelParams(m=2.0, z=z)
        applied, _ = dirac_apply_fd(lambda x: GAUSSIAN.free_resolvent(x, p.m, p.z), points, p)
        assert_allclose(applied, GAUSSIAN(points), atol=1e-6)


def test_volume_source_matches_the_closed_form():
    grid = ball_grid(1.0, 16, 12)
    centered = GAUSSIAN.model_copy(update={"center": np.zeros(3)})
    source = spectral.VolumeSource(values=centered, grid=grid)
    points = np.array([[0.6, 0.0, 0.1], [0.0, -0.7, 0.2], [1.4, 0.2, 0.0]])
    expected = centered.free_resolvent(points, 1.0, 0.3)
    assert np.max(np.abs(source.free_resolvent(points, 1.0, 0.3) - expected)) <= 1e-2 * np.max(np.abs(expected))


def test_volume_source_needs_a_structured_grid():
    grid = ball_grid(1.0, 4, 4).model_copy(update={"radius": None})
    source = spectral.VolumeSource(values=GAUSSIAN, grid=grid)
    with pytest.raises(CapabilityError):
        source.free_resolvent(np.zeros((1, 3)), 1.0, 0.0)


def test_mit_resolvent_kills_the_minus_trace_and_is_bounded(sphere12):
    m = 1.0
    grid = ball_grid(1.0, 12, 12)
    result = spectral.resolvent_apply(ResolventKind.MIT, sphere12, grid, m, 0.0, GAUSSIAN)
    assert result.trace.project(-1).norm() <= 5e-2 * result.trace.norm()
    assert grid.norm(result.volume) / grid.norm(GAUSSIAN(grid.points)) <= 1.0 / m


def test_energy_identity_holds_for_smooth_fields(sphere12):
    grid = ball_grid(1.0, 12, 12)

    def field(x):
        return np.stack([1.0 + x[:, 0], 1j * x[:, 1], x[:, 2] ** 2, x[:, 0] * x[:, 1]], axis=1).astype(complex)

    identity = spectral.energy_identity(grid, field, sphere12.field(field(sphere12.nodes)), 1.5)
    assert identity["relative"] <= 1e-6


def test_full_resolvent_needs_a_coupling(sphere8):
    with pytest.raises(ArgumentError):
        spectral.resolvent_apply(ResolventKind.FULL, sphere8, ball_grid(1.0, 4, 8), 1.0, 0.0, GAUSSIAN)


@pytest.mark.slow
def test_full_resolvent_converges_at_rate_one_over_m(sphere12):
    grid = ball_grid(1.0, 12, 12)
    rows = []
    for M in (10.0, 20.0, 40.0, 80.0):
        result = spectral.resolvent_apply(ResolventKind.FULL, sphere12, grid, 1.0, 0.0, GAUSSIAN, M=M)
        rows.append((M, grid.norm(result.difference)))
    assert -1.15 <= spectral.rate_fit(rows).slope <= -0.85


@pytest.mark.slow
def test_mkj_eigenvalues_predict_the_expansion_slope(sphere16):
    m, kappa = 1.0, -1
    mit = spectral.radial_oracle(1.0, m, None, kappa)[0]
    traces = [spectral.oracle_eigenfunction(1.0, m, mit, kappa, mu2).trace(sphere16).project(+1) for mu2 in (-1, 1)]
    mkj = spectral.mkj_matrix(sphere16, m, traces, mit)
    assert np.max(np.abs(mkj.mu.imag)) <= 1e-8 * np.max(np.abs(mkj.mu))
    slope = spectral.expansion_slopes(1.0, m, [200.0], kappa)[0][2]
    assert abs(slope - mkj.mu[0].real) <= 0.1 * abs(mkj.mu[0].real)


def test_mkj_needs_an_eigenvalue_for_the_energy_term(sphere8):
    trace = sphere8.field(np.ones((sphere8.size, 4)))
    with pytest.raises(ArgumentError):
        spectral.mkj_matrix(sphere8, 1.0, [trace])
    result = spectral.mkj_matrix(sphere8, 1.0, [trace], include_energy_term=False)
    assert_allclose(result.energy, 0.0)


def fitted_slope(values):
    return spectral.rate_fit(zip(COUPLINGS, values)).slope


def test_shell_sources_reach_the_exterior_resolvent_bounds():
    decays = [spectral.shell_source_decay(1.0, 1.0, M, 0.3) for M in COUPLINGS]
    assert fitted_slope([d[0] for d in decays]) == pytest.approx(-1.0, abs=BAND)
    assert fitted_slope([d[1] for d in decays]) == pytest.approx(-0.5, abs=BAND)


def test_high_degree_extension_decays_like_one_over_m():
    values = [spectral.extension_decay(1.0, 1.0, M, 0.3) for M in COUPLINGS]
    assert all(v > 0 for v in values)
    assert fitted_slope(values) == pytest.approx(-1.0, abs=BAND)


@pytest.mark.parametrize("z", [0.2 + 0.1j, 12.0])
def test_channel_decays_need_a_real_gap_parameter(z):
    with pytest.raises(ArgumentError):
        spectral.shell_source_decay(1.0, 1.0, 10.0, z)


def test_exact_exterior_ps_norm_decays_like_one_over_m(sphere8):
    values = [spectral.exterior_ps_norm(sphere8, 1.0, M, 0.5, exact=True) for M in COUPLINGS]
    assert fitted_slope(values) == pytest.approx(-1.0, abs=BAND)


def test_exterior_ps_norm_needs_a_coupling(sphere8):
    with pytest.raises(ArgumentError):
        spectral.exterior_ps_norm(sphere8, 1.0, 0.0, exact=True)


def test_sobolev_operator_norm_needs_a_sphere(sphere8):
    mesh = chart_graph_mesh(Chart.flat(), 1.0, 8)
    op = spectral_ps(sphere8, 11.0, 0.0, Side.EXTERIOR)
    assert sobolev_operator_norm(op, 1.0) <= sobolev_operator_norm(op, 0.0) + 1e-12
    with pytest.raises(CapabilityError):
        sobolev_operator_norm(identity_operator(mesh), 1.0)
    with pytest.raises(CapabilityError):
        spectral.decay_trends(mesh, 1.0, COUPLINGS)


@pytest.mark.slow
def test_exterior_decay_trends(sphere12):
    trends = spectral.decay_trends(sphere12, 1.0, COUPLINGS)
    expected = {"exterior_resolvent": -1.0, "exterior_trace": -0.5, "extension": -0.5, "extension_h_half": -1.0}
    assert set(trends) == set(expected)
    for name, (values, fit) in trends.items():
        assert len(values) == len(COUPLINGS)
        assert fit.slope == pytest.approx(expected[name], abs=BAND), name


@pytest.mark.slow
def test_nystrom_exterior_ps_norm_decays_like_one_over_m(sphere12):
    values = [spectral.exterior_ps_norm(sphere12, 1.0, M, 0.5) for M in COUPLINGS]
    assert fitted_slope(values) == pytest.approx(-1.0, abs=BAND)
