import numpy as np
import pytest
from numpy.testing import assert_allclose

from steklov.bem import (BoundaryOperator, SpectralPoincareSteklov, assemble_cauchy, assemble_lambda,
                         assemble_single_layer, boundary_limit, calderon_projector, cauchy_adjoint_residual,
                         cauchy_square_residual, dump_operator, identity_operator, invert_dense, jump_residuals,
                         lambda_sigma_min, lambda_square_residual, load_operator, nodewise_operator,
                         potential_eval, ps_exterior, ps_interior, resolved_norm, single_layer_min_eigenvalue,
                         smooth_densities, sobolev_norm, spectral_ps)
from steklov.bem.assembly import polar_coefficients
from steklov.bem.quadrature import singular_scale
from steklov.clifford import alpha_dot, projector
from steklov.geometry import Chart, chart_graph_mesh, mesh_from_file, sphere_mesh, write_mesh
from steklov.kernels import KernelParams, phi_z
from steklov.shared.errors import CapabilityError, EXIT_NUMERICAL, InversionError, MeshLoadError
from steklov.shared.models import OperatorLabel, Side

SOURCE_POINT = np.array([0.0, 1.5, 3.5])
SOURCE_SPINOR = np.array([1.0, 0.5j, -0.25, 0.75])


def interior_solution(p, points):
    """Regular solution of (D_m - z) u = 0 inside the unit ball: the kernel centered outside."""
    return phi_z(np.atleast_2d(points) - SOURCE_POINT, p) @ SOURCE_SPINOR


def relative(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


@pytest.fixture(scope="module")
def params():
    return KernelParams(m=1.0, z=0.4)


@pytest.fixture(scope="module")
def cauchy12(sphere12, params):
    return assemble_cauchy(sphere12, params)


def test_cauchy_square_is_minus_a_quarter(sphere12, params, cauchy12):
    residual, constant = cauchy_square_residual(sphere12, params, cauchy=cauchy12)
    assert residual <= 5e-3
    assert_allclose(constant, -0.25, atol=5e-3)


@pytest.mark.parametrize("z", [0.0, 0.4])
def test_cauchy_adjoint_is_conjugate_parameter(sphere12, z):
    assert cauchy_adjoint_residual(sphere12, 1.0, z) <= 1e-8


def test_lambda_square_identity(sphere12, params, rng):
    assert lambda_square_residual(sphere12, params, rng, samples=8) <= 1e-2


def test_jump_relations(sphere12, params, rng):
    residuals = jump_residuals(sphere12, params, rng)
    assert set(residuals) == {"interior", "exterior"}
    assert max(residuals.values()) <= 2e-2


def test_single_layer_is_positive_in_the_gap(sphere8):
    assert single_layer_min_eigenvalue(sphere8, KernelParams(m=1.0, z=0.2)) > 0


def test_lambda_is_invertible_off_the_spectrum(sphere8, params):
    assert lambda_sigma_min(sphere8, params) > 1e-3
    inverse = invert_dense(assemble_lambda(sphere8, params))
    assert inverse.lu_residual <= 1e-8


def test_potential_reproduces_interior_solutions(sphere12, params):
    # Phi[i (alpha.n) t u] = u inside and 0 outside
    trace = interior_solution(params, sphere12.nodes)
    density = np.einsum("nab,nb->na", 1j * alpha_dot(sphere12.normals), trace)
    inside = np.array([[0.2, -0.1, 0.3], [0.0, 0.5, -0.2], [-0.4, 0.0, 0.1]])
    assert relative(potential_eval(sphere12, params, density, inside), interior_solution(params, inside)) <= 1e-5
    outside = np.array([[0.0, 0.0, -2.0], [1.8, 0.3, 0.0]])
    assert np.max(np.abs(potential_eval(sphere12, params, density, outside))) <= 1e-5 * np.max(np.abs(trace))


def test_calderon_projector_fixes_interior_traces(sphere12, params, cauchy12):
    C = calderon_projector(sphere12, params, cauchy=cauchy12)
    trace = interior_solution(params, sphere12.nodes).reshape(-1)
    assert relative(C.matrix @ trace, trace) <= 1e-5
    basis = sphere12.resolved_columns()
    assert_allclose(C.matrix @ (C.matrix @ basis), C.matrix @ basis, atol=1e-4)


def test_boundary_limit_recovers_the_trace(sphere12, params):
    trace = interior_solution(params, sphere12.nodes)
    density = np.einsum("nab,nb->na", 1j * alpha_dot(sphere12.normals), trace)
    limit = boundary_limit(sphere12, params, density, Side.INTERIOR)
    assert relative(limit.values, trace) <= 2e-2


def test_interior_ps_maps_data_to_the_plus_trace(sphere12, params):
    trace = sphere12.field(interior_solution(params, sphere12.nodes))
    minus, plus = trace.project(-1), trace.project(+1)
    nystrom = ps_interior(sphere12, params).apply(minus)
    assert relative(nystrom.values, plus.values) <= 1e-4
    exact = spectral_ps(sphere12, params.m, params.z).apply(minus)
    assert relative(exact.values, plus.values) <= 1e-4


def test_ps_operators_respect_projector_ranges(sphere8, params):
    Pp = nodewise_operator(sphere8, projector(sphere8.normals, +1))
    Pm = nodewise_operator(sphere8, projector(sphere8.normals, -1))
    interior = ps_interior(sphere8, params)
    exterior = ps_exterior(sphere8, 11.0, params.z)
    assert Pm.compose(interior).norm() <= 1e-10
    assert interior.compose(Pp).norm() <= 1e-10
    assert Pp.compose(exterior).norm() <= 1e-10
    assert exterior.compose(Pm).norm() <= 1e-10
    assert exterior.label == OperatorLabel.PS_EXTERIOR


@pytest.mark.parametrize("side", [Side.INTERIOR, Side.EXTERIOR])
def test_nystrom_ps_matches_exact_channels(sphere12, params, side):
    mass = params.m if side == Side.INTERIOR else 6.0
    exact = spectral_ps(sphere12, mass, params.z, side)
    if side == Side.INTERIOR:
        nystrom = ps_interior(sphere12, params)
    else:
        nystrom = ps_exterior(sphere12, mass, params.z)
    assert resolved_norm(nystrom.plus(exact, -1.0), 7) <= 1e-3 * resolved_norm(exact, 7)


@pytest.mark.parametrize("side", [Side.INTERIOR, Side.EXTERIOR])
def test_matrix_free_ps_agrees_with_dense(sphere8, rng, side):
    dense = spectral_ps(sphere8, 2.0, 0.3 + 0.1j, side)
    matrix_free = SpectralPoincareSteklov(mesh=sphere8, mass=2.0, z=0.3 + 0.1j, side=side)
    f = smooth_densities(sphere8, rng, 1)[:, 0]
    assert relative(matrix_free.apply(f).flat, dense.apply(f).flat) <= 1e-10


def test_exact_ps_needs_a_sphere():
    mesh = chart_graph_mesh(Chart.flat(), 1.0, 4)
    with pytest.raises(CapabilityError):
        spectral_ps(mesh, 1.0, 0.0)


def test_operator_algebra(sphere8, rng):
    A = assemble_single_layer(sphere8, KernelParams(m=1.0, z=0.0))
    identity = identity_operator(sphere8)
    assert_allclose(A.compose(identity).matrix, A.matrix)
    assert_allclose(A.plus(A, -1.0).matrix, 0.0)
    # real z: the single layer is self-adjoint in L^2(Sigma)
    assert resolved_norm(A.adjoint().plus(A, -1.0)) <= 1e-6 * A.norm()


def test_singular_operator_raises(sphere8):
    zero = BoundaryOperator(matrix=np.zeros((4 * sphere8.size,) * 2, dtype=complex), mesh=sphere8,
                            label=OperatorLabel.LAMBDA)
    with pytest.raises(InversionError) as info:
        invert_dense(zero)
    assert info.value.exit_code == EXIT_NUMERICAL
    assert "lambda" in info.value.detail


def test_operator_dump_round_trip(tmp_path, sphere8, params):
    op = assemble_cauchy(sphere8, params)
    path = tmp_path / "cauchy.sdop"
    dump_operator(op, path)
    loaded = load_operator(path, sphere8)
    assert loaded.label == OperatorLabel.CAUCHY
    assert loaded.z == op.z
    assert np.array_equal(loaded.matrix, op.matrix)


def test_operator_dump_rejects_mismatched_mesh(tmp_path, sphere8, sphere12, params):
    path = tmp_path / "cauchy.sdop"
    dump_operator(assemble_cauchy(sphere8, params), path)
    with pytest.raises(MeshLoadError):
        load_operator(path, sphere12)
    path.write_bytes(b"NOPE1" + path.read_bytes()[5:])
    with pytest.raises(MeshLoadError):
        load_operator(path, sphere8)


def test_chart_mesh_assembly_and_sobolev_weights(rng):
    mesh = chart_graph_mesh(Chart.flat(), 2.0 * np.pi, 8)
    op = assemble_cauchy(mesh, KernelParams(m=1.0, z=0.0))
    assert op.matrix.shape == (4 * mesh.size, 4 * mesh.size)
    constant = mesh.field(np.tile([1.0, 0.0, 0.0, 0.0], (mesh.size, 1)))
    assert_allclose(sobolev_norm(constant, 0.5), constant.norm(), rtol=1e-12)
    wave = mesh.field(np.exp(1j * mesh.nodes[:, :1]) * np.array([[1.0, 0.0, 0.0, 0.0]]))
    assert_allclose(sobolev_norm(wave, 1.0), np.sqrt(2.0) * wave.norm(), rtol=1e-12)


def test_rounded_surface_targets_use_the_surface_rule():
    assert singular_scale(1.0, 0j, -1.1e-16) == np.pi
    assert singular_scale(1.0, 0j, -0.1) == pytest.approx(0.1)


@pytest.mark.parametrize("order", [8, 12, 16])
def test_every_ring_assembles_on_the_surface(order):
    mesh = sphere_mesh(1.0, order)
    rings = mesh.normals[::2 * order]
    for m, z in ((1.0, 0.0), (41.0, 0.5)):
        p = KernelParams(m=m, z=z)
        exact = polar_coefficients(mesh, p, rings, offsets=0.0)
        rounded = polar_coefficients(mesh, p, rings * (1.0 - 1e-16))
        assert np.all(np.isfinite(exact))
        assert_allclose(rounded, exact, rtol=0, atol=1e-12 * np.max(np.abs(exact)))
    op = assemble_cauchy(mesh, KernelParams(m=41.0, z=0.5))
    assert np.all(np.isfinite(op.matrix))


def test_principal_value_assembly_needs_a_symmetric_stencil(tmp_path, sphere8):
    path = tmp_path / "sphere.mesh"
    write_mesh(sphere8, path)
    loaded = mesh_from_file(path)
    p = KernelParams(m=1.0, z=0.2)
    with pytest.raises(CapabilityError):
        assemble_cauchy(loaded, p)
    with pytest.raises(CapabilityError):
        assemble_lambda(loaded, p)
    assert np.all(np.isfinite(assemble_single_layer(loaded, p).matrix))
    curved = chart_graph_mesh(Chart.polynomial([[0.0, 0.0, 0.1], [0.0, 0.0, 0.0], [0.1, 0.0, 0.0]]), 1.0, 8)
    with pytest.raises(CapabilityError):
        assemble_cauchy(curved, p)
