import numpy as np
import pytest
from numpy.testing import assert_allclose

from steklov.geometry import (Chart, ball_grid, chart_graph_mesh, chart_metric, chart_normal, mesh_from_file,
                              metric_residual, shell_grid, sphere_mesh, sphere_quadrature_error, surface_gradient,
                              write_mesh)
from steklov.shared.errors import ArgumentError, CapabilityError, MeshLoadError
from steklov.shared.models import MeshKind


def test_sphere_mesh_layout(sphere8):
    assert sphere8.size == 2 * 8 ** 2
    assert sphere8.kind == MeshKind.SPHERE
    assert_allclose(sphere8.area, 4.0 * np.pi, rtol=1e-13)
    assert_allclose(np.linalg.norm(sphere8.normals, axis=1), 1.0, rtol=1e-14)
    assert_allclose(sphere8.nodes, sphere8.normals)


def test_sphere_quadrature_is_exact_below_twice_the_order(sphere8):
    assert sphere_quadrature_error(sphere8, 2 * 8 - 1) <= 1e-12


@pytest.mark.parametrize("order", [3, 7, 2])
def test_sphere_order_must_be_even(order):
    with pytest.raises(ArgumentError):
        sphere_mesh(1.0, order)


def test_resolved_space_is_orthonormal(sphere8):
    basis = sphere8.resolved_columns()
    gram = np.conj(basis).T @ (sphere8.spinor_weights[:, None] * basis)
    assert_allclose(gram, np.eye(basis.shape[1]), atol=1e-11)
    P = sphere8.resolved_projector()
    assert_allclose(P @ P, P, atol=1e-10)


def test_resolved_columns_filter_by_angular_momentum(sphere8):
    # 2j = 1 and 3: channels 2(j2 + 1) per j2, two blocks each
    assert sphere8.resolved_columns(3).shape[1] == 2 * (2 * 2 + 2 * 4)


def test_trace_field_projections_partition(sphere8, rng):
    field = sphere8.field(rng.standard_normal((sphere8.size, 4)) + 1j * rng.standard_normal((sphere8.size, 4)))
    plus, minus = field.project(+1), field.project(-1)
    assert_allclose(plus.values + minus.values, field.values, atol=1e-14)
    assert abs(plus.inner(minus)) <= 1e-12 * field.norm() ** 2
    assert_allclose(plus.norm() ** 2 + minus.norm() ** 2, field.norm() ** 2, rtol=1e-12)


def test_surface_gradient_of_height(sphere12):
    grad = surface_gradient(sphere12, sphere12.nodes[:, 2])
    n = sphere12.normals
    expected = np.array([0.0, 0.0, 1.0])[None, :] - n[:, 2:3] * n
    assert_allclose(grad, expected, atol=1e-8)


def test_chart_graph_mesh_of_flat_chart():
    mesh = chart_graph_mesh(Chart.flat(), 2.0, 8)
    assert mesh.size == 64
    assert_allclose(mesh.area, 4.0)
    assert_allclose(mesh.normals, np.tile([0.0, 0.0, -1.0], (64, 1)))
    with pytest.raises(CapabilityError):
        mesh.harmonics()


def test_chart_grid_must_be_power_of_two():
    with pytest.raises(ArgumentError):
        chart_graph_mesh(Chart.flat(), 1.0, 12)


def test_polynomial_chart_derivatives_and_metric(rng):
    chart = Chart.polynomial([[0.0, 0.1, 0.05], [0.2, -0.1, 0.0], [0.15, 0.0, 0.0]])
    numeric = Chart(chi=chart.chi)
    for y in rng.uniform(-1, 1, (10, 2)):
        assert_allclose(numeric.gradient(y), chart.gradient(y), atol=1e-8)
        assert_allclose(numeric.second_derivatives(y), chart.second_derivatives(y), atol=1e-5)
        assert metric_residual(chart_metric(chart, y)) <= 1e-13
        n = chart_normal(chart, y)
        assert_allclose(np.linalg.norm(n), 1.0)
        assert n[2] < 0


def test_mesh_file_round_trip(tmp_path, sphere8):
    path = tmp_path / "sphere.mesh"
    write_mesh(sphere8, path)
    loaded = mesh_from_file(path)
    assert loaded.kind == MeshKind.FILE
    assert_allclose(loaded.nodes, sphere8.nodes, rtol=0, atol=0)
    assert_allclose(loaded.weights, sphere8.weights, rtol=0, atol=0)


@pytest.mark.parametrize("text, line", [
    ("0 0 1 0 0 1 0.1\n0 0 1 0 0 1\n", 2),
    ("# header\n0 0 1 0 0 2 0.1\n", 2),
    ("0 0 1 0 0 1 -0.1\n", 1),
    ("0 0 one 0 0 1 0.1\n", 1),
])
def test_mesh_file_errors_name_the_line(tmp_path, text, line):
    path = tmp_path / "bad.mesh"
    path.write_text(text)
    with pytest.raises(MeshLoadError) as info:
        mesh_from_file(path)
    assert info.value.line == line


def test_missing_mesh_file(tmp_path):
    with pytest.raises(MeshLoadError):
        mesh_from_file(tmp_path / "missing.mesh")


def test_ball_grid_volume():
    grid = ball_grid(1.5, 6, 8)
    assert grid.region == "interior"
    assert_allclose(np.sum(grid.weights), 4.0 / 3.0 * np.pi * 1.5 ** 3, rtol=1e-13)
    assert np.all(np.linalg.norm(grid.points, axis=1) < 1.5)


def test_shell_grid_integrates_exponential_decay():
    R, t = 1.0, 0.05
    grid = shell_grid(R, t, 8, 8)
    r = np.linalg.norm(grid.points, axis=1)
    values = np.exp(-(r - R) / (2.0 * t))
    assert_allclose(grid.norm(values) ** 2, 4.0 * np.pi * t * (R ** 2 + 2 * R * t + 2 * t ** 2), rtol=1e-12)
    assert np.all(r > R)
