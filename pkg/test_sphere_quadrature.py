import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

import config
from errors import DomainError, QuadratureError
from sphere_quadrature import (
    Cut,
    GaussGrid,
    MonteCarlo,
    QuadratureConfig,
    SphereIntegrator,
    build_sphere_grid,
    uniform_sphere_samples,
)


def _on_sphere(points):
    return np.allclose(np.linalg.norm(points, axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize('cuts', [
    [],
    [Cut.of([0, 0, 1], 0.3)],
    [Cut.of([1, 1, 0], 0.0), Cut.of([0, 0, 1], 0.0)],
    [Cut.of([1, 0, 0], 0.2), Cut.of([0, 1, 0], -0.5), Cut.of([0, 0, 1], 0.1)],
])
def test_grid_weights_sum_to_sphere_area(cuts):
    grid = build_sphere_grid(32, 64, cuts)
    assert grid.weights.sum() == pytest.approx(4.0 * math.pi, abs=1e-12)
    assert _on_sphere(grid.points)


def test_grid_integrates_low_order_polynomials():
    grid = build_sphere_grid(16, 32)
    z = grid.points[:, 2]
    x = grid.points[:, 0]
    assert np.dot(grid.weights, z * z) == pytest.approx(4.0 * math.pi / 3.0, abs=1e-12)
    assert np.dot(grid.weights, x * x * z * z) == pytest.approx(4.0 * math.pi / 15.0, abs=1e-12)


def test_cap_indicator_is_exact_with_declared_cut():
    axis, offset = np.array([1.0, 2.0, 2.0]) / 3.0, 0.4
    grid = build_sphere_grid(32, 64, [Cut.of(axis, offset)])
    area = np.dot(grid.weights, (grid.points @ axis > offset).astype(float))
    assert area == pytest.approx(2.0 * math.pi * (1.0 - offset), abs=1e-12)


def test_two_hemispheres_through_common_diameter_are_exact():
    a, b = np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0])
    grid = build_sphere_grid(32, 64, [Cut.of(a, 0.0), Cut.of(b, 0.0)])
    quarter = (grid.points @ a > 0) & (grid.points @ b > 0)
    assert np.dot(grid.weights, quarter.astype(float)) == pytest.approx(math.pi, abs=1e-12)


def test_cut_canonical_flips_offset_with_axis():
    axis, offset = Cut.of([0, 0, -2], 0.5).canonical()
    assert np.allclose(axis, [0, 0, 1])
    assert offset == -0.5


def test_zero_axis_cut_is_rejected():
    with pytest.raises(DomainError):
        Cut.of([0, 0, 0])


def test_samples_are_pure_function_of_index():
    full = uniform_sphere_samples(3, 0, 0, 3 * config.MC_BLOCK_SIZE // 2)
    tail = uniform_sphere_samples(3, 0, config.MC_BLOCK_SIZE - 10, 40)
    assert np.array_equal(full[config.MC_BLOCK_SIZE - 10:config.MC_BLOCK_SIZE + 30], tail)
    assert _on_sphere(full)


def test_streams_and_seeds_differ():
    a = uniform_sphere_samples(0, 0, 0, 100)
    assert not np.array_equal(a, uniform_sphere_samples(0, 1, 0, 100))
    assert not np.array_equal(a, uniform_sphere_samples(1, 0, 0, 100))


def test_samples_are_roughly_uniform():
    points = uniform_sphere_samples(5, 0, 0, 200000)
    assert np.abs(points.mean(axis=0)).max() < 0.01
    assert np.mean(points[:, 2] ** 2) == pytest.approx(1.0 / 3.0, abs=0.01)


def test_grid_integration_is_independent_of_workers():
    integrand = lambda pts: np.abs(pts[0][:, 0] - pts[1][:, 2])
    one = SphereIntegrator(QuadratureConfig(GaussGrid(16, 32), workers=1)).integrate(integrand, [[], []])
    many = SphereIntegrator(QuadratureConfig(GaussGrid(16, 32), workers=4)).integrate(integrand, [[], []])
    assert one.value == many.value


def test_monte_carlo_is_independent_of_workers_and_has_error():
    integrand = lambda pts: (pts[0][:, 2] > 0).astype(float)
    scheme = MonteCarlo(200000, seed=9)
    one = SphereIntegrator(QuadratureConfig(scheme, workers=1)).integrate(integrand, [[]])
    many = SphereIntegrator(QuadratureConfig(scheme, workers=3)).integrate(integrand, [[]])
    assert one == many
    assert one.std_error > 0.0
    assert abs(one.value - 2.0 * math.pi) <= 4.0 * one.std_error


def test_grid_product_too_large_raises(monkeypatch):
    monkeypatch.setattr(config, 'MAX_GRID_NODES', 1000)
    with pytest.raises(QuadratureError):
        SphereIntegrator(QuadratureConfig(GaussGrid(16, 32))).integrate(lambda pts: np.ones(len(pts[0])), [[], []])


def test_zero_factor_integrand_is_evaluated_once():
    est = SphereIntegrator().integrate(lambda pts: np.array([0.25]), [])
    assert est.value == 0.25
    assert est.std_error == 0.0


def test_invalid_configs_are_rejected():
    with pytest.raises(DomainError):
        GaussGrid(0, 10)
    with pytest.raises(DomainError):
        MonteCarlo(0)
    with pytest.raises(DomainError):
        QuadratureConfig(workers=0)


def test_grid_does_not_depend_on_cut_order():
    a, b = Cut.of([1.0, 0.0, 0.0]), Cut.of([0.3, 0.0, -0.8])
    first = build_sphere_grid(16, 32, [a, b])
    second = build_sphere_grid(16, 32, [b, a])
    assert np.array_equal(first.points, second.points)
    assert np.array_equal(first.weights, second.weights)
