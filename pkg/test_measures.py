import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from bloch import BlochVector
from errors import DomainError, SpaceMismatchError
from measures import (
    SPHERE,
    Density,
    IndicatorFunction,
    Mixture,
    OnticPoint,
    OnticSpace,
    PointMass,
    Product,
    ResponseFunction,
    SphericalCap,
    classical_fidelity,
    continuous_density,
    density_grid_frame,
    expectation,
    expectation_estimate,
    mix,
    support_overlap,
    total_mass,
    total_variation_distance,
)
from sphere_quadrature import Cut, GaussGrid, MonteCarlo, QuadratureConfig

GRID = QuadratureConfig(GaussGrid(64, 128))
Z = BlochVector(0, 0, 1)
X = BlochVector(1, 0, 0)


def atom(vector, space=SPHERE):
    return PointMass(space, OnticPoint((vector,)))


def hemisphere(vector):
    axis = vector.as_array()
    return Density(SPHERE, lambda pts: np.clip(pts @ axis, 0.0, None) / math.pi, SphericalCap(vector, 0.0))


def uniform():
    return Density(SPHERE, lambda pts: np.full(len(pts), 1.0 / (4.0 * math.pi)))


def test_point_mass_expectation_is_exact():
    assert expectation(atom(Z), lambda lam: 0.5 * (1.0 + lam[:, 2])) == 1.0


def test_density_expectation_and_mass():
    state = hemisphere(Z)
    assert total_mass(state, GRID) == pytest.approx(1.0, abs=1e-12)
    # Media de z bajo (1/pi) z en el hemisferio superior
    assert expectation(state, lambda lam: lam[:, 2], GRID) == pytest.approx(2.0 / 3.0, abs=1e-10)


def test_expectation_uses_response_cuts():
    response = ResponseFunction(SPHERE, lambda lam: (lam[:, 0] > 0.0).astype(float),
                                lambda fixed: {0: [Cut.of([1.0, 0.0, 0.0], 0.0)]})
    assert expectation(uniform(), response, GRID) == pytest.approx(0.5, abs=1e-14)


def test_expectation_rejects_space_mismatch():
    response = ResponseFunction(OnticSpace.product(2), lambda a, b: np.ones(len(a)))
    with pytest.raises(SpaceMismatchError):
        expectation(atom(Z), response)


def test_mixture_expectation_is_linear():
    p, q = hemisphere(Z), atom(X)
    mixture = mix([(0.3, p), (0.7, q)])
    f = lambda lam: np.cos(lam[:, 0]) + lam[:, 2] ** 3
    expected = 0.3 * expectation(p, f, GRID) + 0.7 * expectation(q, f, GRID)
    assert expectation(mixture, f, GRID) == pytest.approx(expected, abs=1e-15)


def test_mix_validates_weights_and_spaces():
    with pytest.raises(DomainError):
        mix([(0.5, atom(Z)), (0.6, atom(X))])
    with pytest.raises(DomainError):
        mix([(-0.1, atom(Z)), (1.1, atom(X))])
    with pytest.raises(SpaceMismatchError):
        mix([(0.5, atom(Z)), (0.5, atom(X, OnticSpace.projective_hilbert()))])
    with pytest.raises(DomainError):
        mix([])


def test_mix_single_component_returns_it():
    state = atom(Z)
    assert mix([(1.0, state)]) is state


def test_fidelity_of_atoms():
    assert classical_fidelity(atom(Z), atom(Z)) == 1.0
    assert classical_fidelity(atom(Z), atom(X)) == 0.0
    mixture = mix([(0.5, atom(Z)), (0.5, atom(X))])
    assert classical_fidelity(mixture, atom(Z)) == pytest.approx(math.sqrt(0.5), abs=1e-15)


def test_atom_and_density_are_mutually_singular():
    assert classical_fidelity(atom(Z), hemisphere(Z), GRID) == 0.0
    assert total_variation_distance(atom(Z), hemisphere(Z), GRID) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_of_overlapping_hemispheres():
    # integral de sqrt(z x)/pi sobre el cuarto de esfera z, x > 0
    expected = 0.42360654239699
    assert classical_fidelity(hemisphere(Z), hemisphere(X), GRID) == pytest.approx(expected, abs=1e-4)


def test_fidelity_of_antipodal_hemispheres_is_zero():
    assert classical_fidelity(hemisphere(Z), hemisphere(-Z), GRID) <= 1e-12


def test_density_fidelity_with_itself_is_one():
    assert classical_fidelity(hemisphere(X), hemisphere(X), GRID) == pytest.approx(1.0, abs=1e-10)


def test_support_overlap_reports_witness_inside_both_supports():
    overlap = support_overlap(hemisphere(Z), hemisphere(X), GRID)
    assert not overlap.disjoint
    point = overlap.witness.coords[0]
    assert point.z > 0.0 and point.x > 0.0

    disjoint = support_overlap(atom(Z), atom(X))
    assert disjoint.disjoint
    assert disjoint.witness is None


def test_total_variation_of_atom_mixtures():
    p = mix([(0.5, atom(Z)), (0.5, atom(-Z))])
    q = mix([(0.5, atom(X)), (0.5, atom(-X))])
    assert total_variation_distance(p, q) == pytest.approx(1.0)
    assert total_variation_distance(p, p) == 0.0
    r = mix([(0.25, atom(Z)), (0.75, atom(-Z))])
    assert total_variation_distance(p, r) == pytest.approx(0.25)


def test_total_variation_of_hemisphere_mixtures():
    p = mix([(0.5, hemisphere(Z)), (0.5, hemisphere(-Z))])
    q = mix([(0.5, hemisphere(X)), (0.5, hemisphere(-X))])
    assert total_variation_distance(p, q, GRID) == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-3)


def test_product_of_atom_and_density():
    space = OnticSpace.product(2)
    state = Product(space, (atom(Z), uniform()))
    f = ResponseFunction(
        space,
        lambda l1, l2: (l1[:, 2] + l2[:, 2] > 0.5).astype(float),
        lambda fixed: {1: [Cut.of([0.0, 0.0, 1.0], 0.5 - fixed[0][2])]} if fixed[0] is not None else {},
    )
    # z'' > -0.5 tiene área 2pi * 1.5
    assert expectation(state, f, GRID) == pytest.approx(0.75, abs=1e-12)

    other = Product(space, (atom(X), uniform()))
    assert classical_fidelity(state, other, GRID) == 0.0
    assert classical_fidelity(state, state, GRID) == pytest.approx(1.0, abs=1e-12)


def test_product_marginals_recover_factor_states():
    space = OnticSpace.product(2)
    state = Product(space, (atom(Z), hemisphere(X)))
    assert expectation(state, lambda l1, l2: l1[:, 2], GRID) == 1.0
    assert expectation(state, lambda l1, l2: l2[:, 0], GRID) == pytest.approx(2.0 / 3.0, abs=1e-10)


def test_product_validates_factor_count():
    with pytest.raises(SpaceMismatchError):
        Product(OnticSpace.product(2), (atom(Z),))


def test_point_must_be_on_sphere():
    with pytest.raises(DomainError):
        OnticPoint((BlochVector(0.5, 0, 0),))


def test_monte_carlo_expectation_within_error():
    cfg = QuadratureConfig(MonteCarlo(200000, seed=3))
    estimate = expectation_estimate(hemisphere(Z), lambda lam: lam[:, 2], cfg)
    assert estimate.std_error > 0.0
    assert abs(estimate.value - 2.0 / 3.0) <= 4.0 * estimate.std_error


def test_continuous_density_of_mixture():
    p = mix([(0.5, hemisphere(Z)), (0.5, hemisphere(-Z))])
    points = np.array([[0.0, 0.0, 1.0], [0.6, 0.0, -0.8], [1.0, 0.0, 0.0]])
    expected = np.abs(points[:, 2]) / (2.0 * math.pi)
    assert np.allclose(continuous_density(p, points), expected, atol=1e-15)


def test_density_grid_frame_rows():
    frame = density_grid_frame(Product(OnticSpace.product(2), (atom(Z), uniform())), QuadratureConfig(GaussGrid(16, 32)))
    atoms = frame[frame['type'] == 'atom']
    grid = frame[frame['type'] == 'density']
    assert len(atoms) == 1
    assert (atoms['z'] == 1.0).all()
    assert len(grid) == 16 * 32
    assert (grid['factor'] == 1).all()
    assert np.allclose(grid['density'], 1.0 / (4.0 * math.pi))


def test_indicator_completeness_defect():
    outcomes = (
        ResponseFunction(SPHERE, lambda lam: (lam[:, 2] > 0).astype(float)),
        ResponseFunction(SPHERE, lambda lam: 1.0 - (lam[:, 2] > 0).astype(float)),
    )
    indicator = IndicatorFunction(SPHERE, outcomes)
    points = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    assert indicator.completeness_defect(points) == 0.0


def test_mixture_node_requires_components():
    with pytest.raises(DomainError):
        Mixture(SPHERE, ())


def test_density_must_integrate_to_one():
    with pytest.raises(DomainError):
        Density(SPHERE, lambda pts: np.ones(len(pts)), label='ones')
    with pytest.raises(DomainError):
        Density(SPHERE, lambda pts: np.clip(pts[:, 2], 0.0, None) / (2.0 * math.pi), SphericalCap(Z, 0.0))


def test_every_representable_state_has_unit_mass():
    space = OnticSpace.product(2)
    states = [
        hemisphere(X),
        mix([(0.25, hemisphere(Z)), (0.75, atom(X))]),
        Product(space, (atom(Z), hemisphere(-X))),
    ]
    for state in states:
        assert total_mass(state, GRID) == pytest.approx(1.0, abs=1e-10)


def test_classical_fidelity_is_symmetric():
    rng = np.random.default_rng(5)
    cfg = QuadratureConfig(GaussGrid(32, 64))
    for _ in range(8):
        a, b = rng.normal(size=(2, 3))
        u = BlochVector.from_array(a / np.linalg.norm(a))
        v = BlochVector.from_array(b / np.linalg.norm(b))
        weight = float(rng.uniform(0.1, 0.9))
        p = mix([(weight, hemisphere(u)), (1.0 - weight, atom(v))])
        q = mix([(0.5, hemisphere(v)), (0.5, atom(v))])
        assert classical_fidelity(p, q, cfg) == pytest.approx(classical_fidelity(q, p, cfg), abs=1e-12)


def test_overlap_from_several_small_classes_has_witness():
    y = BlochVector(0, 1, 0)
    small = 0.8e-9
    p = mix([(small, atom(X)), (small, atom(y)), (1.0 - 2.0 * small, atom(Z))])
    q = mix([(small, atom(X)), (small, atom(y)), (1.0 - 2.0 * small, atom(-Z))])
    overlap = support_overlap(p, q)
    assert overlap.fidelity > 1e-9
    assert not overlap.disjoint
    point = overlap.witness.coords[0]
    assert point.isclose(X) or point.isclose(y)


def test_density_grid_frame_separates_weight_and_density():
    frame = density_grid_frame(mix([(0.25, atom(Z)), (0.75, uniform())]), QuadratureConfig(GaussGrid(16, 32)))
    atoms = frame[frame['type'] == 'atom']
    grid = frame[frame['type'] == 'density']
    assert atoms['weight'].tolist() == [0.25]
    assert atoms['density'].isna().all()
    assert grid['weight'].isna().all()
    assert np.allclose(grid['density'], 0.75 / (4.0 * math.pi))
