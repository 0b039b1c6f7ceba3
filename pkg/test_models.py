import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from bloch import KET_0, KET_PLUS, M_01, M_PM, BlochVector, ProjectiveMeasurement, parse_state_spec, ray_to_bloch
from errors import UnknownModelError
from measures import Density, PointMass, Product, SpaceKind, expectation, total_mass
from models import MODEL_REGISTRY, BellMerminModel, bb_model, bm_model, get_model, ks_model
from sphere_quadrature import GaussGrid, QuadratureConfig, uniform_sphere_samples

GRID = QuadratureConfig(GaussGrid(64, 128))
ZP = np.array([[0.0, 0.0, 1.0]])


def test_registry_resolves_names():
    assert set(MODEL_REGISTRY) == {'bb', 'bm', 'ks'}
    assert isinstance(get_model('BM'), BellMerminModel)
    with pytest.raises(UnknownModelError):
        get_model('nope')


def test_bb_prepare_is_point_mass_at_bloch_vector():
    state = bb_model().prepare(KET_0)
    assert isinstance(state, PointMass)
    assert state.point.coords[0].isclose(BlochVector(0, 0, 1))
    assert state.space.kind is SpaceKind.PROJECTIVE_HILBERT


def test_bb_indicator_is_linear_response():
    indicator = bb_model().indicator(M_PM)
    assert indicator.outcome(0)(ZP)[0] == pytest.approx(0.5)


def test_bb_born_rule_is_exact():
    psi = parse_state_spec('0.7,2.1')
    m = ProjectiveMeasurement.from_axis(BlochVector.from_angles(1.9, -0.4))
    indicator = bb_model().indicator(m)
    expected = 0.5 * (1.0 + ray_to_bloch(psi).dot(m.axis))
    assert expectation(bb_model().prepare(psi), indicator.outcome(0)) == pytest.approx(expected, abs=1e-12)


def test_bm_indicator_step_convention():
    indicator = bm_model().indicator(M_PM)
    # x . (z + z) = 0 -> Theta(0) = 0
    assert indicator.outcome(0)(ZP, ZP)[0] == 0.0
    assert indicator.outcome(1)(ZP, ZP)[0] == 1.0
    assert bm_model().indicator(M_01).outcome(0)(ZP, ZP)[0] == 1.0


def test_bm_prepare_is_product_of_atom_and_uniform():
    state = bm_model().prepare(KET_PLUS)
    assert isinstance(state, Product)
    first, second = state.factors
    assert isinstance(first, PointMass)
    assert first.point.coords[0].isclose(BlochVector(1, 0, 0), atol=1e-15)
    assert isinstance(second, Density)
    assert total_mass(second, GRID) == pytest.approx(1.0, abs=1e-12)


def test_ks_prepare_density_values():
    state = ks_model().prepare(KET_0)
    assert state(ZP)[0] == pytest.approx(1.0 / math.pi)
    assert state(np.array([[0.6, 0.0, -0.8]]))[0] == 0.0
    assert total_mass(state, GRID) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize('model', [bb_model(), bm_model(), ks_model()], ids=lambda m: m.name)
def test_born_rule_reproduced_on_random_pairs(model):
    states = uniform_sphere_samples(42, 0, 0, 10)
    axes = uniform_sphere_samples(42, 1, 0, 10)
    for s, a in zip(states, axes):
        psi_vector, axis = BlochVector.from_array(s), BlochVector.from_array(a)
        m = ProjectiveMeasurement.from_axis(axis)
        state = model.prepare(parse_state_spec(f"{psi_vector.angles()[0]},{psi_vector.angles()[1]}"))
        indicator = model.indicator(m)
        p0 = expectation(state, indicator.outcome(0), GRID)
        p1 = expectation(state, indicator.outcome(1), GRID)
        assert p0 == pytest.approx(0.5 * (1.0 + psi_vector.dot(axis)), abs=1e-6)
        assert p0 + p1 == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize('model', [bb_model(), bm_model(), ks_model()], ids=lambda m: m.name)
def test_indicator_outcomes_sum_to_one(model):
    m = ProjectiveMeasurement.from_axis(BlochVector.from_angles(0.8, 0.3))
    indicator = model.indicator(m)
    points = [uniform_sphere_samples(8, k, 0, 1000) for k in range(model.space().factors)]
    assert indicator.completeness_defect(*points) <= 1e-12
