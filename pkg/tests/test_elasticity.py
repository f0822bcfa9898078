from __future__ import annotations

import numpy as np
import pytest

from plinv.degree import PLMap
from plinv.elasticity import (
    INFINITE, Box, EnergyModel, energy_density, distortions, total_energy, energy_gradient, scaled_translate,
    Deg1Loc, CNCPenalty, MinimizationRecord, minimize, constraint_by_name, determinant_step_limit, certify_minimizer,
    image_overlaps,
)
from plinv.errors_collection import InvalidEnergyModel, MalformedInput, NonpositiveDeterminant, InfeasibleInitial
from plinv.conditions import check_CNC, check_DEG1_loc
from plinv.fixtures import fixture_angle_doubling, fixture_pinch, fixture_wrap
from plinv.fixtures.meshes import grid_mesh_2d
from plinv.mesh import inner_covering

W1 = EnergyModel('W1', p=2, r=1)
W2 = EnergyModel('W2', p=3, r=1, s=2, g=(0.3, -0.2))
W3 = EnergyModel('W3', p=2, r=2, s=3)


@pytest.fixture(scope='module')
def small_mesh():
    return grid_mesh_2d((0.0, 0.0), (1.0, 1.0), 4, 4)


def _sheared(mesh, rng) -> PLMap:
    linear = np.array([[1.2, 0.3], [0.1, 0.9]])
    images = mesh.vertices @ linear.T + rng.uniform(-0.01, 0.01, size=mesh.vertices.shape)
    return PLMap.from_images(mesh, images)


class TestEnergyModel:
    def test_densities_at_the_identity(self):
        eye = np.eye(2)
        assert energy_density(W1, eye) == pytest.approx(3.0)
        assert energy_density(EnergyModel('W2', p=2, r=1, s=2), eye) == pytest.approx(5.0)
        assert energy_density(EnergyModel('W3', p=2, r=1, s=2), eye) == pytest.approx(13.0)

    def test_infinite_without_orientation(self):
        assert energy_density(W1, np.diag([1.0, -1.0])) == INFINITE
        values = energy_density(W1, np.stack([np.eye(2), np.zeros((2, 2))]))
        assert values[0] == pytest.approx(3.0)
        assert values[1] == INFINITE

    @pytest.mark.parametrize('kwargs', (
        {'family': 'W4', 'p': 2, 'r': 1},
        {'family': 'W1', 'p': 1.5, 'r': 1},
        {'family': 'W1', 'p': 2, 'r': 0},
        {'family': 'W2', 'p': 2, 'r': 1},
        {'family': 'W1', 'p': 2, 'r': 1, 'q': 1},
    ))
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(InvalidEnergyModel):
            EnergyModel(**kwargs)

    def test_from_dict(self):
        model = EnergyModel.from_dict({'family': 'W2', 'p': 3, 'r': 3, 's': 9, 'box': [(0, 0), (2, 0), (0, 2)]})
        assert model.box.dim == 2
        assert model.to_dict()['s'] == 9.0
        with pytest.raises(MalformedInput):
            EnergyModel.from_dict({'family': 'W1', 'p': 2, 'r': 1, 'lambda': 3})
        with pytest.raises(MalformedInput):
            EnergyModel.from_dict([1, 2])

    def test_distortion_control(self):
        assert EnergyModel('W1', p=8, r=8).controls_inner_distortion()
        assert not EnergyModel('W1', p=8, r=8).controls_outer_distortion()
        assert EnergyModel('W1', p=8, r=9).controls_outer_distortion()
        inner_only = EnergyModel('W2', p=3, r=3, s=9)
        assert inner_only.controls_inner_distortion()
        assert not inner_only.controls_outer_distortion()
        assert EnergyModel('W3', p=3, r=3, s=10).controls_outer_distortion()


class TestEnergy:
    def test_distortions_of_the_identity(self, identity_square):
        field = distortions(identity_square)
        assert np.allclose(field.outer, 2.0)
        assert np.allclose(field.inner, 2.0)
        assert np.all(field.inequality_margin(2) >= -1e-12)

    def test_distortions_need_positive_determinants(self, identity_square):
        flipped = identity_square.with_images(identity_square.images * (-1.0, 1.0))
        with pytest.raises(NonpositiveDeterminant):
            distortions(flipped)
        assert total_energy(W1, flipped) == INFINITE

    def test_total_energy_of_the_identity(self, identity_square):
        assert total_energy(W1, identity_square) == pytest.approx(3.0)
        pushed = EnergyModel('W1', p=2, r=1, g=(1.0, 0.0))
        # int x1 dx over the unit square
        assert total_energy(pushed, identity_square) == pytest.approx(3.5)

    @pytest.mark.parametrize('model', (W1, W2, W3), ids=('W1', 'W2', 'W3'))
    def test_gradient_matches_finite_differences(self, small_mesh, rng, model):
        pmap = _sheared(small_mesh, rng)
        grad = energy_gradient(model, pmap)
        h = 1e-6
        numeric = np.zeros_like(grad)
        for index in np.ndindex(*pmap.images.shape):
            up, down = pmap.images.copy(), pmap.images.copy()
            up[index] += h
            down[index] -= h
            numeric[index] = (total_energy(model, pmap.with_images(up))
                              - total_energy(model, pmap.with_images(down))) / (2 * h)
        assert np.allclose(grad, numeric, atol=1e-5, rtol=1e-5)


class TestBox:
    def test_rectangle(self):
        box = Box.rectangle((0, 0), (2, 1))
        assert box.contains(np.array([(1.0, 0.5), (2.5, 0.5)])).tolist() == [True, False]
        assert np.allclose(box.project(np.array([(2.5, 0.5), (1.0, -1.0)])), [(2.0, 0.5), (1.0, 0.0)])
        assert box.diag == pytest.approx(np.sqrt(5))

    def test_flat_box(self):
        with pytest.raises(MalformedInput):
            Box.from_vertices([(0, 0), (1, 1), (2, 2)])

    def test_scaled_translate(self, square_mesh):
        box = Box.from_vertices([(0, 0), (4, 0), (0, 4)])
        pmap = scaled_translate(square_mesh, box)
        assert pmap.is_orientation_preserving
        assert np.all(box.contains(pmap.images))
        with pytest.raises(InfeasibleInitial):
            scaled_translate(square_mesh, box, fill=0.0)


class TestStepLimit:
    def test_first_vanishing_determinant(self, identity_square):
        # det((1 - t), (1 - t / 2)) first vanishes at t = 1
        direction = identity_square.images * (-1.0, -0.5)
        assert determinant_step_limit(identity_square, direction) == pytest.approx(0.5)

    def test_expansion_never_folds(self, identity_square):
        assert determinant_step_limit(identity_square, identity_square.images) == np.inf


class TestMinimize:
    def test_energy_decreases(self, identity_square):
        record = minimize(W1, identity_square, Deg1Loc(), budget=30)
        assert record.is_monotone()
        assert record.final_energy < record.iterates[0]
        assert record.final_map.is_orientation_preserving
        assert record.iterations == len(record.objectives) - 1
        assert all(entry['accepted'] for entry in record.constraint_log if entry['path'] == 'injective-boundary')

    def test_with_a_box(self, square_mesh):
        model = EnergyModel('W1', p=2, r=1, g=(0.0, 5.0), box=Box.rectangle((0, 0), (1.5, 1.5)))
        record = minimize(model, scaled_translate(square_mesh, model.box), CNCPenalty(), budget=25)
        assert record.is_monotone()
        assert np.all(model.box.contains(record.final_map.images))
        assert record.to_dict()['constraint']['name'] == 'CNC-penalty'

    def test_infeasible_initial(self, identity_square):
        flipped = identity_square.with_images(identity_square.images * (-1.0, 1.0))
        with pytest.raises(InfeasibleInitial):
            minimize(W1, flipped)
        boxed = EnergyModel('W1', p=2, r=1, box=Box.rectangle((0, 0), (0.5, 0.5)))
        with pytest.raises(InfeasibleInitial):
            minimize(boxed, identity_square)

    def test_exponent_is_checked_against_the_map_dimension(self, identity_cube):
        with pytest.raises(InvalidEnergyModel) as e:
            minimize(W1, identity_cube, budget=1)
        assert e.value.field == 'p'
        with pytest.raises(InvalidEnergyModel):
            minimize(EnergyModel('W1', p=3, r=1, g=(0.0, 1.0)), identity_cube, budget=1)
        EnergyModel('W1', p=3, r=1, g=(0.0, 0.0, 1.0)).validate_dimension(3)

    def test_constraint_by_name(self):
        assert isinstance(constraint_by_name('DEG1_loc'), Deg1Loc)
        assert constraint_by_name('cnc-penalty', seed=4).seed == 4
        with pytest.raises(InfeasibleInitial):
            constraint_by_name('volume')


class TestCertify:
    def test_outer_control_certifies_global_injectivity(self, identity_square):
        record = minimize(EnergyModel('W1', p=8, r=9), identity_square, budget=10)
        certificate = certify_minimizer(record, samples=5_000)
        assert certificate.issued == ('a', 'b')
        assert record.to_dict()['certificate']['issued'] == ['a', 'b']

    def test_inner_control_uses_the_reduced_domain(self, identity_square):
        record = minimize(EnergyModel('W2', p=3, r=3, s=9), identity_square, budget=10)
        certificate = certify_minimizer(record, samples=5_000)
        assert certificate.issued == ('a', 'c')
        assert certificate.reduced_injectivity['excluded_simplices'].size == 0

    def test_a_record_without_a_model_is_checked_globally(self, identity_square):
        certificate = certify_minimizer(MinimizationRecord(final_map=identity_square), samples=5_000)
        assert certificate.issued == ('a', 'b')

    def test_a_double_cover_fails_injectivity(self):
        record = MinimizationRecord(final_map=fixture_angle_doubling(32).pmap)
        certificate = certify_minimizer(record, samples=5_000)
        assert 'a' not in certificate.issued
        assert certificate.injective_ae.fails
        assert certificate.injective_ae.evidence['witness']['preimage_count'] == 2
        assert not certificate.global_injectivity['injective']

    def test_pinch_excludes_the_boundary_touching_simplices(self):
        fixture = fixture_pinch(16)
        record = MinimizationRecord(final_map=fixture.pmap, model=EnergyModel('W2', p=3, r=3, s=9))
        certificate = certify_minimizer(record, samples=5_000)
        assert certificate.issued == ('a', 'c')
        assert certificate.nonpositive_determinants > 0
        reduced = certificate.reduced_injectivity
        assert reduced['excluded_simplices'].size > 0
        assert np.allclose(reduced['boundary_touching_values'], (0.5, 0.0))

    def test_square_in_a_box_under_gravity(self, square_mesh):
        box = Box.rectangle((-0.5, -0.5), (1.5, 1.5))
        model = EnergyModel('W2', p=3, r=3, s=9, g=(0.0, -1.0), box=box)
        record = minimize(model, scaled_translate(square_mesh, box), Deg1Loc(), budget=60)
        assert record.is_monotone()
        final = record.final_map
        assert np.all(final.determinants > 0)
        assert box.excess(final.images).max() <= box.tolerance
        assert check_CNC(final, samples=5_000).holds
        assert check_DEG1_loc(final, inner_covering(final.mesh, 2)).holds
        assert 'a' in certify_minimizer(record, samples=5_000).issued

    def test_overlapping_images(self):
        overlaps = image_overlaps(fixture_wrap(32).pmap)
        assert not overlaps['injective']
        assert overlaps['witnesses'][0]['area'] > 0
