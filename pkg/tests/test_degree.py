from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plinv.degree import (
    PLMap, pl_differentials, preimages, winding_numbers, boundary_distance, degree_boundary, degree_regular_sum,
    degree_integral, degree_field, summarize_sigma, MIXED,
)
from plinv.errors_collection import OnImageBoundary, QueryErrors, MalformedInput
from plinv.fixtures import fixture_contact, random_rng, random_mesh_2d, random_mesh_3d, random_map, sample_values
from plinv.mesh import submesh

SQUARE_QUERY = (0.3712, 0.4137)
CUBE_QUERY = (0.3712, 0.4137, 0.2871)


def _reflected(pmap: PLMap) -> PLMap:
    images = pmap.images.copy()
    images[:, 0] = 1 - images[:, 0]
    return pmap.with_images(images)


class TestPLMap:
    def test_identity_differentials(self, identity_square):
        assert np.allclose(identity_square.determinants, 1.0)
        assert np.allclose(identity_square.gradients, np.eye(2))
        assert identity_square.image_volumes.sum() == pytest.approx(1.0)

    def test_cofactors_of_a_linear_map(self, square_mesh):
        linear = np.array([[2.0, 1.0], [0.5, 3.0]])
        pmap = PLMap.from_images(square_mesh, square_mesh.vertices @ linear.T)
        assert np.allclose(pmap.determinants, np.linalg.det(linear))
        expected = np.linalg.det(linear) * np.linalg.inv(linear).T
        assert np.allclose(pmap.cofactors, expected)
        gradients, determinants, cofactors = pl_differentials(pmap)
        assert np.allclose(gradients, linear)
        assert np.allclose(determinants, pmap.determinants)
        assert np.allclose(cofactors, expected)

    def test_wrong_image_shape(self, square_mesh):
        with pytest.raises(MalformedInput):
            PLMap.from_images(square_mesh, np.zeros((3, 2)))

    def test_restrict_keeps_images(self, identity_square):
        sub = submesh(identity_square.mesh, np.arange(20))
        local = identity_square.restrict(sub)
        assert np.allclose(local.images, sub.vertices)
        assert local.image_diag == identity_square.image_diag


class TestDegreeAlgorithms:
    @pytest.mark.parametrize('algorithm', (degree_boundary, degree_regular_sum))
    def test_identity_and_reflection(self, identity_square, algorithm):
        assert algorithm(identity_square, None, SQUARE_QUERY) == 1
        assert algorithm(_reflected(identity_square), None, SQUARE_QUERY) == -1
        assert algorithm(identity_square, None, (2.0, 2.0)) == 0

    def test_integral(self, identity_square):
        assert degree_integral(identity_square, None, SQUARE_QUERY) == pytest.approx(1.0, abs=1e-2)
        assert degree_integral(_reflected(identity_square), None, SQUARE_QUERY) == pytest.approx(-1.0, abs=1e-2)

    def test_cube(self, identity_cube):
        assert degree_boundary(identity_cube, None, CUBE_QUERY) == 1
        assert degree_regular_sum(identity_cube, None, CUBE_QUERY) == 1
        assert degree_integral(identity_cube, None, CUBE_QUERY) == pytest.approx(1.0, abs=1e-2)
        assert degree_boundary(identity_cube, None, (1.5, 0.5, 0.5)) == 0

    @pytest.mark.parametrize('algorithm', (degree_boundary, degree_regular_sum, degree_integral))
    def test_value_on_the_boundary_image(self, identity_square, algorithm):
        with pytest.raises(OnImageBoundary) as e:
            algorithm(identity_square, None, (0.5, 0.0))
        assert e.value.distance <= e.value.tolerance

    def test_submesh_degree(self, identity_square):
        left = submesh(identity_square.mesh, np.flatnonzero(identity_square.mesh.centroids[:, 0] < 0.5))
        assert degree_boundary(identity_square, left, (0.25, 0.4137)) == 1
        assert degree_boundary(identity_square, left, (0.75, 0.4137)) == 0

    def test_winding_numbers_many_points(self, identity_square):
        points = np.array([SQUARE_QUERY, (2.0, 0.5), (0.9, 0.9)])
        assert np.allclose(winding_numbers(identity_square, None, points), [1, 0, 1], atol=1e-9)

    def test_boundary_distance(self, identity_square):
        assert boundary_distance(identity_square, (0.5, 0.25)) == pytest.approx(0.25)

    def test_preimages(self, identity_square):
        found = preimages(identity_square, SQUARE_QUERY)
        assert found.count == 1
        assert found.signed_count == 1
        assert np.allclose(found.points[0], SQUARE_QUERY)
        assert not found.degenerate.any()

    @given(st.integers(0, 10 ** 6))
    def test_boundary_equals_regular_sum_2d(self, seed):
        rng = random_rng(seed)
        pmap = random_map(random_mesh_2d(rng), rng, reflect=bool(seed % 2))
        for z in sample_values(pmap, rng, 6):
            try:
                expected = degree_regular_sum(pmap, None, z)
            except QueryErrors:
                continue
            assert degree_boundary(pmap, None, z) == expected

    @settings(max_examples=8)
    @given(st.integers(0, 10 ** 6))
    def test_boundary_equals_regular_sum_3d(self, seed):
        rng = random_rng(seed)
        pmap = random_map(random_mesh_3d(rng), rng)
        for z in sample_values(pmap, rng, 4):
            try:
                expected = degree_regular_sum(pmap, None, z)
            except QueryErrors:
                continue
            assert degree_boundary(pmap, None, z) == expected

    @settings(max_examples=5)
    @given(st.integers(0, 10 ** 6))
    def test_integral_rounds_to_the_degree(self, seed):
        rng = random_rng(seed)
        pmap = random_map(random_mesh_2d(rng, 4), rng)
        for z in sample_values(pmap, rng, 2):
            try:
                expected = degree_boundary(pmap, None, z)
                value = degree_integral(pmap, None, z)
            except QueryErrors:
                continue
            assert value == pytest.approx(expected, abs=1e-2)


class TestDegreeField:
    def test_identity(self, identity_square):
        report = degree_field(identity_square, None, 64)
        assert report.sigma == 1
        assert report.max_degree == 1
        assert sorted(r.degree for r in report.regions) == [0, 1]
        assert report.degree_at(np.array([SQUARE_QUERY]))[0] == 1
        assert report.to_dict()['grid']

    def test_reflection(self, identity_square):
        report = degree_field(_reflected(identity_square), None, 64)
        assert report.sigma == -1
        assert report.max_degree == 0

    def test_every_region_has_three_representatives(self):
        report = degree_field(fixture_contact(10).pmap, None, 128)
        assert len(report.regions) >= 2
        assert all(len(r.representatives) >= 3 for r in report.regions)

    def test_summarize_sigma(self):
        assert summarize_sigma([0, 1, 1]) == 1
        assert summarize_sigma([0, -1]) == -1
        assert summarize_sigma([0]) is None
        assert summarize_sigma([0, 1, -1]) == MIXED
