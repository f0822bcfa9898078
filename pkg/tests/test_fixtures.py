from __future__ import annotations

import numpy as np
import pytest

from plinv.errors_collection import MalformedInput
from plinv.fixtures import (
    FIXTURES, PUBLISHED_FIXTURES, PUBLISHED, DERIVED, DEGREE, VERDICT, Expectation, evaluate, get_fixture,
    fixture_corpus, fixture_angle_doubling, fixture_stacked_holes, harmonic_extension, random_rng, random_mesh_2d,
    random_map, sample_values,
)
from plinv.degree import degree_boundary
from plinv.verdict import DEG1, HOLDS

QUICK_CORPUS = fixture_corpus(quick=True)


@pytest.mark.parametrize('fixture', QUICK_CORPUS, ids=[f.name for f in QUICK_CORPUS])
def test_expectations_hold(fixture):
    failed = [r.to_dict() for r in fixture.check(seed=0) if not r.passed]
    assert failed == []


def test_registry():
    assert set(PUBLISHED_FIXTURES) <= set(FIXTURES)
    for name in ('angle-doubling', 'annulus', 'cone-flip', 'cone-flip-intermediate'):
        assert get_fixture(name, n=32).published
    with pytest.raises(MalformedInput):
        get_fixture('moebius')


def test_identity_cube():
    fixture = get_fixture('identity-cube', n=2)
    assert all(r.passed for r in fixture.check(algorithms=('boundary', 'regular-sum')))


class TestStackedHoles:
    @pytest.mark.parametrize('holes, degree', ((1, 1), (1, -1), (2, -2), (4, 4)))
    def test_telescoping_degree(self, holes, degree):
        fixture = fixture_stacked_holes(holes, degree, n=32)
        assert degree_boundary(fixture.pmap, None, (5.0, 0.0)) == degree
        assert fixture.parameters == {'n_holes': holes, 'target_degree': degree, 'seed': 0}

    def test_hole_count_must_match(self):
        with pytest.raises(MalformedInput):
            fixture_stacked_holes(2, 3)
        with pytest.raises(MalformedInput):
            fixture_stacked_holes(9)

    def test_harmonic_extension_keeps_affine_maps(self, square_mesh):
        fixed = square_mesh.boundary_vertex_mask
        values = square_mesh.vertices * (2.0, 3.0) + (1.0, -1.0)
        guess = values.copy()
        guess[~fixed] = 0.0
        assert np.allclose(harmonic_extension(square_mesh, fixed, guess), values)


class TestExpectations:
    def test_source_is_checked(self):
        with pytest.raises(ValueError):
            Expectation(DEGREE, (0.0, 0.0), 1, 'folklore')
        with pytest.raises(ValueError):
            Expectation('volume', None, 1, DERIVED)

    def test_to_dict(self):
        e = Expectation(DEGREE, np.array([0.5, 0.25]), 1, PUBLISHED)
        assert e.to_dict()['query'] == [0.5, 0.25]
        assert Expectation(VERDICT, DEG1, HOLDS, DERIVED).to_dict()['query'] == DEG1

    def test_a_wrong_value_fails(self, identity_square):
        result = evaluate(identity_square, Expectation(DEGREE, (0.3712, 0.4137), 2, DERIVED))
        assert not result.passed
        assert result.observed['boundary'] == 1

    def test_query_errors_are_failures(self, identity_square):
        result = evaluate(identity_square, Expectation(DEGREE, (0.5, 0.0), 1, DERIVED), algorithms=('boundary',))
        assert not result.passed
        assert result.observed['boundary']['error'] == 'OnImageBoundary'

    def test_angle_doubling_at_two_resolutions(self):
        for n in (32, 64):
            fixture = fixture_angle_doubling(n)
            assert [r.passed for r in fixture.check(algorithms=('boundary',))] == [True] * len(fixture.expectations)


class TestGenerators:
    def test_same_seed_same_mesh(self):
        first, second = random_mesh_2d(random_rng(11)), random_mesh_2d(random_rng(11))
        assert np.array_equal(first.vertices, second.vertices)
        assert np.array_equal(first.simplices, second.simplices)

    def test_random_map_orientation(self):
        rng = random_rng(3)
        mesh = random_mesh_2d(rng)
        assert np.all(random_map(mesh, rng).determinants > 0)
        assert np.all(random_map(mesh, rng, reflect=True).determinants < 0)

    def test_sample_values_keep_clear_of_the_boundary(self, identity_square):
        values = sample_values(identity_square, random_rng(0), 200)
        assert values.shape[1] == 2
        edge = np.minimum(np.abs(values), np.abs(values - 1.0)).min(axis=1)
        inside = np.all((values > 0) & (values < 1), axis=1)
        assert np.all(edge[inside] > 10 * identity_square.tau_deg)
