from __future__ import annotations

import numpy as np
import pytest

from plinv.degree import PLMap
from plinv.errors_collection import EmptyPreimage, BoundaryTouchingPiece
from plinv.fixtures import fixture_identity_square, fixture_pinch, fixture_wrap, fixture_collapsed_patch
from plinv.fixtures.meshes import grid_mesh_2d
from plinv.mesh import inner_covering, submesh
from plinv.topology import (
    topological_image, localized_image, check_image_monotonicity, check_image_identity, image_has_empty_interior,
    preimage_components, isolate_component, ReducedDomain, reduced_domain, check_strictly_orientation_preserving,
    restrict_check, topology_report, refined_map,
)

QUERY = (0.3712, 0.4137)


@pytest.fixture(scope='module')
def pinch():
    return fixture_pinch(16).pmap


@pytest.fixture(scope='module')
def wrap():
    return fixture_wrap(32).pmap


class TestImages:
    def test_identity(self, identity_square):
        image = topological_image(identity_square, None, 64)
        assert image.degrees == [1]
        assert 0.7 < image.measure <= 1.0 + 1e-9
        assert image.contains(np.array([QUERY, (1.5, 0.5)])).tolist() == [True, False]

    def test_wrap_is_covered_twice(self, wrap):
        assert topological_image(wrap, None, 128).degrees == [1, 2]

    def test_localized_image_is_a_union(self, identity_square):
        covering = inner_covering(identity_square.mesh, 2)
        local = localized_image(identity_square, covering, 64)
        assert len(local.levels) == 2
        assert all(local.union.measure >= level.measure for level in local.levels)
        assert local.union.contains(np.array([(0.5, 0.5)]))[0]
        assert not local.union.contains(np.array([(0.05, 0.05)]))[0]

    def test_monotone_levels(self, identity_square):
        covering = inner_covering(identity_square.mesh, 3)
        assert check_image_monotonicity(identity_square, covering, 64) == []

    def test_image_identity(self, identity_square):
        result = check_image_identity(identity_square, None, 64)
        assert result == {'uncovered': [], 'unreached': []}

    def test_boundary_image_has_empty_interior(self, identity_square):
        check = image_has_empty_interior(identity_square, resolution=64)
        assert check.holds
        assert check.filled_cells == 0


class TestPreimages:
    def test_single_inner_piece(self, identity_square):
        component = preimage_components(identity_square, QUERY, eta=0.1)
        assert len(component.pieces) == 1
        assert not component.pieces[0].touches_boundary
        assert np.allclose(component.pieces[0].clusters(1e-9)[0], QUERY)

    def test_piece_near_the_boundary_touches_it(self, identity_square):
        component = preimage_components(identity_square, (0.5, 0.02), eta=0.1)
        assert component.touching
        with pytest.raises(BoundaryTouchingPiece):
            isolate_component(identity_square, component.touching[0], 4, (0.5, 0.02))

    def test_empty_preimage(self, identity_square):
        with pytest.raises(EmptyPreimage):
            preimage_components(identity_square, (3.0, 3.0), eta=0.1)

    def test_wrap_has_one_piece_per_turn(self, wrap):
        component = preimage_components(wrap, (0.0123, 1.6371), eta=0.05)
        assert len(component.pieces) == 2
        assert not component.touching
        assert all(len(piece.clusters(1e-6)) == 1 for piece in component.pieces)

    @pytest.mark.parametrize('n', (2, 4, 8))
    def test_isolate(self, identity_square, n):
        piece = preimage_components(identity_square, QUERY, eta=0.05).inner[0]
        isolated = isolate_component(identity_square, piece, n, QUERY)
        assert isolated.degree >= 1
        assert isolated.slack_within_bound
        assert isolated.submesh.simplex_count < identity_square.mesh.simplex_count

    def test_isolate_refines_a_coarse_mesh(self):
        coarse = PLMap.identity(grid_mesh_2d((0.0, 0.0), (1.0, 1.0), 2, 2))
        piece = preimage_components(coarse, QUERY, eta=0.05).inner[0]
        isolated = isolate_component(coarse, piece, 8, QUERY)
        assert isolated.slack <= 1 / 8
        assert isolated.slack_within_bound
        assert isolated.degree == 1
        assert np.allclose(isolated.center, QUERY)

    def test_refined_map_is_the_same_map(self, wrap):
        fine = refined_map(wrap)
        assert fine.mesh.simplex_count == 4 * wrap.mesh.simplex_count
        assert fine.mesh.vertex_count > wrap.mesh.vertex_count
        assert fine.mesh.total_volume == pytest.approx(wrap.mesh.total_volume)
        assert np.sum(fine.determinants * fine.mesh.volumes) == pytest.approx(
            np.sum(wrap.determinants * wrap.mesh.volumes))


class TestReducedDomain:
    def test_identity_keeps_everything(self, identity_square):
        reduced = reduced_domain(identity_square)
        assert reduced.is_everything
        assert reduced.boundary_touching_values.shape == (0, 2)
        assert reduced.strictness.holds
        assert restrict_check(identity_square, reduced=reduced).holds

    def test_pinch_excludes_the_collapsed_segment(self, pinch):
        reduced = reduced_domain(pinch)
        assert reduced.excluded_simplices.size > 0
        assert np.allclose(reduced.boundary_touching_values, (0.5, 0.0))
        fixture = fixture_pinch(16)
        assert not reduced.vertex_mask[fixture.parameters['collapsed_vertices']].any()
        assert restrict_check(pinch, reduced=reduced, seed=3).holds

    def test_a_reduced_domain_missing_inner_simplices_fails(self):
        pmap = fixture_identity_square(16).pmap
        mesh = pmap.mesh
        kept = np.flatnonzero(mesh.centroids[:, 0] > 0.5)
        wrong = ReducedDomain(vertex_mask=mesh.vertices[:, 0] > 0.5, simplex_mask=mesh.centroids[:, 0] > 0.5,
                              submesh=submesh(mesh, kept), boundary_touching_values=np.empty((0, 2)),
                              strictness=check_strictly_orientation_preserving(pmap))
        verdict = restrict_check(pmap, reduced=wrong)
        assert verdict.fails
        assert verdict.evidence['degree_U'] == 1
        assert verdict.evidence['degree_reduced'] == 0
        assert verdict.evidence['value'][0] < 0.5

    def test_collapse_away_from_the_boundary_is_kept(self):
        pmap = fixture_collapsed_patch(16).pmap
        reduced = reduced_domain(pmap)
        assert reduced.is_everything
        assert restrict_check(pmap, reduced=reduced).evidence.get('trivial')

    def test_strict_orientation_by_determinants(self, identity_square):
        verdict = check_strictly_orientation_preserving(identity_square)
        assert verdict.holds
        assert verdict.evidence['method'] == 'determinants'


def test_topology_report(identity_square):
    covering = inner_covering(identity_square.mesh, 2)
    report = topology_report(identity_square, covering, 64, query=QUERY, eta=0.1)
    assert report.monotonicity_witnesses == []
    assert len(report.preimage.pieces) == 1
    out = report.to_dict()
    assert set(out) >= {'im_T', 'im_loc', 'reduced_domain', 'preimage', 'monotonicity_witnesses'}
    assert topology_report(identity_square, covering, 64, query=(4.0, 4.0), eta=0.1).preimage is None
