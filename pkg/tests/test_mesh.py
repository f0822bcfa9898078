from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from plinv.errors_collection import DegenerateSimplex, NonManifold, Disconnected, EmptyLevel, MalformedInput
from plinv.fixtures import random_rng, random_mesh_2d, random_mesh_3d
from plinv.fixtures.meshes import grid_mesh_2d
from plinv.mesh import (
    build_mesh, submesh, root_simplex_ids, complement_components, inner_covering, locate_point, locate_points,
)
from plinv.mesh.grid import GridSpec, label_regions
from plinv.mesh.io import load_mesh, dump_mesh, load_deformation, dump_deformation, load_images
from plinv.serialize import file_digest


def _shoelace(mesh) -> float:
    a, b = mesh.boundary_points[:, 0], mesh.boundary_points[:, 1]
    return 0.5 * float(np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]))


def _enclosed_volume(mesh) -> float:
    p = mesh.boundary_points
    return float(np.einsum('ij,ij->i', p[:, 0], np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])).sum()) / 6


class TestBuildMesh:
    def test_two_triangles(self):
        mesh = build_mesh(2, [(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 1, 2), (0, 2, 3)])
        assert mesh.simplex_count == 2
        assert np.allclose(mesh.volumes, 0.5)
        assert mesh.boundary_facets.shape == (4, 2)
        assert mesh.interior_facet_count == 1
        assert sorted(mesh.adjacency[mesh.adjacency >= 0].tolist()) == [0, 1]

    def test_clockwise_triangles_are_reoriented(self):
        mesh = build_mesh(2, [(0, 0), (1, 0), (0, 1)], [(0, 2, 1)])
        assert mesh.volumes[0] == pytest.approx(0.5)
        assert _shoelace(mesh) == pytest.approx(0.5)

    def test_degenerate_simplex(self):
        with pytest.raises(DegenerateSimplex) as e:
            build_mesh(2, [(0, 0), (1, 0), (2, 0), (0, 1)], [(0, 1, 3), (0, 1, 2)])
        assert e.value.simplex == 1

    def test_non_manifold_facet(self):
        vertices = [(0, 0), (1, 0), (0.5, 1), (0.5, -1), (0.5, 2)]
        with pytest.raises(NonManifold) as e:
            build_mesh(2, vertices, [(0, 1, 2), (0, 1, 3), (0, 1, 4)])
        assert e.value.facet == (0, 1)
        assert e.value.count == 3

    def test_disconnected(self):
        vertices = [(0, 0), (1, 0), (0, 1), (5, 0), (6, 0), (5, 1)]
        with pytest.raises(Disconnected) as e:
            build_mesh(2, vertices, [(0, 1, 2), (3, 4, 5)])
        assert e.value.component_count == 2
        assert build_mesh(2, vertices, [(0, 1, 2), (3, 4, 5)], require_connected=False).simplex_count == 2

    def test_out_of_range_index(self):
        with pytest.raises(MalformedInput):
            build_mesh(2, [(0, 0), (1, 0), (0, 1)], [(0, 1, 3)])

    def test_boundary_orientation_3d(self, cube_mesh):
        assert cube_mesh.total_volume == pytest.approx(1.0)
        assert _enclosed_volume(cube_mesh) == pytest.approx(1.0)

    @given(st.integers(0, 10 ** 6))
    def test_random_square_meshes(self, seed):
        mesh = random_mesh_2d(random_rng(seed))
        assert np.all(mesh.volumes > 0)
        assert mesh.total_volume == pytest.approx(1.0)
        assert _shoelace(mesh) == pytest.approx(1.0)

    @given(st.integers(0, 10 ** 6))
    def test_random_cube_meshes(self, seed):
        mesh = random_mesh_3d(random_rng(seed))
        assert mesh.total_volume == pytest.approx(1.0)
        assert _enclosed_volume(mesh) == pytest.approx(1.0)


class TestSubmesh:
    def test_parent_ids(self, square_mesh):
        sub = submesh(square_mesh, [3, 5, 7])
        assert sub.is_submesh
        assert root_simplex_ids(sub).tolist() == [3, 5, 7]
        assert np.allclose(square_mesh.vertices[sub.parent_vertices], sub.vertices)

    def test_nested_submesh_keeps_root_ids(self, square_mesh):
        sub = submesh(square_mesh, np.arange(10, 40))
        inner = submesh(sub, [0, 1])
        assert root_simplex_ids(inner).tolist() == [10, 11]

    def test_empty_selection(self, square_mesh):
        with pytest.raises(MalformedInput):
            submesh(square_mesh, [])


class TestComplement:
    def test_square(self, square_mesh):
        complement = complement_components(square_mesh)
        assert complement.component_count == 2
        assert complement.is_two_component
        assert complement.euler_count == 2
        assert complement.bounded_components[0].inside_domain
        assert not complement.unbounded_component.inside_domain

    def test_square_annulus(self):
        mesh = grid_mesh_2d((0.0, 0.0), (3.0, 3.0), 3, 3,
                            keep=lambda c: ~((np.abs(c[:, 0] - 1.5) < 1) & (np.abs(c[:, 1] - 1.5) < 1)))
        complement = complement_components(mesh)
        assert complement.component_count == 3
        assert complement.euler_count == 3
        assert sorted(r.inside_domain for r in complement.bounded_components) == [False, True]

    def test_cube(self, cube_mesh):
        complement = complement_components(cube_mesh)
        assert complement.is_two_component
        assert complement.euler_count is None


class TestGrid:
    def test_small_region_gets_three_representatives(self):
        grid = GridSpec(origin=np.zeros(2), h=1.0, shape=(9, 9))
        blocked = np.zeros(grid.shape, dtype=bool)
        blocked[2:7, 2:7] = True
        blocked[3:6, 3:6] = False
        regions = label_regions(grid, blocked)
        assert regions.bounded == (2,)
        reps = regions.representatives[2]
        assert len(np.unique(reps, axis=0)) >= 3
        assert regions.region_of(reps).tolist() == [2] * len(reps)


class TestLocate:
    def test_interior_point(self, square_mesh):
        location = locate_point(square_mesh, (0.31, 0.47))
        assert not location.outside
        assert not location.on_boundary_facet
        assert location.barycentric.sum() == pytest.approx(1.0)
        assert np.all(location.barycentric >= -1e-12)

    def test_outside_and_boundary(self, square_mesh):
        assert locate_point(square_mesh, (1.5, 0.5)).outside
        assert locate_point(square_mesh, (0.55, 0.0)).on_boundary_facet
        assert locate_points(square_mesh, np.array([(1.5, 0.5), (0.2, 0.2)]))[0] == -1


class TestCovering:
    def test_levels_are_nested(self, square_mesh):
        covering = inner_covering(square_mesh, 3)
        assert len(covering) == 3
        assert list(covering.offsets) == pytest.approx([0.25, 0.5 / 3, 0.125])
        ids = [set(root_simplex_ids(level).tolist()) for level in covering.levels]
        assert ids[0] <= ids[1] <= ids[2]
        assert all(covering.inherits_complement)

    def test_empty_level(self):
        mesh = build_mesh(2, [(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 1, 2), (0, 2, 3)])
        with pytest.raises(EmptyLevel) as e:
            inner_covering(mesh, 1)
        assert e.value.level == 1


class TestFiles:
    def test_mesh_file_is_byte_stable(self, tmp_path, square_mesh):
        first = dump_mesh(square_mesh, tmp_path / 'a.json')
        loaded = load_mesh(tmp_path / 'a.json')
        second = dump_mesh(loaded, tmp_path / 'b.json')
        assert first == second == file_digest(tmp_path / 'b.json')
        assert np.array_equal(loaded.simplices, square_mesh.simplices)

    def test_deformation_with_relative_mesh_ref(self, tmp_path, square_mesh):
        dump_mesh(square_mesh, tmp_path / 'mesh.json')
        images = 2.0 * square_mesh.vertices
        dump_deformation(images, 'mesh.json', tmp_path / 'deformation.json')
        mesh, loaded, ref = load_deformation(tmp_path / 'deformation.json')
        assert ref == 'mesh.json'
        assert mesh.vertex_count == square_mesh.vertex_count
        assert np.array_equal(loaded, images)
        assert np.array_equal(load_images(tmp_path / 'deformation.json', square_mesh), images)

    def test_malformed_files(self, tmp_path, square_mesh):
        (tmp_path / 'bad.json').write_text('{"dim": 2}')
        with pytest.raises(MalformedInput):
            load_mesh(tmp_path / 'bad.json')
        with pytest.raises(MalformedInput):
            load_mesh(tmp_path / 'missing.json')
        dump_deformation(np.zeros((3, 2)), square_mesh, tmp_path / 'short.json')
        with pytest.raises(MalformedInput):
            load_deformation(tmp_path / 'short.json')
