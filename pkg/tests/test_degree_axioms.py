"""
Axioms of the degree on seeded random maps.
"""
from __future__ import annotations

import numpy as np
from hypothesis import given, settings, strategies as st

from plinv.degree import (
    PLMap, degree_boundary, degree_regular_sum, degree_field, boundary_distance, preimages,
)
from plinv.errors_collection import QueryErrors
from plinv.fixtures import random_rng, random_mesh_2d, random_mesh_3d, random_map, random_folded_map, sample_values
from plinv.mesh import submesh

seeds = st.integers(0, 10 ** 6)


def _degree_or_none(pmap: PLMap, A, z):
    try:
        return degree_boundary(pmap, A, z)
    except QueryErrors:
        return None


@given(seeds)
def test_normalization(seed):
    rng = random_rng(seed)
    pmap = PLMap.identity(random_mesh_2d(rng))
    for z in rng.uniform(0.05, 0.95, size=(5, 2)):
        if boundary_distance(pmap, z) > 10 * pmap.tau_deg:
            assert degree_boundary(pmap, None, z) == 1
    assert degree_boundary(pmap, None, (1.2, 0.5)) == 0


@given(seeds)
def test_additivity(seed):
    rng = random_rng(seed)
    mesh = random_mesh_2d(rng)
    pmap = random_map(mesh, rng) if seed % 2 else random_folded_map(mesh, rng)
    left = mesh.centroids[:, 0] < 0.5
    A1, A2 = submesh(mesh, np.flatnonzero(left)), submesh(mesh, np.flatnonzero(~left))
    for z in sample_values(pmap, rng, 6):
        degrees = [_degree_or_none(pmap, A, z) for A in (None, A1, A2)]
        if None in degrees:
            continue
        assert degrees[0] == degrees[1] + degrees[2]


@given(seeds)
def test_boundary_determines_the_degree(seed):
    rng = random_rng(seed)
    mesh = random_mesh_2d(rng)
    pmap = random_map(mesh, rng)
    images = pmap.images.copy()
    interior = ~mesh.boundary_vertex_mask
    images[interior] += rng.normal(scale=0.3, size=(int(interior.sum()), 2))
    other = pmap.with_images(images)
    assert np.array_equal(other.boundary_image_points, pmap.boundary_image_points)
    for z in sample_values(pmap, rng, 6):
        try:
            first, second = degree_regular_sum(pmap, None, z), degree_regular_sum(other, None, z)
        except QueryErrors:
            continue
        assert first == second


@given(seeds)
def test_stability_under_small_perturbations(seed):
    rng = random_rng(seed)
    pmap = random_map(random_mesh_2d(rng), rng)
    for z in sample_values(pmap, rng, 4):
        dist = boundary_distance(pmap, z)
        moved = pmap.with_images(pmap.images + rng.uniform(-0.3, 0.3, size=pmap.images.shape) * dist)
        assert degree_boundary(moved, None, z) == degree_boundary(pmap, None, z)


@given(seeds)
def test_reflection_antisymmetry(seed):
    rng = random_rng(seed)
    mesh = random_mesh_3d(rng) if seed % 4 == 0 else random_mesh_2d(rng)
    pmap = random_map(mesh, rng)
    mirror = np.ones(mesh.dim)
    mirror[-1] = -1.0
    reflected = pmap.with_images(pmap.images * mirror)
    for z in sample_values(pmap, rng, 4):
        degree = _degree_or_none(pmap, None, z)
        if degree is not None:
            assert degree_boundary(reflected, None, z * mirror) == -degree


@given(seeds)
def test_straight_line_homotopy(seed):
    rng = random_rng(seed)
    pmap = random_folded_map(random_mesh_2d(rng), rng) if seed % 2 else random_map(random_mesh_2d(rng), rng)
    twist = 2.0 * np.array([[0.0, -1.0], [1.0, 0.0]])  # no eigenvalue on the negative real axis
    for z in sample_values(pmap, rng, 3):
        start = _degree_or_none(pmap, None, z)
        if start is None:
            continue
        end = pmap.with_images(z + (pmap.images - z) @ twist.T)
        for t in np.linspace(0.0, 1.0, 11):
            y_t = pmap.with_images((1 - t) * pmap.images + t * end.images)
            assert boundary_distance(y_t, z) > y_t.tau_deg
            assert degree_boundary(y_t, None, z) == start


@settings(max_examples=10)
@given(seeds)
def test_solvability(seed):
    rng = random_rng(seed)
    mesh = random_mesh_2d(rng)
    pmap = random_map(mesh, rng, reflect=bool(seed % 2))
    report = degree_field(pmap, None, 96)
    for region in report.nonzero_regions:
        for z in region.representatives:
            assert preimages(pmap, z).count > 0
