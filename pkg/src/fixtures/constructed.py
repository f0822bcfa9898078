"""
Small maps with values derived by hand, covering the boundary cases of the conditions.
"""
from __future__ import annotations
from typing_extensions import Final

import numpy as np

from ..degree import PLMap
from ..errors_collection import MalformedInput
from ..verdict import CNC, DEG1, DEG1_LOC, AIB, HOLDS, FAILS
from .base import Fixture, Expectation, DERIVED, DEGREE, VERDICT, COMPLEMENT_COUNT, BOUNDARY_INJECTIVE
from .meshes import grid_mesh_2d, kuhn_mesh_3d

SQUARE_QUERY: Final = (0.3712, 0.4137)
CUBE_QUERY: Final = (0.3712, 0.4137, 0.2871)


def _require(condition: bool, name: str, reason: str):
    if not condition:
        raise MalformedInput(f'{name} fixture', reason)


def _unit_square(n: int):
    return grid_mesh_2d((0.0, 0.0), (1.0, 1.0), n, n)


def fixture_identity_square(n: int = 16) -> Fixture:
    _require(n >= 2, 'identity-square', f'n must be at least 2, got {n}')
    pmap = PLMap.identity(_unit_square(n))
    expectations = [
        Expectation(DEGREE, SQUARE_QUERY, 1, DERIVED, 'identity'),
        Expectation(COMPLEMENT_COUNT, None, 2, DERIVED, 'one boundary loop'),
        Expectation(BOUNDARY_INJECTIVE, None, True, DERIVED, 'identity'),
        Expectation(VERDICT, CNC, HOLDS, DERIVED, 'equality'),
        Expectation(VERDICT, DEG1, HOLDS, DERIVED, 'degree one inside'),
        Expectation(VERDICT, DEG1_LOC, HOLDS, DERIVED, 'degree one on every level'),
        Expectation(VERDICT, AIB, HOLDS, DERIVED, 'injective boundary'),
    ]
    return Fixture('identity-square', pmap, expectations, n)


def fixture_reflection_square(n: int = 16) -> Fixture:
    """``(x1, x2) -> (1 - x1, x2)``; every determinant is -1."""
    _require(n >= 2, 'reflection-square', f'n must be at least 2, got {n}')
    mesh = _unit_square(n)
    images = np.stack([1 - mesh.vertices[:, 0], mesh.vertices[:, 1]], axis=1)
    expectations = [Expectation(DEGREE, SQUARE_QUERY, -1, DERIVED, 'orientation reversing')]
    return Fixture('reflection-square', PLMap.from_images(mesh, images), expectations, n)


def fixture_identity_cube(n: int = 4) -> Fixture:
    _require(n >= 1, 'identity-cube', f'n must be at least 1, got {n}')
    pmap = PLMap.identity(kuhn_mesh_3d((0.0,) * 3, (1.0,) * 3, n))
    expectations = [
        Expectation(DEGREE, CUBE_QUERY, 1, DERIVED, 'identity'),
        Expectation(BOUNDARY_INJECTIVE, None, True, DERIVED, 'identity'),
    ]
    return Fixture('identity-cube', pmap, expectations, n)


def fixture_pinch(n: int = 16) -> Fixture:
    """
    Identity on the unit square except that the vertices of the segment ``{1/2} x [0, 1/4]`` are pulled
    down to the boundary point ``(1/2, 0)``. Determinants stay nonnegative and the boundary map is unchanged.
    """
    _require(n >= 4 and n % 4 == 0, 'pinch', f'n must be a positive multiple of 4, got {n}')
    mesh = _unit_square(n)
    tol = 0.25 / n
    on_segment = (np.abs(mesh.vertices[:, 0] - 0.5) < tol) & (mesh.vertices[:, 1] < 0.25 + tol)
    images = mesh.vertices.copy()
    images[on_segment] = (0.5, 0.0)
    expectations = [
        Expectation(DEGREE, SQUARE_QUERY, 1, DERIVED, 'away from the pinched segment'),
        Expectation(BOUNDARY_INJECTIVE, None, True, DERIVED, 'boundary vertices are fixed'),
        Expectation(VERDICT, CNC, HOLDS, DERIVED, 'collapsed simplices carry no volume'),
        Expectation(VERDICT, DEG1, HOLDS, DERIVED, 'degree one inside'),
    ]
    return Fixture('pinch', PLMap.from_images(mesh, images), expectations, n,
                   {'collapsed_vertices': np.flatnonzero(on_segment & ~mesh.boundary_vertex_mask)})


def fixture_contact(n: int = 10) -> Fixture:
    """
    A U-shaped body whose right arm is sheared left until its upper corner touches the upper corner of the
    left arm. All determinants are 1; the boundary map identifies two boundary vertices.
    """
    _require(n >= 5, 'contact', f'n must be at least 5, got {n}')
    m = max(1, n // 5)
    mesh = grid_mesh_2d((0.0, 0.0), (5.0, 4.0), 5 * m, 4 * m,
                        keep=lambda c: ~((c[:, 0] > 2) & (c[:, 0] < 3) & (c[:, 1] > 1)))
    x = mesh.vertices
    arm = (x[:, 0] >= 3 - 0.25 / m) & (x[:, 1] >= 1)
    images = x.copy()
    images[arm, 0] -= (x[arm, 1] - 1) / 3
    expectations = [
        Expectation(DEGREE, (1.0371, 0.5137), 1, DERIVED, 'bottom bar, identity'),
        Expectation(BOUNDARY_INJECTIVE, None, False, DERIVED, 'the arm corners meet at (2, 4)'),
        Expectation(VERDICT, AIB, HOLDS, DERIVED, 'pushing the corners apart releases the contact'),
        Expectation(VERDICT, CNC, HOLDS, DERIVED, 'images overlap in a single point'),
        Expectation(VERDICT, DEG1, HOLDS, DERIVED, 'degree one inside'),
    ]
    return Fixture('contact', PLMap.from_images(mesh, images), expectations, n)


def fixture_wrap(n: int = 32) -> Fixture:
    """
    The strip ``[0, 3 pi] x [0, 1]`` wound one and a half times around an annulus,
    ``(u, v) -> rho (cos u, sin u)`` with ``rho = 2 - v + 0.2 u / (2 pi)``; the determinant is ``rho``.
    """
    _require(n >= 16, 'wrap', f'n must be at least 16, got {n}')
    mesh = grid_mesh_2d((0.0, 0.0), (3 * np.pi, 1.0), 3 * n // 2, 3)
    u, v = mesh.vertices[:, 0], mesh.vertices[:, 1]
    rho = 2 - v + 0.2 * u / (2 * np.pi)
    images = rho[:, None] * np.stack([np.cos(u), np.sin(u)], axis=1)
    expectations = [
        Expectation(DEGREE, (0.0123, 1.6371), 2, DERIVED, 'covered by both turns'),
        Expectation(DEGREE, (1.6044, -0.3252), 1, DERIVED, 'covered by the first turn only'),
        Expectation(VERDICT, AIB, FAILS, DERIVED, 'the end segments cross the spiral transversally'),
        Expectation(VERDICT, CNC, FAILS, DERIVED, 'double cover'),
        Expectation(VERDICT, DEG1, FAILS, DERIVED, 'degree two'),
        Expectation(VERDICT, DEG1_LOC, FAILS, DERIVED, 'degree two on the first level'),
    ]
    return Fixture('wrap', PLMap.from_images(mesh, images), expectations, n)


def fixture_collapsed_patch(n: int = 16) -> Fixture:
    """Identity on the unit square except the star of the centre vertex, which collapses to the centre."""
    _require(n >= 6 and n % 2 == 0, 'collapsed-patch', f'n must be even and at least 6, got {n}')
    mesh = _unit_square(n)
    center = int(np.argmin(np.linalg.norm(mesh.vertices - 0.5, axis=1)))
    star = np.unique(mesh.simplices[mesh.vertex_stars()[center]])
    images = mesh.vertices.copy()
    images[star] = mesh.vertices[center]
    expectations = [
        Expectation(DEGREE, SQUARE_QUERY, 1, DERIVED, 'away from the patch'),
        Expectation(BOUNDARY_INJECTIVE, None, True, DERIVED, 'boundary vertices are fixed'),
        Expectation(VERDICT, CNC, HOLDS, DERIVED, 'collapsed simplices carry no volume'),
        Expectation(VERDICT, DEG1, HOLDS, DERIVED, 'degree one inside'),
    ]
    return Fixture('collapsed-patch', PLMap.from_images(mesh, images), expectations, n,
                   {'collapsed_vertices': star})
