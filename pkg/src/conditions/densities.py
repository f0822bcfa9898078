"""
Test densities and the degree-weighted change of variables.
"""
from __future__ import annotations
from typing import Optional, Union
from typing_extensions import Final

import math
import numpy as np
from attrs import frozen, field

from .. import log
from ..degree import PLMap, degree_field
from ..degree.quadrature import QUADRATURE_ORDER, integrate, gauss_legendre, quadrature_points, refine
from ..errors_collection import MalformedInput
from ..mesh.simplicial import SimplicialMesh

logger = log.getLogger('plinv.checker')

FLUX_TOLERANCE: Final = 1e-10  # x (|lhs| + 1)
SEGMENT_ORDER: Final = 12
FACET_REFINEMENTS: Final = {'polynomial': 0, 'bump': 3}
CHORD_ORDER: Final = 4
FLUX: Final = 'flux'
REGIONS: Final = 'regions'


def _exponents(value) -> dict[tuple[int, ...], float]:
    terms = {tuple(int(e) for e in key): float(coef) for key, coef in dict(value).items()}
    if not terms:
        raise MalformedInput('density', 'a polynomial needs at least one term')
    if len({len(key) for key in terms}) != 1 or any(e < 0 for key in terms for e in key):
        raise MalformedInput('density', 'exponents must be non-negative tuples of one length')
    return terms


@frozen
class PolynomialDensity:
    """``f(z) = sum c_a z^a`` with ``terms`` mapping exponent tuples to coefficients."""
    terms: dict = field(converter=_exponents)

    @classmethod
    def constant(cls, d: int, value: float = 1.0) -> PolynomialDensity:
        return cls({(0,) * d: value})

    @property
    def dim(self) -> int:
        return len(next(iter(self.terms)))

    @property
    def degree(self) -> int:
        return max(sum(key) for key in self.terms)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.atleast_2d(z)
        return sum(coef * np.prod(z ** np.array(key), axis=1) for key, coef in self.terms.items())

    def antiderivative(self, z: np.ndarray) -> np.ndarray:
        """``F`` with ``dF/dz_1 = f`` and ``F = 0`` on ``z_1 = 0``."""
        z = np.atleast_2d(z)
        out = np.zeros(z.shape[0])
        for key, coef in self.terms.items():
            raised = (key[0] + 1,) + key[1:]
            out += coef / (key[0] + 1) * np.prod(z ** np.array(raised), axis=1)
        return out

    def to_dict(self) -> dict:
        return {'kind': 'polynomial', 'terms': [[list(k), c] for k, c in sorted(self.terms.items())]}


@frozen
class RadialBumpDensity:
    """``f(z) = (1 - |z - center|^2 / radius^2)^2`` inside the ball, 0 outside."""
    center: np.ndarray = field(converter=lambda c: np.asarray(c, dtype=float))
    radius: float = field(converter=float)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def __call__(self, z: np.ndarray) -> np.ndarray:
        s = np.sum((np.atleast_2d(z) - self.center) ** 2, axis=1) / self.radius ** 2
        return np.where(s < 1, (1 - s) ** 2, 0.0)

    def antiderivative(self, z: np.ndarray) -> np.ndarray:
        """Integral along the first axis over the chord of the support up to ``z_1`` (exact: the chord is quartic)."""
        z = np.atleast_2d(z)
        rest = np.sum((z[:, 1:] - self.center[1:]) ** 2, axis=1)
        half = np.sqrt(np.clip(self.radius ** 2 - rest, 0, None))
        start = self.center[0] - half
        stop = np.clip(z[:, 0], start, self.center[0] + half)
        nodes, weights = gauss_legendre(CHORD_ORDER)
        t = start[:, None] + (stop - start)[:, None] * nodes[None, :]
        points = np.repeat(z[:, None, :], nodes.size, axis=1)
        points[:, :, 0] = t
        values = self(points.reshape(-1, z.shape[1])).reshape(t.shape)
        return (stop - start) * (values @ weights)

    def to_dict(self) -> dict:
        return {'kind': 'radial-bump', 'center': self.center, 'radius': self.radius}


Density = Union[PolynomialDensity, RadialBumpDensity]


@frozen
class ChangeOfVariables:
    lhs: float
    rhs: float
    method: str
    tolerance: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def within_tolerance(self) -> bool:
        return self.residual <= self.tolerance

    def to_dict(self) -> dict:
        return {
            'lhs': self.lhs,
            'rhs': self.rhs,
            'residual': self.residual,
            'method': self.method,
            'tolerance': self.tolerance,
            'within_tolerance': self.within_tolerance,
        }


def pullback_integral(pmap: PLMap, f: Density) -> float:
    """``int f(y(x)) det(grad y(x)) dx`` with degree-4 rules on every simplex."""
    mesh = pmap.mesh
    values = integrate(mesh.simplex_points, mesh.volumes, f, carry=pmap.image_points)
    return float(values @ pmap.determinants)


def _facet_area_vectors(points: np.ndarray) -> np.ndarray:
    if points.shape[1] == 2:
        edge = points[:, 1] - points[:, 0]
        return np.stack([edge[:, 1], -edge[:, 0]], axis=1)
    return 0.5 * np.cross(points[:, 1] - points[:, 0], points[:, 2] - points[:, 0])


def boundary_flux(facets: np.ndarray, f: Density, refinements: int = 0) -> float:
    """
    ``sum_F n_F,1 * mean_F(antiderivative)`` over oriented facets: the integral of ``f`` weighted by the
    winding number (2D) or the solid-angle degree (3D) of the facet cycle.
    """
    normals = _facet_area_vectors(facets)[:, 0]
    d = facets.shape[2]
    if d == 2:
        nodes, weights = gauss_legendre(SEGMENT_ORDER)
        points = facets[:, :1] + nodes[None, :, None] * (facets[:, 1:] - facets[:, :1])
        means = f.antiderivative(points.reshape(-1, d)).reshape(points.shape[:2]) @ weights
        return float(normals @ means)
    leaves = facets
    for _ in range(refinements):
        leaves = refine(leaves)
    normals = _facet_area_vectors(leaves)[:, 0]
    points, weights = quadrature_points(leaves)
    means = f.antiderivative(points.reshape(-1, d)).reshape(points.shape[:2]) @ weights
    return float(normals @ means)


def regions_integral(pmap: PLMap, f: Density, resolution: Optional[int] = None) -> tuple[float, float]:
    """Cell-centre sum of ``f * deg`` over the labelled degree regions, and the cell size."""
    report = degree_field(pmap, None, resolution)
    grid = report.grid
    labels = report.region_grid.labels
    lookup = np.zeros(int(labels.max()) + 1)
    for region in report.regions:
        lookup[region.label] = region.degree
    weight = lookup[np.clip(labels, 0, None)] * (labels > 0)
    cells = np.argwhere(weight != 0)
    if cells.size == 0:
        return 0.0, grid.h
    values = f(grid.centers(cells)) * weight[tuple(cells.T)]
    return float(values.sum()) * grid.h ** grid.dim, grid.h


def exact_degree(dim: int, method: str = FLUX) -> int:
    """Highest polynomial density degree both sides of the check integrate exactly."""
    if method != FLUX:
        return QUADRATURE_ORDER
    # the flux integrates an antiderivative, one degree above f
    flux = 2 * SEGMENT_ORDER - 2 if dim == 2 else QUADRATURE_ORDER - 1
    return min(QUADRATURE_ORDER, flux)


def change_of_variables_check(pmap: PLMap, A: Optional[SimplicialMesh] = None, f: Optional[Density] = None,
                              method: str = FLUX, resolution: Optional[int] = None) -> ChangeOfVariables:
    """
    Compare ``int_A f(y) det(grad y) dx`` with ``int f(z) deg(y; A; z) dz``.

    ``flux``: the right side as the flux of an antiderivative of ``f`` through the oriented boundary image,
    exact for polynomial ``f`` up to ``exact_degree``: 4 in 2D, 3 in 3D. ``regions``: cell-centre quadrature
    over the degree regions, accurate to the grid scale.
    """
    local = pmap.restrict(A)
    f = PolynomialDensity.constant(local.dim) if f is None else f
    if f.dim != local.dim:
        raise MalformedInput('density', f'dimension {f.dim} does not match the map dimension {local.dim}')
    exact = exact_degree(local.dim, method)
    if isinstance(f, PolynomialDensity) and f.degree > exact:
        logger.warning(f'Density of degree {f.degree} exceeds the exact quadrature degree {exact}')
    lhs = pullback_integral(local, f)
    if method == FLUX:
        refinements = FACET_REFINEMENTS['polynomial' if isinstance(f, PolynomialDensity) else 'bump']
        rhs = boundary_flux(local.boundary_image_points, f, refinements)
        tolerance = FLUX_TOLERANCE * (abs(lhs) + 1)
        if isinstance(f, RadialBumpDensity):
            tolerance = max(tolerance, 1e-6 * f.radius ** local.dim)
    elif method == REGIONS:
        rhs, h = regions_integral(local, f, resolution)
        facets = local.boundary_image_points
        boundary_size = float(np.abs(_facet_area_vectors(facets)).sum()) if facets.size else 0.0
        sup = float(np.abs(f(local.images)).max()) if isinstance(f, PolynomialDensity) else 1.0
        tolerance = 2 * math.sqrt(local.dim) * h * boundary_size * max(sup, 1.0) * max(1, _max_abs_degree(local))
    else:
        raise MalformedInput('method', f'unknown change-of-variables method {method!r}')
    return ChangeOfVariables(lhs=lhs, rhs=rhs, method=method, tolerance=tolerance)


def _max_abs_degree(pmap: PLMap) -> int:
    return max(abs(r.degree) for r in degree_field(pmap).regions)
