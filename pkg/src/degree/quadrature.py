"""
Simplex quadrature rules and uniform refinement.

Rules are exact for polynomials of total degree 4 and are given in barycentric coordinates with
weights summing to one (multiply by the simplex volume).
"""
from __future__ import annotations
from typing import Callable, Optional
from typing_extensions import Final
from itertools import permutations

import numpy as np

QUADRATURE_ORDER: Final = 4


def _orbit(*coords: float) -> list[tuple[float, ...]]:
    return sorted(set(permutations(coords)))


def _rule(groups: list[tuple[float, tuple[float, ...]]]) -> tuple[np.ndarray, np.ndarray]:
    points, weights = [], []
    for weight, coords in groups:
        for p in _orbit(*coords):
            points.append(p)
            weights.append(weight)
    return np.array(points), np.array(weights)


# Dunavant, 6 points
_TRI_A: Final = 0.445948490915965
_TRI_B: Final = 0.091576213509771
TRIANGLE_RULE: Final = _rule([
    (0.223381589678011, (1 - 2 * _TRI_A, _TRI_A, _TRI_A)),
    (0.109951743655322, (1 - 2 * _TRI_B, _TRI_B, _TRI_B)),
])

# Keast, 11 points (one negative weight)
_TET_A: Final = (1 + np.sqrt(5 / 14)) / 4
_TET_B: Final = (1 - np.sqrt(5 / 14)) / 4
TETRAHEDRON_RULE: Final = _rule([
    (-148 / 1875, (0.25, 0.25, 0.25, 0.25)),
    (343 / 7500, (11 / 14, 1 / 14, 1 / 14, 1 / 14)),
    (56 / 375, (_TET_A, _TET_A, _TET_B, _TET_B)),
])

SIMPLEX_RULES: Final = {2: TRIANGLE_RULE, 3: TETRAHEDRON_RULE}


def quadrature_points(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Quadrature nodes of a stack of simplices.

    :param points: ``(m, d + 1, c)``; ``c`` may exceed ``d`` to carry extra affine fields along
    :return: nodes ``(m, q, c)`` and weights ``(q,)``
    """
    d = points.shape[1] - 1
    bary, weights = SIMPLEX_RULES[d]
    return np.einsum('qi,mic->mqc', bary, points), weights


def integrate(points: np.ndarray, volumes: np.ndarray, func: Callable[[np.ndarray], np.ndarray],
              carry: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Per-simplex integrals of ``func`` evaluated at the affinely carried coordinates.

    :param points: domain simplices ``(m, d + 1, d)``
    :param volumes: unsigned simplex volumes ``(m,)``
    :param func: vectorised integrand taking ``(k, c)`` points
    :param carry: vertex values ``(m, d + 1, c)`` the integrand is evaluated at (defaults to ``points``)
    """
    carry = points if carry is None else carry
    nodes, weights = quadrature_points(carry)
    m, q, c = nodes.shape
    values = func(nodes.reshape(-1, c)).reshape(m, q)
    return volumes * (values @ weights)


# ----- refinement -----
def _midpoint_children(d: int) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Midpoint pairs and children in terms of the extended vertex list (vertices, then midpoints)."""
    pairs = [(i, j) for i in range(d + 1) for j in range(i + 1, d + 1)]
    mid = {pair: d + 1 + k for k, pair in enumerate(pairs)}
    m = lambda i, j: mid[(min(i, j), max(i, j))]  # noqa: E731
    if d == 2:
        children = [(0, m(0, 1), m(0, 2)), (m(0, 1), 1, m(1, 2)),
                    (m(0, 2), m(1, 2), 2), (m(0, 1), m(1, 2), m(0, 2))]
    else:
        # Bey's subdivision into eight tetrahedra of equal volume
        children = [(0, m(0, 1), m(0, 2), m(0, 3)), (m(0, 1), 1, m(1, 2), m(1, 3)),
                    (m(0, 2), m(1, 2), 2, m(2, 3)), (m(0, 3), m(1, 3), m(2, 3), 3),
                    (m(0, 1), m(0, 2), m(0, 3), m(1, 3)), (m(0, 1), m(0, 2), m(1, 2), m(1, 3)),
                    (m(0, 2), m(0, 3), m(1, 3), m(2, 3)), (m(0, 2), m(1, 2), m(1, 3), m(2, 3))]
    return pairs, np.array(children)


_REFINEMENT: Final = {d: _midpoint_children(d) for d in (2, 3)}


def refine(points: np.ndarray) -> np.ndarray:
    """
    Uniformly refine a stack of simplices ``(m, d + 1, c)`` into ``(m * 2^d, d + 1, c)``.

    Any number of affine coordinates may ride along in the last axis.
    """
    d = points.shape[1] - 1
    pairs, children = _REFINEMENT[d]
    mids = np.stack([(points[:, i] + points[:, j]) / 2 for i, j in pairs], axis=1)
    extended = np.concatenate([points, mids], axis=1)
    return extended[:, children].reshape(-1, d + 1, points.shape[2])


def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[0, 1]``."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return (nodes + 1) / 2, weights / 2
