from __future__ import annotations
from typing import Callable, Optional
from typing_extensions import Final

from functools import partial

from ..errors_collection import MalformedInput
from .base import (
    Fixture, Expectation, ExpectationResult, evaluate, PUBLISHED, DERIVED, DEGREE, PREIMAGE_COUNT, VERDICT,
    COMPLEMENT_COUNT, BOUNDARY_INJECTIVE, CNC_RATIO, DEGREE_ALGORITHMS,
)
from .published import (
    fixture_angle_doubling, fixture_annulus_translation, fixture_cone_flip, fixture_stacked_holes,
    harmonic_extension,
)
from .constructed import (
    fixture_identity_square, fixture_reflection_square, fixture_identity_cube, fixture_pinch, fixture_contact,
    fixture_wrap, fixture_collapsed_patch,
)
from .generators import random_rng, random_mesh_2d, random_mesh_3d, random_map, random_folded_map, sample_values

FIXTURES: Final[dict[str, Callable[..., Fixture]]] = {
    'angle-doubling': fixture_angle_doubling,
    'annulus': fixture_annulus_translation,
    'cone-flip': fixture_cone_flip,
    'cone-flip-intermediate': partial(fixture_cone_flip, flip=False),
    'stacked': fixture_stacked_holes,
    'identity-square': fixture_identity_square,
    'reflection-square': fixture_reflection_square,
    'identity-cube': fixture_identity_cube,
    'pinch': fixture_pinch,
    'contact': fixture_contact,
    'wrap': fixture_wrap,
    'collapsed-patch': fixture_collapsed_patch,
}

PUBLISHED_FIXTURES: Final = ('angle-doubling', 'annulus', 'cone-flip', 'cone-flip-intermediate', 'stacked')


def get_fixture(name: str, n: Optional[int] = None, **params) -> Fixture:
    try:
        builder = FIXTURES[name]
    except KeyError:
        raise MalformedInput('fixture name', f'{name!r} is not one of {", ".join(FIXTURES)}') from None
    if n is not None:
        params['n'] = n
    return builder(**params)


def fixture_corpus(quick: bool = False) -> list[Fixture]:
    """
    Every two-dimensional fixture at its default resolution, plus stacked holes for two and three holes.
    ``quick`` halves the resolutions of the published ones.
    """
    scale = {'n': 32} if quick else {}
    corpus = [
        fixture_angle_doubling(**scale),
        fixture_annulus_translation(**scale),
        fixture_cone_flip(**scale),
        fixture_cone_flip(flip=False, **scale),
        fixture_stacked_holes(1, -1, **scale),
        fixture_stacked_holes(2, 2, **scale),
        fixture_stacked_holes(3, 3, **scale),
    ]
    corpus += [FIXTURES[name]() for name in ('identity-square', 'reflection-square', 'pinch', 'contact', 'wrap',
                                              'collapsed-patch')]
    return corpus
