"""
Fixtures: meshed maps with expected values, and the evaluation of those expectations.
"""
from __future__ import annotations
from typing import Any, Optional, Sequence
from typing_extensions import Final

import numpy as np
from attrs import frozen, field

from .. import log
from ..degree import PLMap, degree_boundary, degree_regular_sum, degree_integral, preimages
from ..errors_collection import PlinvError, QueryErrors
from ..conditions import (
    check_CNC, check_DEG1, check_DEG1_loc, check_INV, check_AIB, check_AI, boundary_injectivity,
)
from ..mesh.complement import complement_components
from ..mesh.covering import inner_covering
from ..mesh.simplicial import SimplicialMesh
from ..verdict import CNC, DEG1, DEG1_LOC, INV, AIB, AI

logger = log.getLogger('plinv.fixtures')

PUBLISHED: Final = 'published'
DERIVED: Final = 'derived'

DEGREE: Final = 'degree'
PREIMAGE_COUNT: Final = 'preimage-count'
VERDICT: Final = 'verdict'
COMPLEMENT_COUNT: Final = 'complement-count'
BOUNDARY_INJECTIVE: Final = 'boundary-injective'
CNC_RATIO: Final = 'cnc-ratio'
KINDS: Final = (DEGREE, PREIMAGE_COUNT, VERDICT, COMPLEMENT_COUNT, BOUNDARY_INJECTIVE, CNC_RATIO)

INTEGRAL_TOLERANCE: Final = 1e-2
DEGREE_ALGORITHMS: Final = ('boundary', 'regular-sum', 'integral')


def _query(value: Any) -> Any:
    if value is None or isinstance(value, str):
        return value
    return tuple(float(c) for c in np.asarray(value, dtype=float).reshape(-1))


@frozen
class Expectation:
    """
    One expected value. ``query`` is a point for degree and preimage queries and a condition name for
    verdicts; ``source`` says whether the value is published or derived by an oracle.
    """
    kind: str = field()
    query: Any = field(converter=_query)
    expected: Any
    source: str = field()
    note: str = ''
    tolerance: float = 0.0

    @kind.validator
    def _check_kind(self, _attribute, value):
        if value not in KINDS:
            raise ValueError(f'unknown expectation kind {value!r}')

    @source.validator
    def _check_source(self, _attribute, value):
        if value not in (PUBLISHED, DERIVED):
            raise ValueError(f'expectation source must be {PUBLISHED} or {DERIVED}, got {value!r}')

    def to_dict(self) -> dict:
        return {
            'kind': self.kind,
            'query': list(self.query) if isinstance(self.query, tuple) else self.query,
            'expected': self.expected,
            'source': self.source,
            'note': self.note,
            'tolerance': self.tolerance,
        }


@frozen
class ExpectationResult:
    expectation: Expectation
    passed: bool
    observed: dict

    def to_dict(self) -> dict:
        return {'expectation': self.expectation.to_dict(), 'passed': self.passed, 'observed': self.observed}


@frozen(eq=False)
class Fixture:
    name: str
    pmap: PLMap
    expectations: tuple[Expectation, ...] = field(converter=tuple)
    resolution: int
    parameters: dict = field(factory=dict)

    @property
    def mesh(self) -> SimplicialMesh:
        return self.pmap.mesh

    @property
    def published(self) -> tuple[Expectation, ...]:
        return tuple(e for e in self.expectations if e.source == PUBLISHED)

    def check(self, algorithms: Sequence[str] = DEGREE_ALGORITHMS, seed: int = 0,
              grid_resolution: Optional[int] = None) -> list[ExpectationResult]:
        return [evaluate(self.pmap, e, algorithms, seed, grid_resolution) for e in self.expectations]

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'resolution': self.resolution,
            'parameters': self.parameters,
            'expectations': [e.to_dict() for e in self.expectations],
        }


# ----- evaluation -----
def _degree(pmap: PLMap, e: Expectation, algorithms: Sequence[str]) -> tuple[bool, dict]:
    z = np.array(e.query)
    observed: dict = {}
    passed = True
    for name in algorithms:
        try:
            if name == 'boundary':
                value = degree_boundary(pmap, None, z)
            elif name == 'regular-sum':
                value = degree_regular_sum(pmap, None, z)
            elif name == 'integral':
                value = degree_integral(pmap, None, z)
            else:
                raise ValueError(f'unknown degree algorithm {name!r}')
        except QueryErrors as err:
            observed[name] = {'error': type(err).__name__, 'message': str(err)}
            passed = False
            continue
        observed[name] = value
        tolerance = max(e.tolerance, INTEGRAL_TOLERANCE) if name == 'integral' else e.tolerance
        passed &= abs(value - e.expected) <= tolerance
    return bool(passed), observed


def _verdict(pmap: PLMap, condition: str, seed: int, grid_resolution: Optional[int]):
    if condition == CNC:
        return check_CNC(pmap, seed=seed)
    if condition == DEG1:
        return check_DEG1(pmap, None, grid_resolution)
    if condition == DEG1_LOC:
        return check_DEG1_loc(pmap, inner_covering(pmap.mesh, 3, check_complement=False), grid_resolution)
    if condition == INV:
        return check_INV(pmap, seed=seed)
    if condition == AIB:
        return check_AIB(pmap)[0]
    if condition == AI:
        return check_AI(pmap, grid_resolution)
    raise ValueError(f'no checker for condition {condition!r}')


def evaluate(pmap: PLMap, e: Expectation, algorithms: Sequence[str] = DEGREE_ALGORITHMS, seed: int = 0,
             grid_resolution: Optional[int] = None) -> ExpectationResult:
    """Compute the observed value of one expectation; errors raised by the checkers count as failures."""
    try:
        if e.kind == DEGREE:
            passed, observed = _degree(pmap, e, algorithms)
        elif e.kind == PREIMAGE_COUNT:
            found = preimages(pmap, np.array(e.query))
            observed = {'count': found.count, 'signed_count': found.signed_count}
            passed = found.count == e.expected
        elif e.kind == VERDICT:
            verdict = _verdict(pmap, e.query, seed, grid_resolution)
            observed = {'verdict': verdict.verdict}
            passed = verdict.verdict == e.expected
        elif e.kind == COMPLEMENT_COUNT:
            count = complement_components(pmap.mesh, grid_resolution).component_count
            observed = {'count': count}
            passed = count == e.expected
        elif e.kind == BOUNDARY_INJECTIVE:
            test = boundary_injectivity(pmap.mesh, pmap.images, pmap.tau_geom)
            observed = {'injective': test.injective, 'violation_count': test.violation_count}
            passed = test.injective == e.expected
        else:
            ratio = check_CNC(pmap, samples=0, seed=seed).evidence.get('ratio')
            observed = {'ratio': ratio}
            passed = ratio is not None and abs(ratio - e.expected) <= e.tolerance
    except PlinvError as err:
        observed, passed = {'error': type(err).__name__, 'message': str(err)}, False
    if not passed:
        logger.warning(f'Expectation {e.kind} {e.query} failed: expected {e.expected}, observed {observed}')
    return ExpectationResult(expectation=e, passed=bool(passed), observed=observed)
