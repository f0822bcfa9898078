"""
Sign of the degree under boundary hypotheses and the ledger of implications between conditions.
"""
from __future__ import annotations
from typing import Iterable, Optional
from typing_extensions import Final

from attrs import frozen

from .. import log
from ..aio_helper import gather_in_pool
from ..degree import PLMap, degree_field
from ..errors_collection import HypothesisViolated, EmptyLevel, BallTooSmall
from ..mesh.complement import complement_components
from ..mesh.covering import inner_covering
from ..verdict import (
    ConditionVerdict, INCONCLUSIVE, CNC, INV, DEG1, DEG1_LOC, AIB, AIB_LOC,
)
from .boundary import AIBCertificate, check_AIB, check_AIB_loc
from .degree_conditions import check_DEG1, check_DEG1_loc, check_INV
from .measure import check_CNC

logger = log.getLogger('plinv.checker')

LEDGER_LEVELS: Final = 3
LEDGER_CNC_SAMPLES: Final = 200_000

TWO_COMPONENT: Final = 'two-component'
HOMEOMORPHIC_APPROXIMANT: Final = 'AI'

# row, left, right, relation, needs a two-component boundary complement
LEDGER_ROWS: Final = (
    ('a', AIB, DEG1, 'implies', True),
    ('b', CNC, DEG1, 'iff', False),
    ('c', DEG1_LOC, DEG1, 'iff', False),
    ('d', AIB_LOC, DEG1_LOC, 'implies', False),
    ('g', INV, DEG1_LOC, 'iff', False),
)

AGREE: Final = 'agree'
VACUOUS: Final = 'vacuous'
CONTRADICTION: Final = 'contradiction'
UNDECIDED: Final = 'inconclusive'
NOT_APPLICABLE: Final = 'not-applicable'


# ----- sign of the degree -----
@frozen
class SigmaReport:
    sigma: object
    holds: bool
    hypothesis: str
    complement_count: int
    degrees: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            'sigma': self.sigma,
            'holds': self.holds,
            'hypothesis': self.hypothesis,
            'complement_count': self.complement_count,
            'degrees': list(self.degrees),
        }


def verify_sigma_theorem(pmap: PLMap, cert: Optional[AIBCertificate] = None, ai: Optional[ConditionVerdict] = None,
                         resolution: Optional[int] = None) -> SigmaReport:
    """
    All nonzero degrees share one sign ``sigma`` in ``{+1, -1}``.

    The hypothesis is a two-component boundary complement together with an AIB certificate (computed when
    not given), or a Holds verdict of :func:`~.boundary.check_AI`, which needs no complement hypothesis.

    :raise HypothesisViolated: neither hypothesis holds; the observed degrees are attached
    """
    complement = complement_components(pmap.mesh, resolution)
    report = degree_field(pmap, None, resolution)
    degrees = tuple(sorted({r.degree for r in report.regions}))
    if ai is not None and ai.holds:
        hypothesis = HOMEOMORPHIC_APPROXIMANT
    elif complement.is_two_component:
        hypothesis = TWO_COMPONENT
        if cert is None:
            verdict, cert = check_AIB(pmap)
            if cert is None:
                raise HypothesisViolated('approximately invertible on the boundary', verdict.verdict, degrees)
    else:
        raise HypothesisViolated('exactly two complement components', complement.component_count, degrees)

    sigma = report.sigma
    holds = sigma in (1, -1)
    if not holds:
        logger.error(f'Degree sign not constant under the {hypothesis} hypothesis: degrees {degrees}')
    return SigmaReport(sigma=sigma, holds=holds, hypothesis=hypothesis,
                       complement_count=complement.component_count, degrees=degrees)


# ----- ledger -----
def _undecided(condition: str, reason: str) -> ConditionVerdict:
    return ConditionVerdict(condition, INCONCLUSIVE, {'reason': reason})


def run_checks(pmap: PLMap, seed: int = 0, levels: int = LEDGER_LEVELS, cnc_samples: int = LEDGER_CNC_SAMPLES,
               resolution: Optional[int] = None) -> dict[str, ConditionVerdict]:
    """Every checker of the ledger on one map, run concurrently."""
    try:
        covering = inner_covering(pmap.mesh, levels, check_complement=False, resolution=resolution)
    except EmptyLevel as e:
        logger.warning(f'No covering for the ledger: {e}')
        covering = None

    def aib() -> ConditionVerdict:
        return check_AIB(pmap)[0]

    def inv() -> ConditionVerdict:
        try:
            return check_INV(pmap, seed=seed)
        except BallTooSmall as e:
            return _undecided(INV, str(e))

    calls = [
        (check_CNC, (pmap, cnc_samples, seed), {}),
        (check_DEG1, (pmap, None, resolution), {}),
        (inv, (), {}),
        (aib, (), {}),
    ]
    if covering is not None:
        calls += [(check_DEG1_loc, (pmap, covering, resolution), {}), (check_AIB_loc, (pmap, covering), {})]
    verdicts = {v.condition: v for v in gather_in_pool(calls)}
    for condition in (DEG1_LOC, AIB_LOC):
        verdicts.setdefault(condition, _undecided(condition, 'the covering has an empty level'))
    return verdicts


def _row_status(left: ConditionVerdict, right: ConditionVerdict, relation: str) -> str:
    if relation == 'iff':
        if left.inconclusive or right.inconclusive:
            return UNDECIDED
        return AGREE if left.verdict == right.verdict else CONTRADICTION
    if left.fails:
        return VACUOUS
    if left.inconclusive:
        return UNDECIDED
    if right.fails:
        return CONTRADICTION
    return UNDECIDED if right.inconclusive else AGREE


@frozen
class LedgerEntry:
    fixture: str
    verdicts: dict
    rows: tuple[dict, ...]

    @property
    def contradictions(self) -> tuple[dict, ...]:
        return tuple(r for r in self.rows if r['status'] == CONTRADICTION)

    def to_dict(self) -> dict:
        return {
            'fixture': self.fixture,
            'verdicts': {k: v.to_dict() for k, v in sorted(self.verdicts.items())},
            'rows': list(self.rows),
        }


@frozen
class LedgerReport:
    entries: tuple[LedgerEntry, ...]

    @property
    def contradictions(self) -> list[dict]:
        return [dict(row, fixture=e.fixture) for e in self.entries for row in e.contradictions]

    @property
    def undecided(self) -> list[dict]:
        return [dict(row, fixture=e.fixture) for e in self.entries for row in e.rows if row['status'] == UNDECIDED]

    def to_dict(self) -> dict:
        return {
            'entries': [e.to_dict() for e in self.entries],
            'contradictions': self.contradictions,
        }


def ledger_entry(name: str, pmap: PLMap, verdicts: dict[str, ConditionVerdict],
                 resolution: Optional[int] = None) -> LedgerEntry:
    nonnegative = bool((pmap.determinants >= 0).all())
    two_component = None
    rows = []
    for row, left, right, relation, needs_two in LEDGER_ROWS:
        record = {'row': row, 'left': left, 'right': right, 'relation': relation,
                  'left_verdict': verdicts[left].verdict, 'right_verdict': verdicts[right].verdict}
        if needs_two and two_component is None:
            two_component = complement_components(pmap.mesh, resolution).is_two_component
        if not nonnegative or (needs_two and not two_component):
            record['status'] = NOT_APPLICABLE
        else:
            record['status'] = _row_status(verdicts[left], verdicts[right], relation)
        if record['status'] == CONTRADICTION:
            logger.error(f'Ledger row ({row}) contradicted on {name}: {left} {record["left_verdict"]}, '
                         f'{right} {record["right_verdict"]}')
        rows.append(record)
    return LedgerEntry(fixture=name, verdicts=verdicts, rows=tuple(rows))


def cross_equivalences(fixtures: Iterable, seed: int = 0, levels: int = LEDGER_LEVELS,
                       cnc_samples: int = LEDGER_CNC_SAMPLES, resolution: Optional[int] = None) -> LedgerReport:
    """
    Run every checker on each fixture and compare the verdicts along the ledger rows, asserting only the
    proven directions. Rows need nonnegative determinants; row (a) also needs a two-component complement.

    :param fixtures: objects with ``name`` and ``pmap``
    """
    entries = []
    for fixture in fixtures:
        verdicts = run_checks(fixture.pmap, seed, levels, cnc_samples, resolution)
        entries.append(ledger_entry(fixture.name, fixture.pmap, verdicts, resolution))
    return LedgerReport(entries=tuple(entries))
