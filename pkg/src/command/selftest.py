"""
The fixture corpus, the implication ledger, the sign of the degree and the degree oracles in one run.
"""
from __future__ import annotations
from typing_extensions import Final

import argparse

from .. import log
from ..conditions import cross_equivalences, verify_sigma_theorem
from ..degree import degree_boundary, degree_regular_sum
from ..errors_collection import QueryErrors, HypothesisViolated
from ..fixtures import PUBLISHED, fixture_corpus, random_rng, random_mesh_2d, random_mesh_3d, random_map, sample_values
from ..verdict import ConditionVerdict, HOLDS, FAILS
from .utils import command_gatekeeper, RunManifest, emit_report

logger = log.getLogger('plinv.command')

SELFTEST: Final = 'Selftest'
ORACLE_MAPS: Final = {False: (40, 10), True: (10, 3)}  # quick -> (2D maps, 3D maps)
ORACLE_VALUES: Final = 8
ORACLE_STREAM: Final = 7


def fixture_section(corpus, seed: int, resolution) -> dict:
    fixtures = []
    passed = total = published_passed = published_total = 0
    for fixture in corpus:
        results = fixture.check(seed=seed, grid_resolution=resolution)
        ok = sum(r.passed for r in results)
        published = [r for r in results if r.expectation.source == PUBLISHED]
        passed += ok
        total += len(results)
        published_passed += sum(r.passed for r in published)
        published_total += len(published)
        for r in results:
            if not r.passed:
                logger.error(f'{fixture.name}: {r.expectation.kind} {r.expectation.query} expected '
                             f'{r.expectation.expected}, observed {r.observed}')
        fixtures.append({'fixture': fixture.name, 'passed': ok, 'total': len(results), 'results': results})
    return {
        'fixtures': fixtures,
        'passed': passed,
        'total': total,
        'published_passed': published_passed,
        'published_total': published_total,
    }


def sigma_section(corpus, resolution) -> dict:
    records = []
    for fixture in corpus:
        if not (fixture.pmap.determinants >= 0).all():
            continue
        try:
            report = verify_sigma_theorem(fixture.pmap, resolution=resolution)
        except HypothesisViolated as e:
            records.append({'fixture': fixture.name, 'hypothesis': None, 'observed': e.observed,
                            'degrees': list(e.degrees), 'holds': None})
            continue
        records.append(dict(report.to_dict(), fixture=fixture.name))
    mixed = [r['fixture'] for r in records
             if r['hypothesis'] is None and min(r['degrees'], default=0) < 0 < max(r['degrees'], default=0)]
    return {
        'records': records,
        'violations': [r['fixture'] for r in records if r['holds'] is False],
        'mixed_without_hypothesis': mixed,
    }


def oracle_section(seed: int, quick: bool) -> dict:
    """Boundary and regular-sum degrees on seeded random maps must agree exactly."""
    count_2d, count_3d = ORACLE_MAPS[quick]
    compared = skipped = 0
    mismatches = []
    for i in range(count_2d + count_3d):
        rng = random_rng(seed, ORACLE_STREAM * 1000 + i)
        mesh = random_mesh_2d(rng) if i < count_2d else random_mesh_3d(rng)
        pmap = random_map(mesh, rng, reflect=bool(rng.random() < 0.5))
        for z in sample_values(pmap, rng, ORACLE_VALUES):
            try:
                left, right = degree_boundary(pmap, None, z), degree_regular_sum(pmap, None, z)
            except QueryErrors:
                skipped += 1
                continue
            compared += 1
            if left != right:
                mismatches.append({'map': i, 'value': z, 'boundary': left, 'regular_sum': right})
                logger.error(f'Degree oracles disagree on random map {i} at {z}: {left} != {right}')
    return {'compared': compared, 'skipped': skipped, 'mismatches': mismatches}


@command_gatekeeper(strict_capable=True)
def cmd_selftest(args: argparse.Namespace, manifest: RunManifest):
    corpus = fixture_corpus(quick=args.quick)
    logger.info(f'Self test on {len(corpus)} fixtures (seed {args.seed}{", quick" if args.quick else ""})')
    fixtures = fixture_section(corpus, args.seed, args.resolution)
    ledger = cross_equivalences(corpus, seed=args.seed, resolution=args.resolution)
    sigma = sigma_section(corpus, args.resolution)
    oracles = oracle_section(args.seed, args.quick)

    ok = (fixtures['passed'] == fixtures['total'] and not ledger.contradictions
          and not sigma['violations'] and not oracles['mismatches'])
    summary = {
        'expectations': f'{fixtures["passed"]}/{fixtures["total"]}',
        'published_expectations': f'{fixtures["published_passed"]}/{fixtures["published_total"]}',
        'ledger_contradictions': len(ledger.contradictions),
        'ledger_undecided': len(ledger.undecided),
        'sigma_violations': len(sigma['violations']),
        'oracle_mismatches': len(oracles['mismatches']),
    }
    logger.info('Self test ' + ('passed' if ok else 'FAILED') + ': '
                + ', '.join(f'{k} {v}' for k, v in summary.items()))
    emit_report(args, manifest, {
        'summary': summary,
        'fixtures': fixtures,
        'ledger': ledger,
        'sigma': sigma,
        'oracles': oracles,
    })
    return [ConditionVerdict(SELFTEST, HOLDS if ok else FAILS, summary)]


def add_parsers(subparsers, common: argparse.ArgumentParser):
    parser = subparsers.add_parser('selftest', parents=[common],
                                   help='fixture expectations, implication ledger and degree oracles')
    parser.add_argument('--quick', action='store_true', help='lower fixture resolutions and fewer random maps')
    parser.add_argument('--strict', action='store_true', help='exit with status 1 if anything fails')
    parser.set_defaults(handler=cmd_selftest)
