from __future__ import annotations

import numpy as np
import pytest

from plinv.conditions import (
    check_DEG1, check_DEG1_loc, check_INV, check_CNC, check_injective_ae, coverage_counts, exact_image_area,
    boundary_injectivity, check_AIB, check_AIB_loc, check_AI, PolynomialDensity, RadialBumpDensity,
    change_of_variables_check, pullback_integral, verify_sigma_theorem, run_checks, ledger_entry,
)
from plinv.conditions.densities import REGIONS, exact_degree
from plinv.conditions.ledger import TWO_COMPONENT, HOMEOMORPHIC_APPROXIMANT, CONTRADICTION
from plinv.errors_collection import HypothesisViolated, MalformedInput
from plinv.fixtures import (
    fixture_identity_square, fixture_reflection_square, fixture_pinch, fixture_contact, fixture_wrap,
    random_rng, random_mesh_2d, random_map,
)
from plinv.fixtures.meshes import grid_mesh_2d
from plinv.degree import PLMap
from plinv.mesh import inner_covering
from plinv.verdict import HOLDS, FAILS, CNC, DEG1, AIB, wilson_interval


@pytest.fixture(scope='module')
def wrap():
    return fixture_wrap(32).pmap


@pytest.fixture(scope='module')
def contact():
    return fixture_contact(10).pmap


@pytest.fixture(scope='module')
def reflection():
    return fixture_reflection_square(8).pmap


class TestDegreeConditions:
    def test_deg1(self, identity_square, wrap):
        assert check_DEG1(identity_square).holds
        verdict = check_DEG1(wrap, None, 128)
        assert verdict.fails
        assert verdict.evidence['degree'] == 2

    def test_deg1_loc(self, identity_square):
        covering = inner_covering(identity_square.mesh, 3)
        verdict = check_DEG1_loc(identity_square, covering)
        assert verdict.holds
        assert verdict.evidence['max_degrees'] == [1, 1, 1]
        assert verdict.resolution['levels'] == 3

    def test_inv_identity(self):
        verdict = check_INV(fixture_identity_square(16).pmap, seed=5)
        assert verdict.holds
        assert verdict.evidence['balls_tested'] > 0
        assert verdict.resolution['seed'] == 5


class TestMeasure:
    def test_coverage_counts(self, identity_square, wrap):
        points = np.array([(0.3712, 0.4137), (1.5, 0.5), (0.8123, 0.1234)])
        assert coverage_counts(identity_square, points).tolist() == [1, 0, 1]
        assert coverage_counts(wrap, np.array([(0.0123, 1.6371)])).tolist() == [2]

    def test_exact_image_area(self, identity_square):
        assert exact_image_area(identity_square) == pytest.approx(1.0)

    def test_cnc_identity(self, identity_square):
        verdict = check_CNC(identity_square, samples=20_000, seed=1)
        assert verdict.holds
        assert verdict.evidence['method'] == 'exact-union'
        assert verdict.evidence['lhs'] == pytest.approx(1.0)
        low, high = verdict.evidence['monte_carlo']['interval']
        assert low <= 1.0 <= high

    def test_cnc_double_cover(self, wrap):
        verdict = check_CNC(wrap, samples=20_000)
        assert verdict.fails
        assert verdict.evidence['slack'] < 0
        assert verdict.evidence['witness']['preimage_count'] >= 2

    def test_cnc_3d_is_sampled(self, identity_cube):
        verdict = check_CNC(identity_cube, samples=20_000)
        assert verdict.evidence['method'] == 'monte-carlo'
        assert verdict.verdict != FAILS
        assert check_CNC(identity_cube, samples=0).inconclusive

    def test_injective_ae(self, identity_square, wrap):
        assert check_injective_ae(identity_square, samples=5_000).holds
        verdict = check_injective_ae(wrap, samples=5_000)
        assert verdict.fails
        assert verdict.evidence['witness']['preimage_count'] == 2

    def test_wilson_interval(self):
        low, high = wilson_interval(0, 100)
        assert low == 0.0
        assert 0 < high < 0.1
        assert wilson_interval(0, 0) == (0.0, 1.0)


class TestBoundary:
    def test_injective_boundary(self, identity_square):
        test = boundary_injectivity(identity_square.mesh, identity_square.images, identity_square.tau_geom)
        assert test.injective
        assert test.violation_count == 0
        assert test.pairs_tested > 0

    def test_glued_boundary_vertices(self, square_mesh):
        x = square_mesh.vertices
        images = x.copy()
        left = np.flatnonzero(np.all(np.isclose(x, (0.0, 0.5)), axis=1))
        right = np.flatnonzero(np.all(np.isclose(x, (1.0, 0.5)), axis=1))
        images[right] = images[left]
        test = boundary_injectivity(square_mesh, images, 1e-9)
        assert not test.injective
        assert any(v['kind'] == 'intersection' for v in test.violations)

    def test_aib_by_trace(self, identity_square):
        verdict, cert = check_AIB(identity_square)
        assert verdict.holds
        assert verdict.evidence['method'] == 'trace'
        assert cert.sup_distances == (0.0,)

    def test_aib_push_off_releases_a_contact(self, contact):
        verdict, cert = check_AIB(contact)
        assert verdict.holds
        assert cert.method == 'push-off'
        assert cert.is_decreasing
        assert len(cert.approximants) == verdict.resolution['accepted_needed']

    def test_aib_robust_crossing(self, wrap):
        verdict, cert = check_AIB(wrap)
        assert verdict.fails
        assert cert is None
        assert verdict.evidence['method'] == 'robust-crossing'

    def test_aib_loc(self, identity_square):
        covering = inner_covering(identity_square.mesh, 2)
        assert check_AIB_loc(identity_square, covering).holds

    def test_ai(self, identity_square, reflection, wrap):
        assert check_AI(identity_square).evidence['orientation'] == 1
        verdict = check_AI(reflection)
        assert verdict.holds
        assert verdict.evidence['orientation'] == -1
        assert check_AI(wrap).evidence['reason'] == 'boundary not injective'

    def test_ai_degenerate_simplex(self):
        verdict = check_AI(fixture_pinch(16).pmap)
        assert verdict.fails
        assert verdict.evidence['reason'] == 'degenerate simplex'


class TestChangeOfVariables:
    cubic = PolynomialDensity({(1, 1): 1.0, (2, 0): 0.5, (0, 3): -2.0, (0, 0): 0.25})

    def test_polynomial_density(self):
        assert self.cubic.degree == 3
        assert self.cubic.dim == 2
        assert self.cubic(np.array([(1.0, 2.0)]))[0] == pytest.approx(2.0 + 0.5 - 16.0 + 0.25)
        with pytest.raises(MalformedInput):
            PolynomialDensity({})

    def test_pullback_of_the_identity(self, identity_square):
        assert pullback_integral(identity_square, PolynomialDensity.constant(2)) == pytest.approx(1.0)
        assert pullback_integral(identity_square, PolynomialDensity({(1, 0): 1.0})) == pytest.approx(0.5)

    def test_flux_identity(self, identity_square, wrap):
        assert change_of_variables_check(identity_square, f=self.cubic).within_tolerance
        check = change_of_variables_check(wrap, f=self.cubic)
        assert check.within_tolerance
        assert check.rhs == pytest.approx(check.lhs)

    @pytest.mark.parametrize('seed', (1, 2, 3))
    def test_flux_on_random_maps(self, seed):
        rng = random_rng(seed)
        pmap = random_map(random_mesh_2d(rng), rng, reflect=seed == 2)
        assert change_of_variables_check(pmap, f=self.cubic).within_tolerance

    def test_exact_degree_follows_the_facet_rule(self):
        assert exact_degree(2) == 4
        assert exact_degree(3) == 3
        assert exact_degree(3, REGIONS) == 4

    def test_flux_of_a_cubic_on_the_cube(self, identity_cube):
        cubic = PolynomialDensity({(1, 1, 1): 1.0, (0, 0, 3): -2.0, (2, 0, 0): 0.5})
        check = change_of_variables_check(identity_cube, f=cubic)
        assert check.lhs == pytest.approx(1 / 8 - 1 / 2 + 1 / 6)
        assert check.within_tolerance

    def test_regions_with_a_bump(self, identity_square):
        bump = RadialBumpDensity((0.5, 0.5), 0.3)
        assert bump(np.array([(0.5, 0.5), (0.9, 0.9)])).tolist() == [1.0, 0.0]
        check = change_of_variables_check(identity_square, f=bump, method=REGIONS, resolution=128)
        assert check.within_tolerance
        assert check.lhs == pytest.approx(np.pi * 0.3 ** 2 / 3, rel=1e-2)

    def test_dimension_mismatch(self, identity_square):
        with pytest.raises(MalformedInput):
            change_of_variables_check(identity_square, f=PolynomialDensity.constant(3))
        with pytest.raises(MalformedInput):
            change_of_variables_check(identity_square, method='nope')


class TestLedger:
    def test_sigma_under_two_components(self, identity_square):
        report = verify_sigma_theorem(identity_square)
        assert report.holds
        assert report.sigma == 1
        assert report.hypothesis == TWO_COMPONENT

    def test_sigma_from_a_homeomorphism(self, reflection):
        report = verify_sigma_theorem(reflection, ai=check_AI(reflection))
        assert report.sigma == -1
        assert report.hypothesis == HOMEOMORPHIC_APPROXIMANT

    def test_sigma_needs_a_hypothesis(self):
        mesh = grid_mesh_2d((0.0, 0.0), (3.0, 3.0), 3, 3,
                            keep=lambda c: ~((np.abs(c[:, 0] - 1.5) < 1) & (np.abs(c[:, 1] - 1.5) < 1)))
        with pytest.raises(HypothesisViolated) as e:
            verify_sigma_theorem(PLMap.identity(mesh))
        assert e.value.observed == 3

    def test_checks_on_the_identity(self, identity_square):
        verdicts = run_checks(identity_square, seed=0, cnc_samples=5_000)
        for condition in (CNC, DEG1, AIB):
            assert verdicts[condition].verdict == HOLDS
        entry = ledger_entry('identity', identity_square, verdicts)
        assert not entry.contradictions
        assert all(row['status'] != CONTRADICTION for row in entry.to_dict()['rows'])
