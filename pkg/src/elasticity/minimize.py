"""
Projected descent of the elastic energy under a global invertibility constraint.
"""
from __future__ import annotations
from typing import Optional, Union
from typing_extensions import Final

import numpy as np
from attrs import define, Factory

from .. import log
from ..degree import PLMap, affine_differentials
from ..errors_collection import InfeasibleInitial, EmptyLevel
from ..conditions.boundary import boundary_injectivity
from ..conditions.degree_conditions import check_DEG1_loc
from ..conditions.measure import EXACT_TOLERANCE, exact_image_area, coverage_counts, sample_stream
from ..mesh.complement import complement_components
from ..mesh.covering import InnerCovering, inner_covering
from ..verdict import DEG1_LOC, wilson_interval
from .energy import EnergyModel, INFINITE, total_energy, energy_gradient

logger = log.getLogger('plinv.elasticity')

ARMIJO: Final = 1e-4
SHRINK: Final = 0.5
GROW: Final = 2.0
ROOT_FRACTION: Final = 0.5
MIN_STEP: Final = 1e-14  # x mesh diagonal, as a displacement
GRADIENT_TOLERANCE: Final = 1e-8
COVERING_LEVELS: Final = 3
CONSTRAINT_RESOLUTION: Final = 128
PENALTY_START: Final = 1.0
PENALTY_GROWTH: Final = 10.0
PENALTY_SAMPLES: Final = 20_000
CONSTRAINT_LOG_LIMIT: Final = 200

# ----- constraints -----


@define
class Deg1Loc:
    """
    Reject trial maps failing ``DEG1_loc`` on a fixed covering.

    With positive determinants a trial whose boundary image is injective on a domain with a two-component
    boundary complement has degree one inside the boundary image and zero outside, and degree on a level is
    at most degree on the domain, so the degree field is only computed when that shortcut does not apply.
    """
    levels: int = COVERING_LEVELS
    resolution: Optional[int] = CONSTRAINT_RESOLUTION
    covering: Optional[InnerCovering] = None
    two_component: Optional[bool] = None
    name: str = DEG1_LOC

    def prepare(self, pmap: PLMap):
        try:
            self.covering = inner_covering(pmap.mesh, self.levels, check_complement=False)
        except EmptyLevel as e:
            raise InfeasibleInitial(f'no {self.levels}-level covering of the domain ({e})')
        self.two_component = complement_components(pmap.mesh, self.resolution).is_two_component

    def penalty(self, pmap: PLMap) -> float:
        return 0.0

    def admits(self, pmap: PLMap) -> tuple[bool, dict]:
        if self.two_component:
            test = boundary_injectivity(pmap.mesh, pmap.images, pmap.tau_geom)
            if test.injective:
                return True, {'path': 'injective-boundary'}
        verdict = check_DEG1_loc(pmap, self.covering, self.resolution)
        return verdict.holds, {'path': 'degree-field', 'verdict': verdict.verdict}

    def escalate(self):
        pass

    def to_dict(self) -> dict:
        return {'name': self.name, 'levels': self.levels, 'resolution': self.resolution}


@define
class CNCPenalty:
    """
    ``mu * max(0, int det - measure(y(domain)))^2`` added to the energy; ``mu`` grows tenfold whenever a
    trial violates the inequality.

    The image measure is exact in 2D and a fixed-seed Monte Carlo estimate (lower Wilson bound) in 3D.
    """
    mu: float = PENALTY_START
    growth: float = PENALTY_GROWTH
    samples: int = PENALTY_SAMPLES
    seed: int = 0
    violations: int = 0
    name: str = 'CNC-penalty'

    def prepare(self, pmap: PLMap):
        pass

    def violation(self, pmap: PLMap) -> float:
        lhs = float(pmap.image_volumes.sum())
        if pmap.dim == 2:
            measure = exact_image_area(pmap)
        else:
            lo, hi = pmap.image_bbox
            points = sample_stream(self.seed, 0xC1C).uniform(lo, hi, size=(self.samples, pmap.dim))
            hits = int(np.count_nonzero(coverage_counts(pmap, points)))
            measure = float(np.prod(hi - lo)) * wilson_interval(hits, self.samples)[1]
        return max(0.0, lhs - measure - EXACT_TOLERANCE * abs(lhs))

    def penalty(self, pmap: PLMap) -> float:
        return self.mu * self.violation(pmap) ** 2

    def admits(self, pmap: PLMap) -> tuple[bool, dict]:
        excess = self.violation(pmap)
        return True, {'path': 'penalty', 'excess': excess, 'mu': self.mu}

    def escalate(self):
        self.violations += 1
        self.mu *= self.growth

    def to_dict(self) -> dict:
        return {'name': self.name, 'mu': self.mu, 'growth': self.growth, 'samples': self.samples,
                'seed': self.seed, 'violations': self.violations}


Constraint = Union[Deg1Loc, CNCPenalty]


def constraint_by_name(name: str, seed: int = 0) -> Constraint:
    key = name.lower().replace('_', '').replace('-', '')
    if key == 'deg1loc':
        return Deg1Loc()
    if key == 'cncpenalty':
        return CNCPenalty(seed=seed)
    raise InfeasibleInitial(f'unknown constraint {name!r}, expected deg1loc or cncpenalty')


# ----- record -----
@define
class MinimizationRecord:
    iterates: list[float] = Factory(list)
    objectives: list[float] = Factory(list)
    final_map: Optional[PLMap] = None
    constraint: Optional[Constraint] = None
    constraint_log: list[dict] = Factory(list)
    certificate: Optional[object] = None
    termination: str = 'budget'
    rejections: dict = Factory(lambda: {'determinant': 0, 'decrease': 0, 'constraint': 0})
    model: Optional[EnergyModel] = None

    @property
    def iterations(self) -> int:
        return max(0, len(self.iterates) - 1)

    @property
    def final_energy(self) -> float:
        return self.iterates[-1] if self.iterates else INFINITE

    def is_monotone(self) -> bool:
        return all(b <= a for a, b in zip(self.iterates, self.iterates[1:]))

    def log_constraint(self, iteration: int, accepted: bool, detail: dict):
        if len(self.constraint_log) < CONSTRAINT_LOG_LIMIT:
            self.constraint_log.append(dict(detail, iteration=iteration, accepted=accepted))

    def to_dict(self) -> dict:
        return {
            'termination': self.termination,
            'iterations': self.iterations,
            'energies': self.iterates,
            'objectives': self.objectives,
            'rejections': self.rejections,
            'constraint': self.constraint.to_dict() if self.constraint is not None else None,
            'constraint_log': self.constraint_log,
            'certificate': self.certificate.to_dict() if self.certificate is not None else None,
            'model': self.model.to_dict() if self.model is not None else None,
        }


# ----- determinant safeguard -----
def _smallest_positive_root(coefficients: np.ndarray) -> float:
    """Smallest positive real root over rows of polynomial coefficients (highest degree first)."""
    best = np.inf
    for row in coefficients:
        nonzero = np.flatnonzero(np.abs(row) > 1e-300)
        if nonzero.size == 0 or nonzero[0] == row.size - 1:
            continue
        roots = np.roots(row[nonzero[0]:])
        real = roots[np.abs(roots.imag) <= 1e-12 * np.maximum(1.0, np.abs(roots.real))].real
        real = real[real > 0]
        if real.size:
            best = min(best, float(real.min()))
    return best


def determinant_step_limit(pmap: PLMap, direction: np.ndarray) -> float:
    """
    Half the first step length ``t`` at which some ``det(F + t G)`` vanishes.

    ``det(F + tG)`` is quadratic (2D) or cubic (3D) in ``t``; the roots are the eigenvalues of the
    companion matrix.
    """
    F, dets, cofs = pmap.gradients, pmap.determinants, pmap.cofactors
    G, det_g, cof_g = affine_differentials(pmap.mesh, direction)
    linear = np.einsum('mij,mij->m', cofs, G)
    if pmap.dim == 2:
        coefficients = np.stack([det_g, linear, dets], axis=1)
    else:
        quadratic = np.einsum('mij,mij->m', cof_g, F)
        coefficients = np.stack([det_g, quadratic, linear, dets], axis=1)
    # no sign change, no positive root
    candidates = coefficients[np.any(coefficients < 0, axis=1)]
    return ROOT_FRACTION * _smallest_positive_root(candidates)


# ----- descent -----
def _check_initial(model: EnergyModel, pmap: PLMap, constraint: Constraint):
    bad = np.flatnonzero(pmap.determinants <= 0)
    if bad.size:
        raise InfeasibleInitial(f'{bad.size} simplices with det <= 0, e.g. {bad[:8].tolist()}')
    if model.box is not None:
        if model.box.dim != pmap.dim:
            raise InfeasibleInitial(f'box dimension {model.box.dim} differs from the map dimension {pmap.dim}')
        outside = np.flatnonzero(~model.box.contains(pmap.images))
        if outside.size:
            raise InfeasibleInitial(f'{outside.size} vertex images outside the box, e.g. {outside[:8].tolist()}')
    constraint.prepare(pmap)
    admitted, detail = constraint.admits(pmap)
    if not admitted:
        raise InfeasibleInitial(f'the initial map violates {constraint.name} ({detail})')


def minimize(model: EnergyModel, initial: PLMap, constraint: Optional[Constraint] = None, budget: int = 2000,
             tol: float = GRADIENT_TOLERANCE) -> MinimizationRecord:
    """
    Gradient descent with Armijo backtracking. A trial is accepted when its determinants stay positive
    (the step is clamped by :func:`determinant_step_limit`), its vertex images, projected onto the box,
    still decrease both the energy and the penalised objective, and the constraint admits it.

    :raise InfeasibleInitial: the initial map is not feasible
    :raise InvalidEnergyModel: the model does not fit the dimension of the map
    """
    model.validate_dimension(initial.dim)
    constraint = Deg1Loc() if constraint is None else constraint
    _check_initial(model, initial, constraint)
    record = MinimizationRecord(constraint=constraint, model=model)
    pmap = initial
    energy = total_energy(model, pmap)
    objective = energy + constraint.penalty(pmap)
    record.iterates.append(energy)
    record.objectives.append(objective)
    min_step = MIN_STEP * pmap.mesh.diag
    step = None

    for iteration in range(budget):
        grad = energy_gradient(model, pmap)
        norm = float(np.linalg.norm(grad))
        if norm <= tol * max(1.0, abs(energy)):
            record.termination = 'gradient'
            break
        direction = -grad / norm
        if step is None:
            step = 0.1 * pmap.mesh.diag
        t = min(step, determinant_step_limit(pmap, direction))
        accepted = False
        while t * np.abs(direction).max() > min_step:
            images = pmap.images + t * direction
            if model.box is not None:
                images = model.box.project(images)
            displacement = images - pmap.images
            trial = pmap.with_images(images)
            if not trial.is_orientation_preserving:
                record.rejections['determinant'] += 1
                t *= SHRINK
                continue
            trial_energy = total_energy(model, trial)
            trial_objective = trial_energy + constraint.penalty(trial)
            slope = float(np.sum(grad * displacement))
            if trial_energy > energy or trial_objective > objective + ARMIJO * min(slope, 0.0) or slope >= 0:
                record.rejections['decrease'] += 1
                t *= SHRINK
                continue
            admitted, detail = constraint.admits(trial)
            if detail.get('excess', 0.0) > 0:
                constraint.escalate()
                objective = energy + constraint.penalty(pmap)
                admitted = trial_energy + constraint.penalty(trial) <= objective + ARMIJO * slope
            if not admitted:
                record.rejections['constraint'] += 1
                record.log_constraint(iteration, False, detail)
                t *= SHRINK
                continue
            record.log_constraint(iteration, True, detail)
            accepted = True
            break
        if not accepted:
            record.termination = 'line-search'
            break
        pmap, energy = trial, trial_energy
        objective = energy + constraint.penalty(pmap)
        record.iterates.append(energy)
        record.objectives.append(objective)
        step = t * GROW

    record.final_map = pmap
    logger.info(f'Minimization stopped ({record.termination}) after {record.iterations} steps: '
                f'energy {record.iterates[0]:.6g} -> {record.final_energy:.6g}')
    return record
