from __future__ import annotations
from typing import Optional, Sequence


class PlinvError(Exception):
    pass


# ----- mesh -----
class DegenerateSimplex(PlinvError, ValueError):
    def __init__(self, simplex: int, volume: float, tolerance: float):
        self.simplex = simplex
        self.volume = volume
        self.tolerance = tolerance
        super().__init__(f'Simplex {simplex} is degenerate: |signed volume| = {volume:.3e} < {tolerance:.3e}')


class NonManifold(PlinvError, ValueError):
    def __init__(self, facet: Sequence[int], count: int):
        self.facet = tuple(int(v) for v in facet)
        self.count = count
        super().__init__(f'Facet {self.facet} is shared by {count} simplices (at most 2 allowed)')


class Disconnected(PlinvError, ValueError):
    def __init__(self, component_count: int):
        self.component_count = component_count
        super().__init__(f'Simplex adjacency graph has {component_count} connected components, expected 1')


class EmptyLevel(PlinvError, ValueError):
    def __init__(self, level: int, offset: float):
        self.level = level
        self.offset = offset
        super().__init__(f'Inner covering level {level} is empty (offset {offset:.6g})')


class MalformedInput(PlinvError, ValueError):
    def __init__(self, what: str, reason: str):
        self.what = what
        self.reason = reason
        super().__init__(f'Malformed {what}: {reason}')


# ----- degree -----
class NotRegularValue(PlinvError, ValueError):
    def __init__(self, z: Sequence[float], reason: str):
        self.z = tuple(float(c) for c in z)
        self.reason = reason
        super().__init__(f'{self.z} is not a regular value: {reason}')


class OnImageBoundary(PlinvError, ValueError):
    def __init__(self, z: Sequence[float], distance: float, tolerance: float):
        self.z = tuple(float(c) for c in z)
        self.distance = distance
        self.tolerance = tolerance
        super().__init__(f'{self.z} lies on the image boundary: distance {distance:.3e} <= {tolerance:.3e}')


class NumericallyAmbiguous(PlinvError, ArithmeticError):
    def __init__(self, z: Sequence[float], value: float):
        self.z = tuple(float(c) for c in z)
        self.value = value
        super().__init__(f'Winding sum {value:.6f} at {self.z} is too far from an integer')


class SupportCrossesImageBoundary(PlinvError, ValueError):
    def __init__(self, center: Sequence[float], radius: float, clearance: float):
        self.center = tuple(float(c) for c in center)
        self.radius = radius
        self.clearance = clearance
        super().__init__(f'Mollifier support around {self.center} (radius {radius:.3e}) '
                         f'reaches the image boundary (clearance {clearance:.3e})')


class InconsistentRegion(PlinvError, ArithmeticError):
    def __init__(self, region: int, degrees: Sequence[int]):
        self.region = region
        self.degrees = tuple(int(d) for d in degrees)
        super().__init__(f'Representatives of region {region} disagree: degrees {self.degrees}; refine the grid')


# ----- topology -----
class EmptyPreimage(PlinvError, ValueError):
    def __init__(self, z: Sequence[float], eta: Optional[float]):
        self.z = tuple(float(c) for c in z)
        self.eta = eta
        super().__init__(f'No simplex image within {eta if eta is not None else "tolerance"} of {self.z}')


class CannotSeparate(PlinvError, ValueError):
    def __init__(self, z: Sequence[float], reason: str):
        self.z = tuple(float(c) for c in z)
        self.reason = reason
        super().__init__(f'Cannot isolate the preimage piece of {self.z}: {reason}')


class BoundaryTouchingPiece(PlinvError, ValueError):
    def __init__(self, z: Sequence[float]):
        self.z = tuple(float(c) for c in z)
        super().__init__(f'The preimage piece of {self.z} touches the boundary and cannot be isolated')


# ----- conditions -----
class BallTooSmall(PlinvError, ValueError):
    def __init__(self, center: Sequence[float], radius: float):
        self.center = tuple(float(c) for c in center)
        self.radius = radius
        super().__init__(f'Ball submesh around {self.center} with radius {radius:.3e} is empty')


class HypothesisViolated(PlinvError, ValueError):
    def __init__(self, hypothesis: str, observed=None, degrees: Sequence[int] = ()):
        self.hypothesis = hypothesis
        self.observed = observed
        self.degrees = tuple(int(d) for d in degrees)
        super().__init__(f'Hypothesis "{hypothesis}" violated (observed {observed}); check skipped'
                         + (f', observed degrees {sorted(set(self.degrees))}' if self.degrees else ''))


# ----- elasticity -----
class NonpositiveDeterminant(PlinvError, ValueError):
    def __init__(self, simplices: Sequence[int]):
        self.simplices = tuple(int(s) for s in simplices)
        shown = self.simplices[:8]
        super().__init__(f'{len(self.simplices)} simplices have det <= 0, e.g. {shown}')


class InfeasibleInitial(PlinvError, ValueError):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f'Initial deformation is infeasible: {reason}')


class InvalidEnergyModel(PlinvError, ValueError):
    def __init__(self, field: str, value, requirement: str):
        self.field = field
        self.value = value
        self.requirement = requirement
        super().__init__(f'Energy model parameter {field}={value!r} violates {requirement}')


QueryErrors: tuple = (NotRegularValue, OnImageBoundary, NumericallyAmbiguous, SupportCrossesImageBoundary)
InputErrors: tuple = (DegenerateSimplex, NonManifold, Disconnected, EmptyLevel, MalformedInput,
                      InvalidEnergyModel, InfeasibleInitial) + QueryErrors
