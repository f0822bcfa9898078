"""
Three-valued condition verdicts shared by the checkers.
"""
from __future__ import annotations
from typing import Any
from typing_extensions import Final

import math
from attrs import frozen, field, Factory

# ----- verdicts -----
HOLDS: Final = 'Holds'
FAILS: Final = 'Fails'
INCONCLUSIVE: Final = 'Inconclusive'

# ----- condition names -----
CNC: Final = 'CNC'
INV: Final = 'INV'
DEG1: Final = 'DEG1'
DEG1_LOC: Final = 'DEG1_loc'
AIB: Final = 'AIB'
AIB_LOC: Final = 'AIB_loc'
AI: Final = 'AI'
INJECTIVE_AE: Final = 'InjectiveAE'
STRICT_ORIENTATION: Final = 'StrictOrientation'
RESTRICTION: Final = 'Restriction'

WILSON_SE: Final = 3.0


@frozen(eq=False)
class ConditionVerdict:
    """
    Verdict of one checker. A ``Fails`` verdict always carries a witness in ``evidence``;
    ``resolution`` holds every sampling parameter needed to replay the check.
    """
    condition: str
    verdict: str = field()
    evidence: dict = Factory(dict)
    resolution: dict = Factory(dict)

    @verdict.validator
    def _check_verdict(self, _attribute, value):
        if value not in (HOLDS, FAILS, INCONCLUSIVE):
            raise ValueError(f'unknown verdict {value!r}')

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    @property
    def fails(self) -> bool:
        return self.verdict == FAILS

    @property
    def inconclusive(self) -> bool:
        return self.verdict == INCONCLUSIVE

    def to_dict(self) -> dict[str, Any]:
        return {
            'condition': self.condition,
            'verdict': self.verdict,
            'evidence': self.evidence,
            'resolution': self.resolution,
        }


def wilson_interval(successes: int, trials: int, z: float = WILSON_SE) -> tuple[float, float]:
    """Wilson score interval of a binomial proportion at ``z`` standard errors."""
    if trials <= 0:
        return 0.0, 1.0
    p = successes / trials
    denominator = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denominator
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denominator
    return max(0.0, center - half), min(1.0, center + half)
