# committees/datasets.py
"""
Embedded recruitment dataset of the 2017 Citizens' Assembly on Brexit.

Targets are the organisers' quotas; marginals are P[x^i = j | volunteer],
obtained from the contact counts and volunteering rates in the assembly
report via Bayes' rule. Non-voters are left out of the vote feature since
almost none volunteered. Values are the published three-decimal figures;
rows that do not sum to exactly 1 are renormalized on load.
"""
from dataclasses import dataclass
import logging

import pandas as pd

from .distribution import from_marginals, normalize_vector
from .domain import CandidateSpace, TargetProfile
from .exceptions import BadMarginal

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureData:
    name: str
    labels: tuple
    target: tuple
    marginal: tuple

    @property
    def size(self):
        return len(self.labels)


BREXIT_FEATURES = (
    FeatureData('ethnicity', ('white', 'bme'), (0.860, 0.140), (0.863, 0.136)),
    FeatureData('social_class', ('abc1', 'c2de'), (0.550, 0.450), (0.556, 0.444)),
    FeatureData('age', ('18-34', '35-54', '55+'), (0.288, 0.344, 0.367), (0.154, 0.432, 0.414)),
    FeatureData(
        'region',
        tuple(f'region_{n}' for n in range(1, 9)),
        (0.233, 0.160, 0.093, 0.134, 0.222, 0.047, 0.082, 0.028),
        (0.179, 0.155, 0.090, 0.117, 0.211, 0.073, 0.154, 0.021),
    ),
    FeatureData('gender', ('female', 'male'), (0.507, 0.493), (0.384, 0.616)),
    FeatureData('vote', ('remain', 'leave'), (0.481, 0.519), (0.565, 0.434)),
)

BREXIT_SUBSETS = {
    'full': tuple(f.name for f in BREXIT_FEATURES),
    'core': ('ethnicity', 'social_class', 'gender'),
    'no_region': ('ethnicity', 'social_class', 'age', 'gender', 'vote'),
}


@dataclass(frozen=True, eq=False)
class Instance:
    """A candidate space with its target profile and candidate distribution."""

    space: CandidateSpace
    target: TargetProfile
    distribution: object


def _select(features):
    if features is None:
        return BREXIT_FEATURES
    if isinstance(features, str):
        if features not in BREXIT_SUBSETS:
            raise BadMarginal(f"Unknown feature subset '{features}'; expected one of {', '.join(BREXIT_SUBSETS)}")
        features = BREXIT_SUBSETS[features]
    by_name = {f.name: f for f in BREXIT_FEATURES}
    unknown = [name for name in features if name not in by_name]
    if unknown:
        raise BadMarginal(f'Unknown Brexit features: {", ".join(unknown)}')
    return tuple(by_name[name] for name in features)


def brexit_instance(features=None, target_overrides=None):
    """
    Instance on the chosen features (all six by default, a subset name such
    as 'core' or 'no_region', or explicit feature names), with the joint
    distribution built as a product of the volunteer marginals.
    """
    selected = _select(features)
    overrides = target_overrides or {}
    space = CandidateSpace(tuple(f.size for f in selected), tuple(f.name for f in selected))
    targets = tuple(
        normalize_vector(overrides.get(f.name, f.target), label=f'Target of {f.name}')
        for f in selected
    )
    marginals = [f.marginal for f in selected]
    logger.debug(f'Brexit instance on {len(selected)} features, |X| = {space.size}')
    return Instance(
        space=space,
        target=TargetProfile(space, targets),
        distribution=from_marginals(space, marginals),
    )


def brexit_table():
    """Targets and marginals as published, one row per feature."""
    rows = []
    for feature in BREXIT_FEATURES:
        rows.append({
            'feature': feature.name,
            'values': ' / '.join(feature.labels),
            'targets': ' / '.join(f'{v:.3f}' for v in feature.target),
            'marginals': ' / '.join(f'{v:.3f}' for v in feature.marginal),
            'target_sum': round(sum(feature.target), 6),
            'marginal_sum': round(sum(feature.marginal), 6),
        })
    return pd.DataFrame(rows)
