# committees/config.py
"""
Experiment configuration files.

A configuration is a JSON object:

    {
      "features": [{"name": "gender", "size": 2, "target": [0.5, 0.5],
                    "marginal": [0.4, 0.6]}, ...],
      "distribution": {"source": "marginals"},
      "volunteer_adjustment": false,
      "strategies": [{"name": "greedy", "epsilon": 0.05}, {"name": "cmdp"}],
      "k": [50, 100],
      "trials": 50,
      "seed": 0,
      "t_max": 10000000,
      "horizon": 16384,
      "output": {"path": "results/sweep.csv", "format": "csv"}
    }

`distribution.source` is one of `marginals` (independent features, marginals
taken from `features`), `joint_csv` (with `path`) or `brexit` (embedded
dataset, optional `features` subset and `target_overrides`; `features` at the
top level is then omitted). With `volunteer_adjustment` every feature gives
`population` and `volunteer_rate` instead of `marginal`.

Problems are reported as django ValidationError with a field path per message.
"""
from dataclasses import dataclass, field
import json
import logging

from django.conf import settings
from django.core.exceptions import ValidationError

from .datasets import BREXIT_SUBSETS, Instance, brexit_instance
from .distribution import bayes_adjust, from_marginals, load_joint_csv
from .domain import CandidateSpace, TargetProfile
from .exceptions import PanelforgeError
from .policies import STRATEGY_NAMES, build_strategy

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = {
    'features', 'distribution', 'volunteer_adjustment', 'strategies', 'k', 'trials',
    'seed', 't_max', 'horizon', 'output',
}
FEATURE_KEYS = {'name', 'size', 'target', 'marginal', 'population', 'volunteer_rate'}
DISTRIBUTION_KEYS = {
    'marginals': {'source'},
    'joint_csv': {'source', 'path'},
    'brexit': {'source', 'features', 'target_overrides'},
}
STRATEGY_KEYS = {
    'greedy': {'name', 'epsilon'},
    'cmdp': {'name'},
    'rlcmdp': {'name', 'delta'},
    'rlcmdp-b': {'name', 'delta'},
}
OUTPUT_FORMATS = ('csv', 'json')


def _unknown(data, allowed, path, errors):
    for key in sorted(set(data) - allowed):
        errors[f'{path}{key}'] = f"Unknown key '{key}'"


def _number(value, path, errors, minimum=None, integer=False):
    valid_type = isinstance(value, int) if integer else isinstance(value, (int, float))
    if isinstance(value, bool) or not valid_type:
        errors[path] = f'Expected {"an integer" if integer else "a number"}, got {value!r}'
        return None
    if minimum is not None and value < minimum:
        errors[path] = f'Must be at least {minimum}, got {value}'
        return None
    return value


@dataclass
class StrategyConfig:
    name: str
    epsilon: float = None
    delta: float = None

    def to_dict(self):
        data = {'name': self.name}
        if self.epsilon is not None:
            data['epsilon'] = self.epsilon
        if self.delta is not None:
            data['delta'] = self.delta
        return data

    def build(self, horizon=None):
        return build_strategy(
            self.name,
            epsilon=self.epsilon or 0.0,
            delta=self.delta if self.delta is not None else 0.1,
            horizon=horizon,
        )


def _strategy(data, index, errors):
    path = f'strategies[{index}]'
    if not isinstance(data, dict):
        errors[path] = 'Each strategy must be an object'
        return None
    name = data.get('name')
    if name not in STRATEGY_NAMES:
        errors[f'{path}.name'] = f"Unknown strategy {name!r}; expected one of {', '.join(STRATEGY_NAMES)}"
        return None
    _unknown(data, STRATEGY_KEYS[name], f'{path}.', errors)
    strategy = StrategyConfig(name)
    if name == 'greedy':
        if 'epsilon' not in data:
            errors[f'{path}.epsilon'] = 'Greedy needs a tolerance epsilon'
        else:
            strategy.epsilon = _number(data['epsilon'], f'{path}.epsilon', errors, minimum=0)
    elif name.startswith('rlcmdp'):
        if 'delta' not in data:
            errors[f'{path}.delta'] = 'The learner needs a confidence parameter delta'
        else:
            delta = _number(data['delta'], f'{path}.delta', errors)
            if delta is not None and not 0 < delta < 1:
                errors[f'{path}.delta'] = f'delta must lie in (0, 1), got {delta}'
            strategy.delta = delta
    return strategy


@dataclass
class ExperimentConfig:
    features: list = None
    distribution: dict = field(default_factory=lambda: {'source': 'marginals'})
    volunteer_adjustment: bool = False
    strategies: list = field(default_factory=list)
    k: list = field(default_factory=list)
    trials: int = 1
    seed: int = 0
    t_max: int = None
    horizon: int = None
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data):
        """
        Validate a decoded configuration.

        Raises:
            ValidationError: message dict keyed by field path
        """
        errors = {}
        if not isinstance(data, dict):
            raise ValidationError({'__all__': 'Configuration must be a JSON object'})
        _unknown(data, TOP_LEVEL_KEYS, '', errors)
        config = cls()

        distribution = data.get('distribution', {'source': 'marginals'})
        source = distribution.get('source') if isinstance(distribution, dict) else None
        if source not in DISTRIBUTION_KEYS:
            errors['distribution.source'] = f"Expected one of {', '.join(DISTRIBUTION_KEYS)}, got {source!r}"
        else:
            _unknown(distribution, DISTRIBUTION_KEYS[source], 'distribution.', errors)
            if source == 'joint_csv' and not isinstance(distribution.get('path'), str):
                errors['distribution.path'] = 'A joint_csv source needs a file path'
            subset = distribution.get('features')
            if source == 'brexit' and isinstance(subset, str) and subset not in BREXIT_SUBSETS:
                errors['distribution.features'] = f"Unknown subset '{subset}'"
            config.distribution = dict(distribution)

        config.volunteer_adjustment = bool(data.get('volunteer_adjustment', False))
        features = data.get('features')
        if source == 'brexit':
            if features is not None:
                errors['features'] = 'The brexit source defines its own features'
        elif not isinstance(features, list) or not features:
            errors['features'] = 'At least one feature is required'
        else:
            config.features = [dict(f) for f in features if isinstance(f, dict)]
            for i, feature in enumerate(features):
                cls._check_feature(feature, i, source, config.volunteer_adjustment, errors)

        strategies = data.get('strategies')
        if not isinstance(strategies, list) or not strategies:
            errors['strategies'] = 'At least one strategy is required'
        else:
            config.strategies = [s for s in (_strategy(d, i, errors) for i, d in enumerate(strategies)) if s]

        ks = data.get('k')
        if not isinstance(ks, list) or not ks:
            errors['k'] = 'At least one committee size is required'
        else:
            config.k = [_number(k, f'k[{i}]', errors, minimum=1, integer=True) for i, k in enumerate(ks)]

        config.trials = _number(data.get('trials', 1), 'trials', errors, minimum=1, integer=True)
        config.seed = _number(data.get('seed', 0), 'seed', errors, minimum=0, integer=True)
        if data.get('t_max') is not None:
            config.t_max = _number(data['t_max'], 't_max', errors, minimum=1, integer=True)
        if data.get('horizon') is not None:
            config.horizon = _number(data['horizon'], 'horizon', errors, minimum=1, integer=True)

        output = data.get('output', {})
        if not isinstance(output, dict):
            errors['output'] = 'Output must be an object'
        else:
            _unknown(output, {'path', 'format'}, 'output.', errors)
            if output.get('format', 'csv') not in OUTPUT_FORMATS:
                errors['output.format'] = f"Expected csv or json, got {output.get('format')!r}"
            config.output = dict(output)

        if not errors:
            try:
                config.build_instance(validate_only=True)
            except (PanelforgeError, ValueError, TypeError) as exc:
                errors['features'] = str(exc)
        if errors:
            raise ValidationError(errors)
        return config

    @staticmethod
    def _check_feature(feature, index, source, adjusted, errors):
        path = f'features[{index}]'
        if not isinstance(feature, dict):
            errors[path] = 'Each feature must be an object'
            return
        _unknown(feature, FEATURE_KEYS, f'{path}.', errors)
        if not isinstance(feature.get('name'), str):
            errors[f'{path}.name'] = 'Feature name is required'
        size = _number(feature.get('size'), f'{path}.size', errors, minimum=2, integer=True)
        required = ['target']
        if source == 'marginals':
            required += ['population', 'volunteer_rate'] if adjusted else ['marginal']
        for key in required:
            vector = feature.get(key)
            if not isinstance(vector, list):
                errors[f'{path}.{key}'] = f'{key} must be a list of numbers'
            elif size is not None and len(vector) != size:
                errors[f'{path}.{key}'] = f'{key} has {len(vector)} entries, expected {size}'
            else:
                for j, value in enumerate(vector):
                    _number(value, f'{path}.{key}[{j}]', errors, minimum=0)

    def to_dict(self):
        data = {
            'distribution': dict(self.distribution),
            'volunteer_adjustment': self.volunteer_adjustment,
            'strategies': [s.to_dict() for s in self.strategies],
            'k': list(self.k),
            'trials': self.trials,
            'seed': self.seed,
            'output': dict(self.output),
        }
        if self.features is not None:
            data['features'] = [dict(f) for f in self.features]
        if self.t_max is not None:
            data['t_max'] = self.t_max
        if self.horizon is not None:
            data['horizon'] = self.horizon
        return data

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @property
    def seeds(self):
        return [self.seed + n for n in range(self.trials)]

    @property
    def effective_t_max(self):
        return self.t_max or getattr(settings, 'PANELFORGE', {}).get('T_MAX', 10_000_000)

    def build_instance(self, validate_only=False):
        """Space, target profile and candidate distribution described by this configuration."""
        source = self.distribution.get('source', 'marginals')
        if source == 'brexit':
            return brexit_instance(self.distribution.get('features'), self.distribution.get('target_overrides'))

        space = CandidateSpace(tuple(f['size'] for f in self.features), tuple(f['name'] for f in self.features))
        target = TargetProfile(space, tuple(f['target'] for f in self.features))
        if source == 'joint_csv':
            if validate_only:
                return None
            distribution = load_joint_csv(self.distribution['path'], space)
        elif self.volunteer_adjustment:
            distribution = from_marginals(
                space, [bayes_adjust(f['population'], f['volunteer_rate']) for f in self.features]
            )
        else:
            distribution = from_marginals(space, [f['marginal'] for f in self.features])
        return Instance(space=space, target=target, distribution=distribution)


def load_config(path):
    """
    Read and validate a configuration file.

    Raises:
        ValidationError: unreadable JSON (with line and column) or invalid fields
    """
    try:
        with open(path, encoding='utf-8') as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ValidationError({'__all__': f'{path}: line {exc.lineno} column {exc.colno}: {exc.msg}'})
    except OSError as exc:
        raise ValidationError({'__all__': f'Cannot read {path}: {exc}'})
    config = ExperimentConfig.from_dict(data)
    logger.debug(f'Loaded configuration {path} with {len(config.strategies)} strategies')
    return config


def format_validation_error(error):
    """One 'field: message' line per problem."""
    if hasattr(error, 'message_dict'):
        return '\n'.join(
            f'{key}: {" ".join(messages)}' if key != '__all__' else ' '.join(messages)
            for key, messages in sorted(error.message_dict.items())
        )
    return ' '.join(error.messages)
