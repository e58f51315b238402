# committees/management/commands/_common.py
"""Options and configuration handling shared by the simulator commands."""
from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import CommandError

from committees.config import ExperimentConfig, StrategyConfig, format_validation_error, load_config
from committees.exceptions import PanelforgeError
from committees.policies import STRATEGY_NAMES


def parse_k_list(value):
    try:
        ks = [int(part) for part in value.split(',') if part.strip()]
    except ValueError:
        raise CommandError(f"--k expects comma-separated integers, got '{value}'", returncode=1)
    if not ks or min(ks) < 1:
        raise CommandError('--k values must be positive integers', returncode=1)
    return ks


def add_experiment_arguments(parser, persist=True):
    parser.add_argument(
        '--config',
        help='Experiment configuration (JSON). Without it the embedded Brexit instance is used.',
    )
    parser.add_argument(
        '--strategy',
        choices=STRATEGY_NAMES,
        help='Run this strategy instead of the ones listed in the configuration',
    )
    parser.add_argument('--k', help='Committee size(s), comma separated, e.g. 50,100')
    parser.add_argument('--trials', type=int, help='Number of seeded trials per committee size')
    parser.add_argument('--seed', type=int, help='First seed; trial n uses seed + n')
    parser.add_argument('--epsilon', type=float, help='Greedy tolerance epsilon (default: 0)')
    parser.add_argument(
        '--delta',
        type=float,
        help=f"Learner confidence parameter (default: {settings.PANELFORGE['DEFAULT_DELTA']})",
    )
    parser.add_argument('--t-max', type=int, dest='t_max', help='Candidates screened before a trial times out')
    parser.add_argument('--out', help='Write results to this file instead of stdout')
    parser.add_argument('--format', choices=('csv', 'json'), help='Output format (default: csv)')
    if persist:
        parser.add_argument('--persist', action='store_true', help='Store the results in the database')


def resolve_config(options, default_k=None):
    """
    Configuration file (or the embedded default) with command-line overrides applied.

    Raises:
        CommandError: exit code 1, with one line per invalid field
    """
    try:
        if options.get('config'):
            config = load_config(options['config'])
        else:
            config = ExperimentConfig.from_dict({
                'distribution': {'source': 'brexit'},
                'strategies': [{'name': 'cmdp'}],
                'k': [default_k or 200],
            })
    except ValidationError as exc:
        raise CommandError(f'Invalid configuration:\n{format_validation_error(exc)}', returncode=1)

    if options.get('strategy'):
        delta = options.get('delta')
        if delta is None:
            delta = settings.PANELFORGE['DEFAULT_DELTA']
        if not 0 < delta < 1:
            raise CommandError(f'--delta must lie in (0, 1), got {delta}', returncode=1)
        epsilon = options.get('epsilon') or 0.0
        if epsilon < 0:
            raise CommandError(f'--epsilon must be non-negative, got {epsilon}', returncode=1)
        name = options['strategy']
        config.strategies = [StrategyConfig(
            name,
            epsilon=epsilon if name == 'greedy' else None,
            delta=delta if name.startswith('rlcmdp') else None,
        )]
    if options.get('k'):
        config.k = parse_k_list(options['k'])
    if options.get('trials') is not None:
        if options['trials'] < 1:
            raise CommandError('--trials must be at least 1', returncode=1)
        config.trials = options['trials']
    if options.get('seed') is not None:
        config.seed = options['seed']
    if options.get('t_max') is not None:
        config.t_max = options['t_max']
    if options.get('out'):
        config.output['path'] = options['out']
    if options.get('format'):
        config.output['format'] = options['format']
    return config


def build_instance(config):
    try:
        return config.build_instance()
    except (PanelforgeError, OSError) as exc:
        raise CommandError(f'Cannot build the candidate distribution: {exc}', returncode=1)
