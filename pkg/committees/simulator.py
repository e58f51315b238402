# committees/simulator.py
"""
Trial drivers: stream candidates from p, let a strategy decide, stop at K
acceptances (or at a horizon) and record sample complexity, representation
loss and regret.

Each trial owns two generators spawned from its seed, one for the candidate
stream and one for the strategy's coin flips, so a trial replays exactly.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
import logging
import math

from django.conf import settings
import numpy as np
import pandas as pd

from .cmdp import gain
from .domain import Committee, TargetProfile, constraint_deviation, representation_loss, representation_profile
from .exceptions import ZeroGain
from .policies import StationaryStrategy

logger = logging.getLogger(__name__)

SAMPLE_CHUNK = 1024

# frozen column order of exported trial rows
TRIAL_COLUMNS = (
    'strategy', 'k', 'seed', 'tau', 'loss', 'status', 'accepted', 'rejected',
    'constraint_loss', 'episodes', 'cell_counts',
)
SUMMARY_COLUMNS = (
    'strategy', 'k', 'trials', 'completed', 'timed_out', 'fraction_timed_out',
    'mean_tau', 'std_tau', 'mean_loss', 'max_loss', 'mean_constraint_loss',
)


class TrialStatus(Enum):
    COMPLETED = 'Completed'
    TIMED_OUT = 'TimedOut'


def _panelforge_setting(key, default):
    return getattr(settings, 'PANELFORGE', {}).get(key, default)


def trial_streams(seed):
    """Independent (candidate, decision) generators for one trial."""
    candidate_seq, decision_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(candidate_seq), np.random.default_rng(decision_seq)


def _candidate_stream(p, rng):
    while True:
        for index in p.sample_indices(rng, SAMPLE_CHUNK):
            yield p.space.decode(index)


@dataclass(eq=False)
class TrialRecord:
    strategy: str
    k: int
    seed: int
    tau: int
    loss: float
    constraint_loss: float
    status: TrialStatus
    accepted: int
    rejected: int
    episodes: int
    cell_counts: list
    accepted_at: tuple = ()
    committee: Committee = None
    fallbacks: int = 0

    @property
    def completed(self):
        return self.status is TrialStatus.COMPLETED

    def as_row(self):
        return {
            'strategy': self.strategy,
            'k': self.k,
            'seed': self.seed,
            'tau': self.tau,
            'loss': self.loss,
            'status': self.status.value,
            'accepted': self.accepted,
            'rejected': self.rejected,
            'constraint_loss': self.constraint_loss,
            'episodes': self.episodes,
            'cell_counts': ';'.join('/'.join(str(int(n)) for n in counts) for counts in self.cell_counts),
        }


def _losses(committee, target):
    if len(committee) == 0:
        return float('nan'), float('nan')
    profile = representation_profile(committee)
    return representation_loss(profile, target), constraint_deviation(profile, target)


def run_until_k(strategy, p, target, committee_size, seed, t_max=None, trace=None):
    """
    Screen candidates until `committee_size` are accepted.

    tau counts every screened candidate, the last accepted one included. A run
    that screens t_max candidates without filling the committee is recorded
    as TimedOut.
    """
    if committee_size < 1:
        raise ValueError(f'Committee size must be at least 1, got {committee_size}')
    p.space.check_same(target.space)
    if t_max is None:
        t_max = _panelforge_setting('T_MAX', 10_000_000)
    if t_max < 1:
        raise ValueError(f't_max must be at least 1, got {t_max}')
    candidate_rng, decision_rng = trial_streams(seed)
    run = strategy.start(p, target, committee_size)
    committee = Committee(p.space)
    accepted_at = []

    t = 0
    for t, candidate in enumerate(_candidate_stream(p, candidate_rng), start=1):
        decision = run.step(candidate, decision_rng)
        if trace is not None:
            trace.record(t, candidate, run.episodes, run.last_accept_prob, decision)
        if decision.accepted:
            committee.add(candidate)
            accepted_at.append(t)
            if len(committee) == committee_size:
                break
        if t >= t_max:
            break

    status = TrialStatus.COMPLETED if len(committee) == committee_size else TrialStatus.TIMED_OUT
    if status is TrialStatus.TIMED_OUT:
        logger.info(f'{strategy.name} trial seed={seed} K={committee_size} timed out after {t} candidates')
    loss, constraint_loss = _losses(committee, target)
    return TrialRecord(
        strategy=strategy.name,
        k=committee_size,
        seed=seed,
        tau=t,
        loss=loss,
        constraint_loss=constraint_loss,
        status=status,
        accepted=len(committee),
        rejected=t - len(committee),
        episodes=run.episodes,
        cell_counts=[counts.tolist() for counts in committee.counts],
        accepted_at=tuple(accepted_at),
        committee=committee,
        fallbacks=len(run.fallbacks),
    )


@dataclass(eq=False)
class RegretRecord:
    strategy: str
    seed: int
    horizon: int
    g_star: float
    reward_sum: int
    regret: float
    constraint_regret: float
    episodes: int
    checkpoints: list = field(default_factory=list)

    def checkpoint(self, t):
        for entry in self.checkpoints:
            if entry['t'] == t:
                return entry
        raise KeyError(f'No checkpoint at t={t}')


def _constraint_regret(counts, target, accepted):
    return max(
        float(np.max(np.abs(n[:-1] - np.asarray(rho[:-1]) * accepted)))
        for n, rho in zip(counts, target.vectors)
    )


def _checkpoint_times(horizon):
    times = [2 ** e for e in range(int(math.log2(horizon)) + 1) if 2 ** e <= horizon]
    if times[-1] != horizon:
        times.append(horizon)
    return set(times)


def run_horizon(strategy, p, target, horizon, g_star, seed, trace=None):
    """
    Run for exactly `horizon` candidates and report R(T) = g* T - N(T) and
    Rc(T) = max_{i, j < D_i} |N_j^i(T) - rho_j^i N(T)|, with the same figures
    and the representation loss checkpointed at every power of two.
    """
    if horizon < 1:
        raise ValueError(f'Horizon must be at least 1, got {horizon}')
    if not 0 <= g_star <= 1:
        raise ValueError(f'g* must lie in [0, 1], got {g_star}')
    candidate_rng, decision_rng = trial_streams(seed)
    run = strategy.start(p, target, horizon)
    counts = [np.zeros(size, dtype=np.int64) for size in p.space.domain_sizes]
    accepted = 0
    checkpoint_times = _checkpoint_times(horizon)
    checkpoints = []

    stream = _candidate_stream(p, candidate_rng)
    for t in range(1, horizon + 1):
        candidate = next(stream)
        decision = run.step(candidate, decision_rng)
        if trace is not None:
            trace.record(t, candidate, run.episodes, run.last_accept_prob, decision)
        if decision.accepted:
            accepted += 1
            for i, value in enumerate(candidate.values):
                counts[i][value] += 1
        if t in checkpoint_times:
            loss = float('nan')
            if accepted:
                loss = max(float(np.max(np.abs(n / accepted - rho))) for n, rho in zip(counts, target.vectors))
            checkpoints.append({
                't': t,
                'reward_sum': accepted,
                'regret': g_star * t - accepted,
                'constraint_regret': _constraint_regret(counts, target, accepted),
                'loss': loss,
                'episodes': run.episodes,
            })

    return RegretRecord(
        strategy=strategy.name,
        seed=seed,
        horizon=horizon,
        g_star=g_star,
        reward_sum=accepted,
        regret=g_star * horizon - accepted,
        constraint_regret=_constraint_regret(counts, target, accepted),
        episodes=run.episodes,
        checkpoints=checkpoints,
    )


def _thread_count(threads):
    if threads is None:
        threads = _panelforge_setting('THREADS', 1)
    return max(1, int(threads))


def run_trials(strategy, p, target, committee_size, seeds, threads=None, t_max=None):
    """Independent trials, possibly in parallel; records come back ordered by seed."""
    seeds = sorted(seeds)
    if isinstance(strategy, StationaryStrategy):
        strategy.resolve(p, target)
    workers = _thread_count(threads)
    logger.debug(f'Running {len(seeds)} {strategy.name} trials at K={committee_size} on {workers} threads')
    if workers == 1:
        return [run_until_k(strategy, p, target, committee_size, seed, t_max=t_max) for seed in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda seed: run_until_k(strategy, p, target, committee_size, seed, t_max=t_max), seeds))


def run_horizon_trials(strategy, p, target, horizon, g_star, seeds, threads=None):
    seeds = sorted(seeds)
    workers = _thread_count(threads)
    if workers == 1:
        return [run_horizon(strategy, p, target, horizon, g_star, seed) for seed in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda seed: run_horizon(strategy, p, target, horizon, g_star, seed), seeds))


def records_frame(records):
    return pd.DataFrame([record.as_row() for record in records], columns=list(TRIAL_COLUMNS))


def summarize_trials(records):
    """
    One row per (strategy, K): counts, mean/std of tau over completed trials,
    loss statistics and the timed-out fraction. Rows are sorted by strategy then K.
    """
    frame = records_frame(records) if not isinstance(records, pd.DataFrame) else records
    rows = []
    for (strategy, k), group in frame.groupby(['strategy', 'k'], sort=True):
        completed = group[group['status'] == TrialStatus.COMPLETED.value]
        rows.append({
            'strategy': strategy,
            'k': int(k),
            'trials': len(group),
            'completed': len(completed),
            'timed_out': len(group) - len(completed),
            'fraction_timed_out': (len(group) - len(completed)) / len(group),
            'mean_tau': completed['tau'].mean() if len(completed) else float('nan'),
            'std_tau': completed['tau'].std(ddof=1) if len(completed) > 1 else 0.0,
            'mean_loss': completed['loss'].mean() if len(completed) else float('nan'),
            'max_loss': completed['loss'].max() if len(completed) else float('nan'),
            'mean_constraint_loss': completed['constraint_loss'].mean() if len(completed) else float('nan'),
        })
    return pd.DataFrame(rows, columns=list(SUMMARY_COLUMNS))


def negative_binomial_moments(committee_size, gain_value):
    """Mean K/g and variance K(1 - g)/g^2 of the time to the K-th acceptance."""
    if gain_value <= 0:
        raise ZeroGain('A policy that never accepts has an infinite stopping time')
    return committee_size / gain_value, committee_size * (1 - gain_value) / gain_value ** 2


@dataclass(frozen=True)
class TauSummary:
    trials: int
    mean: float
    variance: float
    expected_mean: float
    expected_variance: float
    timed_out: int = 0


def estimate_tau_distribution(policy, p, committee_size, n_trials, seed, threads=None, t_max=None):
    """
    Empirical mean and variance of tau under a stationary policy next to
    the negative-binomial closed forms. Timed-out trials are counted apart
    and left out of the moments.

    Raises:
        ZeroGain: the policy accepts nobody under p
    """
    expected_mean, expected_variance = negative_binomial_moments(committee_size, gain(policy, p))
    seeds = [seed + offset for offset in range(n_trials)]
    records = run_trials(
        StationaryStrategy(policy), p, _any_target(p.space), committee_size, seeds, threads=threads, t_max=t_max,
    )
    taus = np.array([record.tau for record in records if record.completed], dtype=float)
    timed_out = n_trials - taus.size
    if timed_out:
        logger.warning(f'{timed_out} of {n_trials} trials timed out; tau moments use the other {taus.size}')
    return TauSummary(
        trials=int(taus.size),
        mean=float(taus.mean()) if taus.size else float('nan'),
        variance=float(taus.var(ddof=1)) if taus.size > 1 else 0.0,
        expected_mean=expected_mean,
        expected_variance=expected_variance,
        timed_out=timed_out,
    )


def _any_target(space):
    # tau does not depend on the target; losses are computed against uniform proportions
    return TargetProfile(space, tuple(np.full(size, 1.0 / size) for size in space.domain_sizes))


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def linear_fit(xs, ys):
    """Least-squares line through (xs, ys) with its coefficient of determination."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2:
        raise ValueError('A linear fit needs at least two points')
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = ys - (slope * xs + intercept)
    total = np.sum((ys - ys.mean()) ** 2)
    r_squared = 1.0 - np.sum(residual ** 2) / total if total > 0 else 1.0
    return LinearFit(float(slope), float(intercept), float(r_squared))
