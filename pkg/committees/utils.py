# committees/utils.py
"""Export and persistence helpers shared by the management commands."""
from io import StringIO
from pathlib import Path
import csv
import json
import logging
import math

from django.db import transaction
import pandas as pd

from .simulator import TRIAL_COLUMNS, TrialStatus, records_frame

logger = logging.getLogger(__name__)

STORED_STATUS = {status.name: status for status in TrialStatus}


def _clean(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def frame_to_text(frame, fmt='csv'):
    """CSV with a header row, or a JSON list of row objects."""
    if fmt == 'json':
        rows = [{key: _clean(value) for key, value in row.items()} for row in frame.to_dict(orient='records')]
        return json.dumps(rows, indent=2, default=str)
    output = StringIO()
    frame.to_csv(output, index=False, float_format='%.12g', lineterminator='\n')
    return output.getvalue()


def write_output(text, path=None, stdout=None):
    """Write to `path` (parents created), or to the command's stdout."""
    if path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding='utf-8')
        logger.info(f'Wrote {len(text)} bytes to {target}')
    elif stdout is not None:
        stdout.write(text.rstrip('\n'))


def export_trials(records, fmt='csv'):
    return frame_to_text(records_frame(records), fmt)


def regret_frame(records):
    """One row per (seed, checkpoint)."""
    rows = []
    for record in records:
        for entry in record.checkpoints:
            rows.append({
                'strategy': record.strategy,
                'seed': record.seed,
                'horizon': record.horizon,
                'g_star': record.g_star,
                **entry,
            })
    return pd.DataFrame(rows)


def regret_summary(records):
    """Mean R(t)/t, |R(t)|/t, Rc(t)/t and loss per checkpoint over seeds."""
    frame = regret_frame(records)
    frame['regret_rate'] = frame['regret'] / frame['t']
    frame['abs_regret_rate'] = frame['regret'].abs() / frame['t']
    frame['constraint_rate'] = frame['constraint_regret'] / frame['t']
    summary = frame.groupby(['strategy', 't'], sort=True).agg(
        seeds=('seed', 'count'),
        mean_regret=('regret', 'mean'),
        mean_regret_rate=('regret_rate', 'mean'),
        mean_abs_regret_rate=('abs_regret_rate', 'mean'),
        mean_constraint_rate=('constraint_rate', 'mean'),
        mean_loss=('loss', 'mean'),
        max_episodes=('episodes', 'max'),
    )
    return summary.reset_index()


def persist_records(records, kind, config, space, label=''):
    """Store one ExperimentRun with its trials in a single transaction."""
    from .models import ExperimentRun, TrialResult

    with transaction.atomic():
        run = ExperimentRun.objects.create(
            kind=kind,
            label=label,
            config=config,
            space_fingerprint=space.fingerprint(),
        )
        TrialResult.objects.bulk_create([
            TrialResult(
                run=run,
                strategy=record.strategy,
                committee_size=record.k,
                seed=record.seed,
                tau=record.tau,
                loss=_clean(record.loss),
                constraint_loss=_clean(record.constraint_loss),
                accepted=record.accepted,
                rejected=record.rejected,
                status=record.status.name,
                episodes=record.episodes,
                cell_counts=record.cell_counts,
            )
            for record in records
        ])
    logger.info(f'Stored {len(records)} trials under run #{run.pk}')
    return run


def stored_trials_csv(queryset):
    """Stored trials in the trial export column order, plus the run id."""
    output = StringIO()
    writer = csv.writer(output, lineterminator='\n')
    writer.writerow(('run',) + TRIAL_COLUMNS)
    for trial in queryset.select_related('run'):
        writer.writerow([
            trial.run_id,
            trial.strategy,
            trial.committee_size,
            trial.seed,
            trial.tau,
            '' if trial.loss is None else f'{trial.loss:.12g}',
            STORED_STATUS[trial.status].value,
            trial.accepted,
            trial.rejected,
            '' if trial.constraint_loss is None else f'{trial.constraint_loss:.12g}',
            trial.episodes,
            ';'.join('/'.join(str(n) for n in counts) for counts in trial.cell_counts),
        ])
    return output.getvalue()
