"""
Curve CSVs: loss and accuracy against epoch per case, and accuracy against
shots for the few-shot sweeps.
"""
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import pandas as pd

from src.analytics import AGGREGATION_EVENT, EPOCH_EVENT
from .spec import Case, ExperimentReport


logger = logging.getLogger(__name__)


LOSS_COLUMNS = ['approach', 'seed', 'epoch', 'split', 'loss', 'event']
ACCURACY_COLUMNS = ['approach', 'seed', 'epoch', 'split', 'accuracy', 'event']
FEW_SHOT_COLUMNS = ['approach', 'target', 'seed', 'shots', 'accuracy']
JUMP_COLUMNS = ['seed', 'split', 'epoch', 'before', 'after', 'jump']


def _curve_frame(reports: Sequence[ExperimentReport]) -> pd.DataFrame:
    frames = []
    for report in reports:
        if report.curves is None or report.curves.empty:
            continue
        frame = report.curves.copy()
        frame.insert(0, 'approach', report.spec.approach)
        frames.append(frame)
    if not frames:
        return pd.DataFrame(columns=['approach', 'seed', 'epoch', 'split', 'loss', 'accuracy', 'event'])
    return pd.concat(frames, ignore_index=True)


def _sweep_frame(reports: Sequence[ExperimentReport]) -> pd.DataFrame:
    frames = []
    for report in reports:
        if report.sweep is None or report.sweep.empty:
            continue
        frame = report.sweep.copy()
        frame.insert(0, 'approach', report.spec.approach)
        frames.append(frame)
    if not frames:
        return pd.DataFrame(columns=FEW_SHOT_COLUMNS)
    return pd.concat(frames, ignore_index=True)[FEW_SHOT_COLUMNS]


def emit_curves(reports: Iterable[ExperimentReport], out_dir: Union[str, Path],
                cases: Optional[Sequence[Union[Case, str]]] = None) -> List[Path]:
    """
    Write loss_<case>.csv, accuracy_<case>.csv and few_shot_<case>.csv.

    A requested case without matching series still gets its three files, holding
    only the header row. FL rows at aggregation events carry event='aggregation'.

    Args:
        reports: Per-seed reports of any cells
        out_dir: Target directory
        cases: Cases to emit; every case present in `reports` by default

    Returns:
        Paths of the written files
    """
    reports = list(reports)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if cases is None:
        cases = sorted({report.spec.case for report in reports}, key=lambda c: c.value)
    cases = [Case(case) for case in cases]

    written = []
    for case in cases:
        selected = [report for report in reports if report.spec.case == case]
        curves = _curve_frame(selected)
        name = case.value.lower()

        loss = curves.dropna(subset=['loss'])[LOSS_COLUMNS]
        accuracy = curves.dropna(subset=['accuracy'])[ACCURACY_COLUMNS]
        few_shot = _sweep_frame(selected)
        for stem, frame in (('loss', loss), ('accuracy', accuracy), ('few_shot', few_shot)):
            path = out_dir / f"{stem}_{name}.csv"
            frame.to_csv(path, index=False)
            written.append(path)
        logger.info(f"Wrote {case.value} curves: {len(loss)} loss rows, {len(accuracy)} accuracy rows, "
                    f"{len(few_shot)} few-shot rows")
    return written


def aggregation_jumps(curves: pd.DataFrame) -> pd.DataFrame:
    """
    Accuracy change at every aggregation event on validation splits.

    `before` is the local models' cross-node accuracy at the aggregation
    epoch and `after` the aggregated model's accuracy on the same split.
    """
    validation = curves[curves['split'].astype(str).str.endswith('/test')]
    keys = ['seed', 'split', 'epoch']
    before = validation[validation['event'] == EPOCH_EVENT][keys + ['accuracy']].rename(
        columns={'accuracy': 'before'})
    after = validation[validation['event'] == AGGREGATION_EVENT][keys + ['accuracy']].rename(
        columns={'accuracy': 'after'})
    jumps = before.merge(after, on=keys, how='inner')
    jumps['jump'] = jumps['after'] - jumps['before']
    return jumps[JUMP_COLUMNS].reset_index(drop=True)
