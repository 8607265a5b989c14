"""
Cell and matrix execution.

A matrix run expands every spec over its seeds, executes the (spec, seed)
runs serially or in worker processes, and aggregates mean and standard
deviation per table row. Each run writes only to its own directory.
"""
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd
import psutil

from src.config import ExperimentSettings
from src.federation import write_federation_outputs
from src.meta import save_meta_checkpoint
from src.pipeline import AccessAudit
from src.srnet import save_checkpoint
from .data import node_splits
from .exceptions import ExperimentConfigError
from .spec import ExperimentReport, ExperimentSpec
from .strategies import STRATEGIES, audited_splits, check_isolation


logger = logging.getLogger(__name__)


TABLE_COLUMNS = ['Approach', 'Case', 'Training', 'Test', 'Test acc', 'Test acc std',
                 'Seeds', 'Reliable', 'Config digest']
RUN_COLUMNS = ['Approach', 'Case', 'Training', 'Test', 'seed', 'accuracy']
MIN_RELIABLE_SEEDS = 5

TABLE_FILE = 'table.csv'
RUNS_FILE = 'runs.csv'
RESOURCES_FILE = 'resources.csv'
SETTINGS_FILE = 'config.json'
MANIFEST_FILE = 'manifest.txt'


def get_memory_usage() -> float:
    """Resident memory of this process in MB."""
    try:
        process = psutil.Process(os.getpid())
        return round(process.memory_info().rss / 1024 / 1024, 2)
    except psutil.Error:
        return 0.0


def case_dir(run_dir: Union[str, Path], spec: ExperimentSpec, seed: int) -> Path:
    return Path(run_dir) / 'cases' / spec.slug / f"seed-{seed}"


def run_case(spec: ExperimentSpec, settings: ExperimentSettings, seed: int,
             run_dir: Optional[Union[str, Path]] = None) -> ExperimentReport:
    """
    Execute one cell end to end on one seed.

    Args:
        spec: Cell to run
        settings: Effective experiment settings
        seed: Seeds data synthesis, splits, initialization and training
        run_dir: When given, curves and the final model go to the cell's own
            directory below it; FL cells add the federation metrics, per-round
            checkpoint digests and manifest

    Returns:
        ExperimentReport

    Raises:
        LeakageError: If the strategy read a protected split while training
    """
    started = time.perf_counter()
    audit = AccessAudit()
    data = audited_splits(node_splits(spec.nodes, settings, seed), audit)

    logger.info(f"Running {spec.approach} {spec.case.value} "
                f"({spec.training_label} -> {', '.join(spec.test_nodes)}) seed {seed}")
    outcome = STRATEGIES[spec.strategy](spec, data, settings, seed, audit)
    check_isolation(spec, audit)

    report = ExperimentReport(
        spec=spec,
        seed=seed,
        accuracies=outcome.accuracies,
        curves=outcome.curves,
        sweep=outcome.sweep,
        config_digest=settings.digest,
        reads={f"{role}|{phase}": n for (role, phase), n in sorted(audit.snapshot().items())}
    )

    if run_dir is not None:
        out = case_dir(run_dir, spec, seed)
        out.mkdir(parents=True, exist_ok=True)
        if outcome.meta_state is not None:
            report.checkpoint_digest = save_meta_checkpoint(
                out / 'model.ckpt', outcome.meta_state, settings.meta, seed,
                extra={'config_digest': settings.digest, 'source': spec.train_nodes[0]}
            )
        else:
            report.checkpoint_digest = save_checkpoint(out / 'model.ckpt', outcome.params)
        report.curves.to_csv(out / 'curves.csv', index=False)
        if report.sweep is not None:
            report.sweep.to_csv(out / 'sweep.csv', index=False)
        if outcome.federation is not None:
            write_federation_outputs(out, outcome.federation, outcome.federation_config, settings.digest)

    report.runtime = time.perf_counter() - started
    report.peak_rss_mb = get_memory_usage()
    accuracy_text = ', '.join(f"{node}={acc:.3f}" for node, acc in report.accuracies.items())
    logger.info(f"Finished {spec.slug} seed {seed} in {report.runtime:.1f}s: {accuracy_text}")
    return report


def _run_task(task: Tuple[ExperimentSpec, ExperimentSettings, int, Optional[str]]) -> ExperimentReport:
    spec, settings, seed, run_dir = task
    return run_case(spec, settings, seed, run_dir)


@dataclass(eq=False)
class MatrixReport:
    """Every per-seed report of a matrix run plus the aggregated table."""
    reports: List[ExperimentReport]
    table: pd.DataFrame
    config_digest: str
    seeds: Dict[str, Tuple[int, ...]] = field(default_factory=dict)

    def runs_frame(self) -> pd.DataFrame:
        rows = [row for report in self.reports for row in report.table_rows()]
        return pd.DataFrame(rows, columns=RUN_COLUMNS)

    def resources_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.spec.slug, r.seed, round(r.runtime, 3), r.peak_rss_mb) for r in self.reports],
            columns=['cell', 'seed', 'runtime_s', 'rss_mb']
        )


def summarize(reports: Sequence[ExperimentReport], config_digest: str) -> pd.DataFrame:
    """
    One row per (Approach, Case, Training, Test) in first-seen order, with the
    mean and population standard deviation over seeds.
    """
    runs = pd.DataFrame([row for report in reports for row in report.table_rows()], columns=RUN_COLUMNS)
    if runs.empty:
        return pd.DataFrame(columns=TABLE_COLUMNS)
    keys = ['Approach', 'Case', 'Training', 'Test']
    grouped = runs.groupby(keys, sort=False)['accuracy']
    table = pd.DataFrame({
        'Test acc': grouped.mean(),
        'Test acc std': grouped.std(ddof=0),
        'Seeds': grouped.size(),
    }).reset_index()
    table['Reliable'] = table['Seeds'] >= MIN_RELIABLE_SEEDS
    table['Config digest'] = config_digest
    return table[TABLE_COLUMNS]


def _tasks(specs: Sequence[ExperimentSpec], settings: ExperimentSettings,
           run_dir: Optional[Path]) -> List[Tuple[ExperimentSpec, ExperimentSettings, int, Optional[str]]]:
    if not specs:
        raise ExperimentConfigError("A matrix run needs at least one spec", field='specs')
    keys = [(spec.strategy, spec.case, spec.train_nodes, spec.test_nodes) for spec in specs]
    if len(set(keys)) != len(keys):
        raise ExperimentConfigError("Every cell may appear only once in a matrix", field='specs')

    tasks = []
    for spec in specs:
        seeds = spec.seeds or settings.harness.seeds
        if not seeds:
            raise ExperimentConfigError(f"No seeds for {spec.slug}", field='seeds')
        if len(seeds) < MIN_RELIABLE_SEEDS:
            logger.warning(f"{spec.slug} runs on {len(seeds)} seed(s); its mean is marked unreliable")
        tasks.extend((spec, settings, int(seed), str(run_dir) if run_dir else None) for seed in seeds)
    return tasks


def run_matrix(specs: Sequence[ExperimentSpec], settings: ExperimentSettings,
               run_dir: Optional[Union[str, Path]] = None, workers: Optional[int] = None) -> MatrixReport:
    """
    Run every spec over every seed and aggregate the table.

    Args:
        specs: Cells to run; each may appear once
        settings: Effective experiment settings
        run_dir: Output directory for the table, per-run files and manifest
        workers: Worker processes (the harness setting by default)

    Raises:
        ExperimentConfigError: On an empty spec list, an empty seed list or duplicate cells
    """
    run_dir = Path(run_dir) if run_dir is not None else None
    tasks = _tasks(specs, settings, run_dir)
    workers = workers or settings.harness.workers
    started = time.perf_counter()

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            reports = list(executor.map(_run_task, tasks))
    else:
        reports = [_run_task(task) for task in tasks]

    matrix = MatrixReport(
        reports=reports,
        table=summarize(reports, settings.digest),
        config_digest=settings.digest,
        seeds={spec.slug: tuple(spec.seeds or settings.harness.seeds) for spec in specs}
    )
    logger.info(f"Matrix of {len(specs)} cells and {len(tasks)} runs finished in "
                f"{time.perf_counter() - started:.1f}s")
    if run_dir is not None:
        write_matrix_outputs(run_dir, matrix, settings)
    return matrix


def write_matrix_outputs(run_dir: Union[str, Path], matrix: MatrixReport, settings: ExperimentSettings) -> Path:
    """
    Write the table, per-run accuracies, resources, settings and manifest.

    table.csv and runs.csv hold no timing fields; runtimes and memory go to
    resources.csv.

    Returns:
        Path of the manifest
    """
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    matrix.table.to_csv(run_dir / TABLE_FILE, index=False, float_format='%.4f')
    matrix.runs_frame().to_csv(run_dir / RUNS_FILE, index=False, float_format='%.6f')
    matrix.resources_frame().to_csv(run_dir / RESOURCES_FILE, index=False)
    (run_dir / SETTINGS_FILE).write_text(json.dumps(settings.to_dict(), indent=2, sort_keys=True),
                                         encoding='utf-8')

    lines = ['experiment manifest', f"config_digest {matrix.config_digest}"]
    if settings.source_path:
        lines.append(f"config_file {settings.source_path}")
    for slug, seeds in matrix.seeds.items():
        lines.append(f"cell {slug} seeds {' '.join(str(s) for s in seeds)}")
    for report in matrix.reports:
        if report.checkpoint_digest:
            path = case_dir(run_dir, report.spec, report.seed).relative_to(run_dir) / 'model.ckpt'
            lines.append(f"checkpoint {path.as_posix()} seed {report.seed} sha256:{report.checkpoint_digest}")
    lines.extend(f"file {name}" for name in (TABLE_FILE, RUNS_FILE, RESOURCES_FILE, SETTINGS_FILE))

    manifest = run_dir / MANIFEST_FILE
    manifest.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    logger.info(f"Wrote matrix outputs to {run_dir}")
    return manifest
