"""
Command-line interface of the DAS generalization experiments.

Every subcommand is driven by the same experiment file and prints one JSON
line on success. Failures print {"error": ..., "message": ...} to stderr and
exit with status 1.
"""
import functools
import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Optional

import click

from src.config import Config, ExperimentSettings, create_config, load_experiment
from src.pipeline import apply_split_manifest, clean, split, write_split_manifest
from src.srnet import TrainConfig, fit, init_params, load_checkpoint, save_checkpoint, score
from src.synth import read_dataset, write_dataset
from .curves import emit_curves
from .data import node_profiles, node_samples
from .exceptions import ExperimentConfigError, HarnessError
from .runner import run_matrix
from .spec import Case, Strategy, find_spec, reference_matrix, same_dataset_specs


logger = logging.getLogger(__name__)


LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
NODE_CHOICE = click.Choice(['red', 'ca', 'cb'])


def setup_logging(level: int) -> None:
    logging.basicConfig(level=level, format=LOG_FORMAT)


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload, sort_keys=True))


def _fail(error: Exception) -> None:
    if isinstance(error, HarnessError):
        payload = error.to_dict()
    else:
        payload = {'error': type(error).__name__, 'message': str(error)}
    click.echo(json.dumps(payload, sort_keys=True), err=True)
    click.get_current_context().exit(1)


def handle_errors(func):
    """Turn any failure inside a command into one JSON error line and exit status 1."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (click.exceptions.ClickException, click.exceptions.Exit, click.exceptions.Abort):
            raise
        except Exception as e:
            logger.error(f"{type(e).__name__}: {e}")
            _fail(e)
    return wrapper


def _settings(ctx: click.Context) -> ExperimentSettings:
    return ctx.obj['settings']


def _seed(settings: ExperimentSettings, seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    if not settings.harness.seeds:
        raise ExperimentConfigError("No seed given and the seed list is empty", field='seeds')
    return settings.harness.seeds[0]


@click.group()
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None,
              help='JSON experiment file')
@click.option('--env', type=click.Choice(['development', 'production', 'testing']), default=None,
              help='Environment preset (DASGEN_ENV by default)')
@click.option('--run-dir', type=click.Path(file_okay=False), default=None, help='Output directory')
@click.option('--seeds', default=None, help='Comma-separated run seeds')
@click.option('--workers', type=int, default=None, help='Worker processes for matrix runs')
@click.option('--log-level', default=None, help='Logging level')
@click.pass_context
@handle_errors
def cli(ctx, config_path, env, run_dir, seeds, workers, log_level):
    """Synthetic DAS walking/cycling experiments."""
    config = create_config(env)
    if log_level is not None:
        config.LOG_LEVEL = log_level.upper()
        config.validate()
    setup_logging(config.get_log_level())
    settings = load_experiment(config_path, config)
    if seeds is not None:
        settings = settings.with_seeds(Config.parse_seeds(seeds))

    harness = settings.harness
    if workers is not None:
        harness = replace(harness, workers=Config.parse_workers(str(workers)))
    if run_dir is not None:
        harness = replace(harness, run_dir=run_dir)
    settings = replace(settings, harness=harness)

    ctx.ensure_object(dict)
    ctx.obj['config'] = config
    ctx.obj['settings'] = settings


@cli.command()
@click.option('--node', 'nodes', type=NODE_CHOICE, multiple=True, help='Nodes to synthesize (all by default)')
@click.option('--seed', type=int, default=None, help='Data seed (first run seed by default)')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None)
@click.pass_context
@handle_errors
def synth(ctx, nodes, seed, out_dir):
    """Write DASG datasets synthesized from the node profiles."""
    settings = _settings(ctx)
    seed = _seed(settings, seed)
    out_dir = Path(out_dir or Path(settings.harness.run_dir) / 'data')
    profiles = node_profiles(settings)
    written = {}
    for node in nodes or sorted(settings.synth.dataset_sizes):
        samples = node_samples(profiles[node], settings, seed)
        path = out_dir / f"{node}.dasg"
        write_dataset(path, samples, node, profiles[node].sampling_rate)
        written[node] = {'path': str(path), 'samples': len(samples)}
    _emit({'command': 'synth', 'seed': seed, 'datasets': written, 'config_digest': settings.digest})


@cli.command()
@click.argument('datasets', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--seed', type=int, default=None, help='Split seed (first run seed by default)')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None)
@click.pass_context
@handle_errors
def preprocess(ctx, datasets, seed, out_dir):
    """Clean stored datasets and write their train/test split manifests."""
    settings = _settings(ctx)
    seed = _seed(settings, seed)
    out_dir = Path(out_dir or Path(settings.harness.run_dir) / 'preprocessed')
    profiles = node_profiles(settings)
    summary = {}
    for dataset_path in datasets:
        stored = read_dataset(dataset_path)
        profile = profiles.get(stored.node_id)
        if profile is None:
            raise HarnessError(f"No profile for node {stored.node_id!r} in {dataset_path}")
        kept, rejected = clean(stored.samples, settings.pipeline.threshold_multiple * profile.noise_std)
        ratio = settings.pipeline.split_ratios[stored.node_id]
        dataset_split = split(kept, ratio, seed, stratified=settings.pipeline.stratified)

        cleaned = out_dir / f"{stored.node_id}.dasg"
        write_dataset(cleaned, kept, stored.node_id, stored.sampling_rate)
        manifest = out_dir / f"{stored.node_id}.split"
        write_split_manifest(manifest, dataset_split)
        summary[stored.node_id] = {
            'dataset': str(cleaned), 'split': str(manifest), 'rejected': rejected,
            'train': len(dataset_split.train), 'test': len(dataset_split.test)
        }
    _emit({'command': 'preprocess', 'seed': seed, 'nodes': summary})


def _load_split(dataset_path: str, manifest: Optional[str], settings: ExperimentSettings, seed: int):
    stored = read_dataset(dataset_path)
    if manifest is not None:
        return stored, apply_split_manifest(stored.samples, manifest)
    ratio = settings.pipeline.split_ratios.get(stored.node_id, 0.8)
    return stored, split(stored.samples, ratio, seed, stratified=settings.pipeline.stratified)


@cli.command()
@click.argument('dataset', type=click.Path(exists=True, dir_okay=False))
@click.option('--split', 'manifest', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Split manifest (a fresh split by default)')
@click.option('--seed', type=int, default=None)
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), required=True, help='Checkpoint path')
@click.pass_context
@handle_errors
def train(ctx, dataset, manifest, seed, out_path):
    """Train an independent model on a stored dataset's train split."""
    settings = _settings(ctx)
    seed = _seed(settings, seed)
    stored, dataset_split = _load_split(dataset, manifest, settings, seed)
    arch = settings.arch
    if tuple(stored.shape) != arch.input_shape:
        raise HarnessError(f"Dataset windows {stored.shape} do not match the model input {arch.input_shape}")

    config: TrainConfig = replace(settings.train, seed=seed)
    result = fit(init_params(arch, seed=seed), dataset_split.train, config)
    digest = save_checkpoint(out_path, result.params)
    last = result.history[-1] if result.history else None
    _emit({
        'command': 'train', 'checkpoint': str(out_path), 'sha256': digest, 'seed': seed,
        'epochs': config.epochs, 'loss': last.loss if last else None,
        'accuracy': last.accuracy if last else None
    })


@cli.command(name='eval')
@click.argument('checkpoint', type=click.Path(exists=True, dir_okay=False))
@click.argument('dataset', type=click.Path(exists=True, dir_okay=False))
@click.option('--split', 'manifest', type=click.Path(exists=True, dir_okay=False), default=None)
@click.option('--side', type=click.Choice(['test', 'train', 'all']), default='test')
@click.option('--seed', type=int, default=None)
@click.pass_context
@handle_errors
def evaluate(ctx, checkpoint, dataset, manifest, side, seed):
    """Score a checkpoint on a stored dataset."""
    settings = _settings(ctx)
    seed = _seed(settings, seed)
    params = load_checkpoint(checkpoint)
    if side == 'all':
        samples = read_dataset(dataset).samples
    else:
        _, dataset_split = _load_split(dataset, manifest, settings, seed)
        samples = dataset_split.test if side == 'test' else dataset_split.train
    result = score(params, samples)
    _emit({'command': 'eval', 'side': side, 'accuracy': result.accuracy, 'loss': result.loss,
           'samples': result.count})


def _run_cells(ctx, specs, name: str) -> None:
    settings = _settings(ctx)
    run_dir = Path(settings.harness.run_dir) / name
    matrix = run_matrix(specs, settings, run_dir=run_dir)
    curves = emit_curves(matrix.reports, run_dir / 'curves')
    _emit({
        'command': name.split('-')[0], 'run_dir': str(run_dir), 'config_digest': matrix.config_digest,
        'rows': matrix.table[['Approach', 'Case', 'Training', 'Test', 'Test acc']].to_dict(orient='records'),
        'curves': [str(path) for path in curves]
    })


@cli.command()
@click.option('--case', type=click.Choice([Case.DA.value, Case.DR.value]), default=Case.DA.value)
@click.pass_context
@handle_errors
def fed(ctx, case):
    """Federated averaging: 3 agents for DA, 2 agents for DR."""
    _run_cells(ctx, [find_spec(Strategy.FL.value, case)], f"fed-{case.lower()}")


@cli.command()
@click.option('--case', type=click.Choice([Case.DA.value, Case.DR.value]), default=Case.DA.value)
@click.pass_context
@handle_errors
def meta(ctx, case):
    """Reptile meta-training on the source node plus the few-shot sweep on the target."""
    _run_cells(ctx, [find_spec(Strategy.META.value, case)], f"meta-{case.lower()}")


@cli.command()
@click.option('--with-sd/--without-sd', default=True, help='Add the same-dataset cells')
@click.pass_context
@handle_errors
def report(ctx, with_sd):
    """Run the reference matrix and write the comparison table and curves."""
    specs = reference_matrix() + (same_dataset_specs() if with_sd else [])
    _run_cells(ctx, specs, 'report')


def main(argv=None):
    cli.main(args=argv, prog_name='dasgen')
