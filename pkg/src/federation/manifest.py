"""
Run outputs of a federation: metrics CSV, final checkpoint and a plain-text manifest.
"""
import logging
from pathlib import Path
from typing import Optional, Union

from src.srnet import save_checkpoint
from .coordinator import FederationConfig, FederationResult


logger = logging.getLogger(__name__)


METRICS_FILE = 'metrics.csv'
MANIFEST_FILE = 'manifest.txt'
GLOBAL_CHECKPOINT = 'global.ckpt'


def write_federation_outputs(run_dir: Union[str, Path], result: FederationResult, config: FederationConfig,
                             config_digest: Optional[str] = None) -> Path:
    """
    Write metrics.csv, global.ckpt and manifest.txt under `run_dir`.

    Returns:
        Path of the manifest
    """
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)

    result.metrics.to_frame(include_event=True).to_csv(run_dir / METRICS_FILE, index=False)
    global_digest = save_checkpoint(run_dir / GLOBAL_CHECKPOINT, result.state.global_params)

    state = result.state
    lines = [
        'federation manifest',
        f"config_digest {config_digest or '-'}",
        f"seed {state.seed}",
        f"nodes {' '.join(state.node_ids)}",
        f"rounds {state.round}",
        f"local_epochs {config.local_epochs}",
        f"train {config.train.to_dict()}",
        f"architecture {state.arch.describe().splitlines()[0]}",
    ]
    for round_index, participants in enumerate(state.participation_history, start=1):
        lines.append(f"participants {round_index} {' '.join(participants) or '-'}")
    for round_index, node_id, digest in result.digests:
        lines.append(f"checkpoint {round_index} {node_id} sha256:{digest}")
    lines.append(f"file {GLOBAL_CHECKPOINT} sha256:{global_digest}")
    lines.append(f"file {METRICS_FILE}")

    manifest = run_dir / MANIFEST_FILE
    manifest.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    logger.info(f"Wrote federation outputs to {run_dir}")
    return manifest
