"""
Meta checkpoints: a standard model checkpoint plus a JSON sidecar describing
how the meta model was trained.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from src.srnet import ModelParams, load_checkpoint, save_checkpoint
from .exceptions import MetaLearningError
from .reptile import MetaConfig, MetaState


logger = logging.getLogger(__name__)


def sidecar_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.name + '.json')


def save_meta_checkpoint(path: Union[str, Path], state: MetaState, config: MetaConfig, seed: int,
                         extra: Optional[Dict[str, Any]] = None) -> str:
    """
    Write the meta model and its sidecar.

    Returns:
        SHA-256 digest of the checkpoint file
    """
    digest = save_checkpoint(path, state.meta_params)
    sidecar = {
        'meta_config': config.to_dict(),
        'seed': seed,
        'iterations_completed': state.iteration,
        'checkpoint_sha256': digest,
    }
    if extra:
        sidecar.update(extra)
    sidecar_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True), encoding='utf-8')
    logger.info(f"Saved meta checkpoint {path} after {state.iteration} iterations")
    return digest


def load_meta_checkpoint(path: Union[str, Path]) -> Tuple[ModelParams, Dict[str, Any]]:
    """Read a meta model and its sidecar (an empty dict when the sidecar is missing)."""
    params = load_checkpoint(path)
    side = sidecar_path(path)
    if not side.exists():
        return params, {}
    try:
        return params, json.loads(side.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise MetaLearningError(f"Malformed meta sidecar {side}: {e}")
