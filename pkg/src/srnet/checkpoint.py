"""
Model checkpoint format.

Layout (little-endian):
    u32 descriptor byte length | descriptor UTF-8 text
    | u32 parameter count | count float32 values in architecture order
"""
import hashlib
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from .architecture import parse_descriptor
from .exceptions import ArchitectureError, CheckpointFormatError
from .params import ModelParams


logger = logging.getLogger(__name__)


_LENGTH = struct.Struct('<I')


def encode_checkpoint(params: ModelParams) -> bytes:
    """Serialize parameters; values are rounded to binary32."""
    descriptor = params.descriptor.encode('utf-8')
    values = params.flatten().astype('<f4')
    return b''.join([
        _LENGTH.pack(len(descriptor)),
        descriptor,
        _LENGTH.pack(values.size),
        values.tobytes()
    ])


def decode_checkpoint(payload: bytes) -> ModelParams:
    """
    Parse checkpoint bytes into float64 parameters holding the stored binary32 values.

    Raises:
        CheckpointFormatError: On truncation, a bad descriptor or a count mismatch
    """
    try:
        (length,) = _LENGTH.unpack_from(payload, 0)
        offset = _LENGTH.size
        descriptor = payload[offset:offset + length].decode('utf-8')
        offset += length
        (count,) = _LENGTH.unpack_from(payload, offset)
        offset += _LENGTH.size
    except (struct.error, UnicodeDecodeError) as e:
        raise CheckpointFormatError(f"Malformed checkpoint header: {e}")

    try:
        arch = parse_descriptor(descriptor)
    except ArchitectureError as e:
        raise CheckpointFormatError(str(e))

    if len(payload) - offset != 4 * count:
        raise CheckpointFormatError(f"Expected {count} values, found {(len(payload) - offset) / 4:g}")
    expected = sum(int(np.prod(shape)) for _, shape in arch.param_shapes())
    if count != expected:
        raise CheckpointFormatError(f"Checkpoint holds {count} values, architecture needs {expected}")

    values = np.frombuffer(payload, dtype='<f4', count=count, offset=offset).astype(np.float64)
    return ModelParams.from_vector(arch, values)


def save_checkpoint(path: Union[str, Path], params: ModelParams) -> str:
    """Write a checkpoint and return its SHA-256 hex digest."""
    payload = encode_checkpoint(params)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)
    digest = hashlib.sha256(payload).hexdigest()
    logger.debug(f"Saved checkpoint {path} ({params.parameter_count} parameters, sha256 {digest[:12]})")
    return digest


def load_checkpoint(path: Union[str, Path]) -> ModelParams:
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise CheckpointFormatError(f"Cannot read checkpoint {path}: {e}")
    return decode_checkpoint(payload)


def params_digest(params: ModelParams) -> str:
    """SHA-256 of the checkpoint encoding."""
    return hashlib.sha256(encode_checkpoint(params)).hexdigest()
