"""
DASG dataset file format.

Layout (little-endian):
    magic "DASG" | u16 version | u16 H | u16 W | u16 sampling_rate
    | u16 node_id length | node_id UTF-8 | u32 sample count
    then per sample: u8 label | H*W float32, row-major
"""
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from src.models import LabeledSample, PhaseWindow
from .exceptions import DatasetFormatError


logger = logging.getLogger(__name__)


MAGIC = b'DASG'
FORMAT_VERSION = 1

_HEADER = struct.Struct('<4sHHHH')
_NAME_LENGTH = struct.Struct('<H')
_COUNT = struct.Struct('<I')


@dataclass(frozen=True, eq=False)
class StoredDataset:
    """Contents of one DASG file."""
    node_id: str
    sampling_rate: int
    shape: Tuple[int, int]
    samples: List[LabeledSample]


def _record_dtype(shape: Tuple[int, int]) -> np.dtype:
    return np.dtype([('label', 'u1'), ('data', '<f4', shape)])


def encode_dataset(samples: Sequence[LabeledSample], node_id: str, sampling_rate: int) -> bytes:
    """
    Serialize samples to DASG bytes.

    Raises:
        DatasetFormatError: On empty input, mixed shapes or out-of-range header fields
    """
    if not samples:
        raise DatasetFormatError("Cannot encode an empty dataset")
    shape = samples[0].window.shape
    if any(sample.window.shape != shape for sample in samples):
        raise DatasetFormatError("All windows in a dataset must share one shape")
    height, width = shape
    for name, value in (('H', height), ('W', width), ('sampling_rate', sampling_rate)):
        if not 0 < value <= 0xFFFF:
            raise DatasetFormatError(f"{name}={value} does not fit the unsigned 16-bit header field")
    name = node_id.encode('utf-8')
    if len(name) > 0xFFFF:
        raise DatasetFormatError("node_id is too long")

    records = np.empty(len(samples), dtype=_record_dtype(shape))
    records['label'] = [sample.label for sample in samples]
    records['data'] = np.stack([sample.window.data for sample in samples])

    return b''.join([
        _HEADER.pack(MAGIC, FORMAT_VERSION, height, width, int(sampling_rate)),
        _NAME_LENGTH.pack(len(name)),
        name,
        _COUNT.pack(len(samples)),
        records.tobytes()
    ])


def decode_dataset(payload: bytes) -> StoredDataset:
    """
    Parse DASG bytes.

    Windows are returned as float64 arrays holding the stored binary32 values.

    Raises:
        DatasetFormatError: On bad magic, unknown version, truncation or bad labels
    """
    if len(payload) < _HEADER.size:
        raise DatasetFormatError("Truncated header")
    magic, version, height, width, sampling_rate = _HEADER.unpack_from(payload, 0)
    if magic != MAGIC:
        raise DatasetFormatError(f"Bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise DatasetFormatError(f"Unsupported format version {version}")

    offset = _HEADER.size
    if len(payload) < offset + _NAME_LENGTH.size:
        raise DatasetFormatError("Truncated node id")
    (name_length,) = _NAME_LENGTH.unpack_from(payload, offset)
    offset += _NAME_LENGTH.size
    if len(payload) < offset + name_length + _COUNT.size:
        raise DatasetFormatError("Truncated node id or sample count")
    try:
        node_id = payload[offset:offset + name_length].decode('utf-8')
    except UnicodeDecodeError as e:
        raise DatasetFormatError(f"node_id is not valid UTF-8: {e}")
    offset += name_length
    (count,) = _COUNT.unpack_from(payload, offset)
    offset += _COUNT.size

    dtype = _record_dtype((height, width))
    expected = count * dtype.itemsize
    if len(payload) - offset != expected:
        raise DatasetFormatError(f"Expected {expected} bytes of samples, found {len(payload) - offset}")

    records = np.frombuffer(payload, dtype=dtype, count=count, offset=offset)
    samples = []
    for record in records:
        label = int(record['label'])
        if label not in (0, 1):
            raise DatasetFormatError(f"Invalid label {label}")
        window = PhaseWindow(
            data=record['data'].astype(np.float64),
            origin_bin=0,
            origin_time=0.0,
            node_id=node_id
        )
        samples.append(LabeledSample(window=window, label=label))

    return StoredDataset(node_id=node_id, sampling_rate=sampling_rate, shape=(height, width), samples=samples)


def write_dataset(path: Union[str, Path], samples: Sequence[LabeledSample], node_id: str,
                  sampling_rate: int) -> int:
    """Write samples as a DASG file and return the number of bytes written."""
    payload = encode_dataset(samples, node_id, sampling_rate)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)
    logger.info(f"Wrote {len(samples)} samples for {node_id} to {path} ({len(payload)} bytes)")
    return len(payload)


def read_dataset(path: Union[str, Path]) -> StoredDataset:
    """Read a DASG file."""
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise DatasetFormatError(f"Cannot read dataset {path}: {e}")
    dataset = decode_dataset(payload)
    logger.debug(f"Read {len(dataset.samples)} samples for {dataset.node_id} from {path}")
    return dataset
