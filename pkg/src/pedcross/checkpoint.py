"""
Checkpoint file layout:

    PEDCROSS-CKPT <version>\n
    <manifest byte length>\n
    <manifest JSON, UTF-8>
    <blob: little-endian float64 values>

The manifest holds the model config, free-form metadata and one entry per tensor
(name, kind, shape, offset in values). Parameters come first, then buffers.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from .errors import CheckpointError, ConfigError
from .fileio import atomic_write_bytes
from .models import ModelConfig
from .network import CrossingNet

logger = logging.getLogger(__name__)

_DTYPE = np.dtype('<f8')


def _entries(model: CrossingNet) -> List[Tuple[str, str, np.ndarray]]:
    entries = [(name, "param", t.data) for name, t in model.parameters().items()]
    entries += [(name, "buffer", arr) for name, arr in model.store.buffers().items()]
    return entries


def save_checkpoint(model: CrossingNet, path: Union[str, Path], metadata: Optional[Dict[str, Any]] = None) -> None:
    """Write parameters, batch-norm buffers and config to `path` atomically"""
    path = Path(path)
    tensors = []
    chunks = []
    offset = 0
    for name, kind, arr in _entries(model):
        tensors.append({'name': name, 'kind': kind, 'shape': list(arr.shape), 'offset': offset})
        chunks.append(np.ascontiguousarray(arr, dtype=_DTYPE).tobytes())
        offset += arr.size

    manifest = {
        'config': model.config.to_dict(),
        'metadata': metadata or {},
        'tensors': tensors,
        'values': offset,
    }
    manifest_bytes = json.dumps(manifest, sort_keys=True).encode('utf-8')
    header = CHECKPOINT_MAGIC + f" {CHECKPOINT_VERSION}\n{len(manifest_bytes)}\n".encode('ascii')
    atomic_write_bytes(path, header + manifest_bytes + b"".join(chunks))
    logger.info(f"Checkpoint saved to {path} ({offset} values)")


def _read_line(payload: bytes, start: int, path: Path) -> Tuple[bytes, int]:
    end = payload.find(b"\n", start)
    if end < 0:
        raise CheckpointError(f"checkpoint: {path} is truncated inside its header")
    return payload[start:end], end + 1


def read_checkpoint(path: Union[str, Path]) -> Tuple[Dict[str, Any], np.ndarray]:
    """Return the manifest and the flat value array, validating the framing"""
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"checkpoint: cannot read {path}: {e}") from e

    first, pos = _read_line(payload, 0, path)
    magic, _, version = first.partition(b" ")
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"checkpoint: {path} is not a checkpoint file")
    if version != str(CHECKPOINT_VERSION).encode('ascii'):
        raise CheckpointError(
            f"checkpoint: {path} has version {version.decode('ascii', 'replace')}, expected {CHECKPOINT_VERSION}"
        )
    length_line, pos = _read_line(payload, pos, path)
    try:
        length = int(length_line)
    except ValueError:
        raise CheckpointError(f"checkpoint: {path} has a corrupt manifest length") from None
    if pos + length > len(payload):
        raise CheckpointError(f"checkpoint: {path} is truncated inside its manifest")
    try:
        manifest = json.loads(payload[pos:pos + length].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"checkpoint: {path} has a corrupt manifest: {e}") from e

    if not isinstance(manifest, dict):
        raise CheckpointError(f"checkpoint: {path} manifest is not a JSON object")
    blob = payload[pos + length:]
    try:
        expected = int(manifest.get('values', -1)) * _DTYPE.itemsize
    except (TypeError, ValueError):
        raise CheckpointError(f"checkpoint: {path} has a corrupt value count") from None
    if len(blob) != expected:
        raise CheckpointError(f"checkpoint: {path} holds {len(blob)} value bytes, manifest declares {expected}")
    return manifest, np.frombuffer(blob, dtype=_DTYPE)


def load_checkpoint(path: Union[str, Path]) -> CrossingNet:
    model, _ = load_checkpoint_with_metadata(path)
    return model


def load_checkpoint_with_metadata(path: Union[str, Path]) -> Tuple[CrossingNet, Dict[str, Any]]:
    manifest, values = read_checkpoint(path)
    try:
        config = ModelConfig.from_dict(manifest['config'])
        model = CrossingNet.build(config)
    except (KeyError, TypeError, ConfigError) as e:
        raise CheckpointError(f"checkpoint: {path} holds an unusable config: {e}") from e

    params = model.parameters()
    buffers = model.store.buffers()
    seen = set()
    try:
        for entry in manifest['tensors']:
            name, kind, shape = entry['name'], entry['kind'], tuple(int(d) for d in entry['shape'])
            offset = int(entry['offset'])
            size = int(np.prod(shape, dtype=np.int64))
            if offset < 0 or offset + size > values.size:
                raise CheckpointError(f"checkpoint: tensor '{name}' lies outside the value blob")
            data = values[offset:offset + size].reshape(shape).copy()
            if kind == "param":
                if name not in params:
                    raise CheckpointError(f"checkpoint: unknown parameter '{name}'")
                if params[name].shape != shape:
                    raise CheckpointError(
                        f"checkpoint: parameter '{name}' has shape {shape}, model expects {params[name].shape}"
                    )
                params[name].data = data
            elif kind == "buffer":
                model.store.set_buffer(name, data)
            else:
                raise CheckpointError(f"checkpoint: tensor '{name}' has unknown kind '{kind}'")
            seen.add(name)
    except CheckpointError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"checkpoint: {path} has a malformed tensor table: {e!r}") from e

    missing = sorted((set(params) | set(buffers)) - seen)
    if missing:
        raise CheckpointError(f"checkpoint: missing tensors {missing[:5]}{'...' if len(missing) > 5 else ''}")
    logger.debug(f"Loaded checkpoint {path} with {len(seen)} tensors")
    return model, manifest.get('metadata', {})
