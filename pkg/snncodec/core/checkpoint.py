# snncodec/core/checkpoint.py
"""
Versioned binary checkpoints.

Layout (little-endian):
    magic    8 bytes  b'SNNCKPT\\0'
    version  uint16
    digest   64 ascii hex chars, sha256 of the ModelConfig
    header   uint32 length + utf-8 JSON {config, epoch, history}
    blocks   repeated: uint16 name length, name, uint8 ndim, ndim x uint32 dims, float64 data
    trailer  32 bytes, sha256 of everything before it
"""

from __future__ import annotations

import hashlib
import json
import logging
import struct
from dataclasses import dataclass, field

import numpy as np

from snncodec.errors import FormatError
from snncodec.models.config import ModelConfig

logger = logging.getLogger(__name__)

MAGIC = b'SNNCKPT\x00'
FORMAT_VERSION = 2
DIGEST_SIZE = 64
TRAILER_SIZE = hashlib.sha256().digest_size
@dataclass
class Checkpoint:
    config: ModelConfig
    params: dict            # name -> float64 ndarray, in model order
    epoch: int = 0
    history: list = field(default_factory=list)

    @classmethod
    def from_model(cls, model):
        params = {name: p.data.copy() for name, p in model.named_parameters().items()}
        return cls(model.cfg, params, model.epoch, [dict(entry) for entry in model.history])

    def to_model(self):
        from snncodec.core.network import build_model

        model = build_model(self.config, calibrated=False)
        named = model.named_parameters()
        if set(named) != set(self.params):
            missing = sorted(set(named) ^ set(self.params))
            raise FormatError(f"checkpoint parameters do not match the architecture: {missing}")
        for name, tensor in named.items():
            data = self.params[name]
            if data.shape != tensor.shape:
                raise FormatError(f"{name}: stored shape {data.shape}, model expects {tensor.shape}")
            tensor.data[...] = data
        model.epoch = self.epoch
        model.history = [dict(entry) for entry in self.history]
        return model

    def to_bytes(self):
        header = json.dumps({
            'config': self.config.model_dump(mode='json'),
            'epoch': self.epoch,
            'history': self.history,
        }, sort_keys=True, separators=(',', ':')).encode('utf-8')

        out = [MAGIC, struct.pack('<H', FORMAT_VERSION), self.config.digest().encode('ascii'),
               struct.pack('<I', len(header)), header]
        for name, data in self.params.items():
            encoded = name.encode('utf-8')
            out.append(struct.pack('<H', len(encoded)) + encoded)
            out.append(struct.pack('<B', data.ndim) + struct.pack(f'<{data.ndim}I', *data.shape))
            out.append(np.ascontiguousarray(data, dtype='<f8').tobytes())
        body = b''.join(out)
        return body + hashlib.sha256(body).digest()

    @classmethod
    def from_bytes(cls, raw, expected_digest=None):
        reader = _Reader(raw)
        if reader.take(len(MAGIC)) != MAGIC:
            raise FormatError("not a checkpoint: bad magic")
        (version,) = reader.unpack('<H')
        if version != FORMAT_VERSION:
            raise FormatError(f"checkpoint format version {version}, this build reads {FORMAT_VERSION}")
        if len(raw) < reader.pos + TRAILER_SIZE:
            raise FormatError("truncated checkpoint: no checksum trailer")
        body, trailer = raw[:-TRAILER_SIZE], raw[-TRAILER_SIZE:]
        if hashlib.sha256(body).digest() != trailer:
            raise FormatError("checkpoint checksum mismatch: file is truncated or corrupt")
        reader.raw = body

        digest = reader.take(DIGEST_SIZE).decode('ascii', errors='replace')
        (header_size,) = reader.unpack('<I')
        try:
            header = json.loads(reader.take(header_size).decode('utf-8'))
            config = ModelConfig(**header['config'])
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"corrupt checkpoint header: {exc}") from exc

        if config.digest() != digest:
            raise FormatError("config digest does not match the stored configuration")
        if expected_digest is not None and digest != expected_digest:
            raise FormatError(f"checkpoint was written for config {digest[:12]}, expected {expected_digest[:12]}")

        params = {}
        while not reader.done:
            (name_size,) = reader.unpack('<H')
            try:
                name = reader.take(name_size).decode('utf-8')
            except UnicodeDecodeError as exc:
                raise FormatError(f"corrupt parameter name at offset {reader.pos - name_size}") from exc
            (ndim,) = reader.unpack('<B')
            shape = reader.unpack(f'<{ndim}I')
            count = int(np.prod(shape, dtype=np.int64))
            # take() raises FormatError when fewer than count values remain
            params[name] = np.frombuffer(reader.take(8 * count), dtype='<f8').astype(np.float64).reshape(shape)
        return cls(config, params, int(header.get('epoch', 0)), list(header.get('history', [])))


class _Reader:
    def __init__(self, raw):
        self.raw = raw
        self.pos = 0

    @property
    def done(self):
        return self.pos == len(self.raw)

    def take(self, size):
        end = self.pos + size
        if end > len(self.raw):
            raise FormatError(f"truncated checkpoint: need {size} bytes at offset {self.pos}")
        chunk = self.raw[self.pos:end]
        self.pos = end
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def save_checkpoint(model, path):
    checkpoint = model if isinstance(model, Checkpoint) else Checkpoint.from_model(model)
    with open(path, 'wb') as handle:
        handle.write(checkpoint.to_bytes())
    logger.info("checkpoint saved", extra={'path': str(path), 'epoch': checkpoint.epoch})
    return checkpoint


def read_checkpoint(path, expected_digest=None):
    with open(path, 'rb') as handle:
        return Checkpoint.from_bytes(handle.read(), expected_digest)


def load_checkpoint(path, expected_digest=None):
    """Rebuild the Model stored at `path`; `expected_digest` pins the config it must match."""
    return read_checkpoint(path, expected_digest).to_model()
