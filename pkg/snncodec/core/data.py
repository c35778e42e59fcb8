# snncodec/core/data.py
"""Dataset ingestion (MNIST IDX, CIFAR-10 binary), a synthetic blob set, and seeded batching."""

from __future__ import annotations

import logging
import os
import struct

import numpy as np

from snncodec.core.tensor import Tensor
from snncodec.errors import ConfigError, ContractError, FormatError
from snncodec.models.dataset import Dataset

logger = logging.getLogger(__name__)

IDX_IMAGE_MAGIC = 2051
IDX_LABEL_MAGIC = 2049
CIFAR_SIDE = 32
CIFAR_RECORD = 1 + 3 * CIFAR_SIDE * CIFAR_SIDE
CIFAR_CLASSES = 10
MNIST_CLASSES = 10

MNIST_FILES = {
    'train': ('train-images-idx3-ubyte', 'train-labels-idx1-ubyte'),
    'test': ('t10k-images-idx3-ubyte', 't10k-labels-idx1-ubyte'),
}
CIFAR_TRAIN_FILES = tuple(f'data_batch_{i}.bin' for i in range(1, 6))
CIFAR_TEST_FILE = 'test_batch.bin'


def _read(path):
    with open(path, 'rb') as handle:
        return handle.read()


def _to_unit(pixels):
    return pixels.astype(np.float64) / 255.0


def _to_bytes(images):
    return np.rint(np.asarray(images) * 255.0).astype(np.uint8)


# ---------------------------------------
# MNIST IDX
# ---------------------------------------

def _parse_idx_images(raw, path):
    if len(raw) < 16:
        raise FormatError(f"{path}: too short for an IDX image header")
    magic, count, rows, cols = struct.unpack('>IIII', raw[:16])
    if magic != IDX_IMAGE_MAGIC:
        raise FormatError(f"{path}: image magic {magic}, expected {IDX_IMAGE_MAGIC}")
    expected = 16 + count * rows * cols
    if len(raw) != expected:
        raise FormatError(f"{path}: {len(raw)} bytes, header promises {expected}")
    pixels = np.frombuffer(raw, dtype=np.uint8, offset=16)
    return pixels.reshape(count, 1, rows, cols)


def _parse_idx_labels(raw, path):
    if len(raw) < 8:
        raise FormatError(f"{path}: too short for an IDX label header")
    magic, count = struct.unpack('>II', raw[:8])
    if magic != IDX_LABEL_MAGIC:
        raise FormatError(f"{path}: label magic {magic}, expected {IDX_LABEL_MAGIC}")
    if len(raw) != 8 + count:
        raise FormatError(f"{path}: {len(raw)} bytes, header promises {8 + count}")
    return np.frombuffer(raw, dtype=np.uint8, offset=8)


def load_mnist(image_path, label_path):
    pixels = _parse_idx_images(_read(image_path), image_path)
    labels = _parse_idx_labels(_read(label_path), label_path)
    if len(pixels) != len(labels):
        raise FormatError(f"{len(pixels)} images but {len(labels)} labels")
    if len(labels) == 0:
        raise FormatError(f"{image_path}: no records")
    if labels.max() >= MNIST_CLASSES:
        raise FormatError(f"{label_path}: label {labels.max()} outside 0-9")
    return Dataset(_to_unit(pixels), labels.astype(np.int64), MNIST_CLASSES)


def save_mnist(dataset, image_path, label_path):
    n, c, rows, cols = dataset.images.shape
    if c != 1:
        raise ContractError(f"IDX images are single-channel, dataset has {c}")
    with open(image_path, 'wb') as handle:
        handle.write(struct.pack('>IIII', IDX_IMAGE_MAGIC, n, rows, cols))
        handle.write(_to_bytes(dataset.images).tobytes())
    with open(label_path, 'wb') as handle:
        handle.write(struct.pack('>II', IDX_LABEL_MAGIC, n))
        handle.write(dataset.labels.astype(np.uint8).tobytes())


# ---------------------------------------
# CIFAR-10 binary
# ---------------------------------------

def load_cifar10(bin_paths):
    """Concatenate one or more CIFAR-10 binary batch files."""
    if isinstance(bin_paths, (str, os.PathLike)):
        bin_paths = [bin_paths]
    images, labels = [], []
    for path in bin_paths:
        raw = _read(path)
        if not raw or len(raw) % CIFAR_RECORD:
            raise FormatError(f"{path}: length {len(raw)} is not a positive multiple of {CIFAR_RECORD}")
        records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
        if records[:, 0].max() >= CIFAR_CLASSES:
            raise FormatError(f"{path}: label byte {records[:, 0].max()} outside 0-9")
        labels.append(records[:, 0].astype(np.int64))
        images.append(records[:, 1:].reshape(-1, 3, CIFAR_SIDE, CIFAR_SIDE))
    if not images:
        raise FormatError("no CIFAR-10 batch files given")
    return Dataset(_to_unit(np.concatenate(images)), np.concatenate(labels), CIFAR_CLASSES)


def save_cifar10(dataset, path):
    n = len(dataset)
    if dataset.images.shape[1:] != (3, CIFAR_SIDE, CIFAR_SIDE):
        raise ContractError(f"CIFAR-10 records are 3x32x32, dataset has {dataset.images.shape[1:]}")
    records = np.empty((n, CIFAR_RECORD), dtype=np.uint8)
    records[:, 0] = dataset.labels
    records[:, 1:] = _to_bytes(dataset.images).reshape(n, -1)
    with open(path, 'wb') as handle:
        handle.write(records.tobytes())


# ---------------------------------------
# Synthetic blobs
# ---------------------------------------

BLOB_NOISE = 0.05
BLOB_JITTER = 0.05  # fraction of the side


def synth_blobs(n, classes, side=8, seed=0):
    """One Gaussian blob per image, its centre fixed by the class on a ring."""
    if n < classes:
        raise ContractError(f"need at least one sample per class ({n} < {classes})")
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % classes
    rng.shuffle(labels)

    angles = 2 * np.pi * np.arange(classes) / classes
    radius = side / 4 if classes > 1 else 0.0
    centres = np.stack([side / 2 + radius * np.sin(angles), side / 2 + radius * np.cos(angles)], axis=1)
    centres = centres[labels] + rng.normal(0.0, BLOB_JITTER * side, size=(n, 2))

    yy, xx = np.mgrid[0:side, 0:side] + 0.5
    sigma = side / 6
    dist2 = (yy[None] - centres[:, 0, None, None]) ** 2 + (xx[None] - centres[:, 1, None, None]) ** 2
    images = np.exp(-dist2 / (2 * sigma ** 2)) + rng.normal(0.0, BLOB_NOISE, size=(n, side, side))
    images = np.clip(images, 0.0, 1.0)[:, None]
    return Dataset(images, labels.astype(np.int64), classes)


# ---------------------------------------
# Subsets and batching
# ---------------------------------------

def subset(dataset, n):
    n = min(n, len(dataset))
    return Dataset(dataset.images[:n], dataset.labels[:n], dataset.class_count)


def split(dataset, n_first):
    if not 0 < n_first < len(dataset):
        raise ContractError(f"cannot split {len(dataset)} samples at {n_first}")
    head = Dataset(dataset.images[:n_first], dataset.labels[:n_first], dataset.class_count)
    tail = Dataset(dataset.images[n_first:], dataset.labels[n_first:], dataset.class_count)
    return head, tail


def batch_indices(n, batch_size, shuffle_seed=None):
    if batch_size < 1:
        raise ContractError(f"batch_size must be >= 1, got {batch_size}")
    order = np.arange(n) if shuffle_seed is None else np.random.default_rng(shuffle_seed).permutation(n)
    return [order[start:start + batch_size] for start in range(0, n, batch_size)]


def batches(dataset, batch_size, shuffle_seed=None):
    """Yield (images Tensor, labels) covering every sample once; the last batch may be short."""
    for idx in batch_indices(len(dataset), batch_size, shuffle_seed):
        yield Tensor(dataset.images[idx]), dataset.labels[idx]


def _require(path):
    if not os.path.exists(path):
        raise ConfigError(f"missing dataset file {path}")
    return path


def _cifar_dir(data_dir):
    nested = os.path.join(data_dir, 'cifar-10-batches-bin')
    return nested if os.path.isdir(nested) else data_dir


def load_dataset(run_config, data_dir):
    """Train/test datasets for a RunConfig, cut to its subset sizes."""
    n_train, n_test = run_config.subset_sizes()
    if run_config.dataset == 'synth':
        full = synth_blobs(n_train + n_test, run_config.synth_classes, run_config.synth_side, run_config.data_seed)
        train, test = split(full, n_train)
    elif run_config.dataset == 'mnist':
        train = load_mnist(*(_require(os.path.join(data_dir, f)) for f in MNIST_FILES['train']))
        test = load_mnist(*(_require(os.path.join(data_dir, f)) for f in MNIST_FILES['test']))
        train, test = subset(train, n_train), subset(test, n_test)
    else:
        folder = _cifar_dir(data_dir)
        paths = [os.path.join(folder, f) for f in CIFAR_TRAIN_FILES if os.path.exists(os.path.join(folder, f))]
        if not paths:
            raise ConfigError(f"no CIFAR-10 training batches in {folder}")
        train = subset(load_cifar10(paths), n_train)
        test = subset(load_cifar10(_require(os.path.join(folder, CIFAR_TEST_FILE))), n_test)
    logger.info("dataset loaded", extra={'dataset': run_config.dataset, 'train': len(train), 'test': len(test)})
    return train, test
