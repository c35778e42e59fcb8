# tests/test_data.py

import os
import struct
import tempfile
import unittest

import numpy as np
from numpy.testing import assert_array_equal

from config import TestingConfig
from snncodec.core.data import (
    batch_indices, batches, load_cifar10, load_dataset, load_mnist, save_cifar10, save_mnist,
    split, subset, synth_blobs,
)
from snncodec.errors import ConfigError, ContractError, FormatError
from snncodec.models import Dataset, RunConfig

FIXTURES = TestingConfig.DATA_DIR
MNIST_IMAGES = os.path.join(FIXTURES, 'mnist-10-images-idx3-ubyte')
MNIST_LABELS = os.path.join(FIXTURES, 'mnist-10-labels-idx1-ubyte')
CIFAR_BATCH = os.path.join(FIXTURES, 'cifar10-5.bin')


def _read(path):
    with open(path, 'rb') as handle:
        return handle.read()


class DataFileTestCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, name, raw):
        path = os.path.join(self.tmp.name, name)
        with open(path, 'wb') as handle:
            handle.write(raw)
        return path


class MnistTestCase(DataFileTestCase):
    def test_fixture(self):
        ds = load_mnist(MNIST_IMAGES, MNIST_LABELS)
        self.assertEqual(len(ds), 10)
        self.assertEqual(ds.images.shape, (10, 1, 28, 28))
        self.assertEqual(ds.labels.tolist(), [5, 0, 4, 1, 9, 2, 1, 3, 1, 4])
        self.assertEqual(ds.class_count, 10)
        self.assertTrue(0.0 <= ds.images.min() and ds.images.max() <= 1.0)

    def test_pixels_scaled(self):
        raw = _read(MNIST_IMAGES)
        ds = load_mnist(MNIST_IMAGES, MNIST_LABELS)
        self.assertEqual(ds.images[0, 0, 0, 0], raw[16] / 255.0)

    def test_label_file_with_image_magic(self):
        path = self.write('labels', struct.pack('>II', 2051, 1) + b'\x03')
        with self.assertRaises(FormatError):
            load_mnist(MNIST_IMAGES, path)

    def test_empty_file(self):
        with self.assertRaises(FormatError):
            load_mnist(self.write('empty', b''), MNIST_LABELS)

    def test_truncated_images(self):
        with self.assertRaises(FormatError):
            load_mnist(self.write('short', _read(MNIST_IMAGES)[:-1]), MNIST_LABELS)

    def test_count_mismatch(self):
        path = self.write('labels', struct.pack('>II', 2049, 3) + b'\x01\x02\x03')
        with self.assertRaises(FormatError):
            load_mnist(MNIST_IMAGES, path)

    def test_round_trip_bytes(self):
        ds = load_mnist(MNIST_IMAGES, MNIST_LABELS)
        images, labels = os.path.join(self.tmp.name, 'img'), os.path.join(self.tmp.name, 'lbl')
        save_mnist(ds, images, labels)
        self.assertEqual(_read(images), _read(MNIST_IMAGES))
        self.assertEqual(_read(labels), _read(MNIST_LABELS))


class CifarTestCase(DataFileTestCase):
    def test_fixture(self):
        ds = load_cifar10(CIFAR_BATCH)
        self.assertEqual(ds.images.shape, (5, 3, 32, 32))
        self.assertEqual(ds.labels.tolist(), [3, 8, 8, 0, 6])

    def test_channel_planar_layout(self):
        raw = _read(CIFAR_BATCH)
        ds = load_cifar10(CIFAR_BATCH)
        # record 1, green plane, row 0, col 0
        self.assertEqual(ds.images[1, 1, 0, 0], raw[3073 + 1 + 1024] / 255.0)

    def test_concatenated_batches(self):
        self.assertEqual(len(load_cifar10([CIFAR_BATCH, CIFAR_BATCH])), 10)

    def test_label_out_of_range(self):
        raw = bytearray(_read(CIFAR_BATCH))
        raw[0] = 10
        with self.assertRaises(FormatError):
            load_cifar10(self.write('bad.bin', bytes(raw)))

    def test_length_not_multiple(self):
        with self.assertRaises(FormatError):
            load_cifar10(self.write('bad.bin', _read(CIFAR_BATCH)[:-5]))

    def test_round_trip_bytes(self):
        path = os.path.join(self.tmp.name, 'out.bin')
        save_cifar10(load_cifar10(CIFAR_BATCH), path)
        self.assertEqual(_read(path), _read(CIFAR_BATCH))


class SynthTestCase(unittest.TestCase):
    def test_deterministic(self):
        first, second = synth_blobs(100, 4, seed=0), synth_blobs(100, 4, seed=0)
        assert_array_equal(first.images, second.images)
        assert_array_equal(first.labels, second.labels)

    def test_seed_sensitivity(self):
        self.assertFalse(np.array_equal(synth_blobs(100, 4, seed=0).images, synth_blobs(100, 4, seed=1).images))

    def test_single_class(self):
        self.assertFalse(synth_blobs(20, 1).labels.any())

    def test_shape_and_balance(self):
        ds = synth_blobs(100, 4, side=8)
        self.assertEqual(ds.images.shape, (100, 1, 8, 8))
        self.assertEqual(np.bincount(ds.labels).tolist(), [25, 25, 25, 25])

    def test_too_few_samples(self):
        with self.assertRaises(ContractError):
            synth_blobs(3, 4)


class BatchingTestCase(unittest.TestCase):
    def setUp(self):
        self.ds = synth_blobs(10, 2)

    def test_sizes(self):
        self.assertEqual([len(labels) for _, labels in batches(self.ds, 3)], [3, 3, 3, 1])

    def test_original_order_without_seed(self):
        self.assertEqual(np.concatenate(batch_indices(10, 3)).tolist(), list(range(10)))

    def test_seeded_order(self):
        first = np.concatenate(batch_indices(10, 3, shuffle_seed=5))
        assert_array_equal(first, np.concatenate(batch_indices(10, 3, shuffle_seed=5)))
        self.assertEqual(sorted(first.tolist()), list(range(10)))

    def test_batches_carry_images(self):
        images, labels = next(iter(batches(self.ds, 4, shuffle_seed=1)))
        self.assertEqual(images.shape, (4, 1, 8, 8))
        idx = batch_indices(10, 4, shuffle_seed=1)[0]
        assert_array_equal(images.data, self.ds.images[idx])
        assert_array_equal(labels, self.ds.labels[idx])

    def test_batch_size_contract(self):
        with self.assertRaises(ContractError):
            batch_indices(10, 0)


class DatasetTestCase(unittest.TestCase):
    def test_immutable(self):
        ds = synth_blobs(8, 2)
        with self.assertRaises(ValueError):
            ds.images[0, 0, 0, 0] = 0.5

    def test_invalid_labels(self):
        with self.assertRaises(ContractError):
            Dataset(np.zeros((2, 1, 2, 2)), np.array([0, 3]), 3)

    def test_values_outside_unit_range(self):
        with self.assertRaises(ContractError):
            Dataset(np.full((1, 1, 2, 2), 1.5), np.array([0]), 1)

    def test_subset_and_split(self):
        ds = synth_blobs(10, 2)
        self.assertEqual(len(subset(ds, 4)), 4)
        self.assertEqual(len(subset(ds, 40)), 10)
        head, tail = split(ds, 7)
        self.assertEqual((len(head), len(tail)), (7, 3))
        with self.assertRaises(ContractError):
            split(ds, 10)


class LoadDatasetTestCase(unittest.TestCase):
    def test_synth_sizes(self):
        train, test = load_dataset(RunConfig.create(train_size=30, test_size=12, synth_classes=3), FIXTURES)
        self.assertEqual((len(train), len(test)), (30, 12))
        self.assertEqual(train.class_count, 3)

    def test_missing_mnist_files(self):
        with tempfile.TemporaryDirectory() as empty:
            with self.assertRaises(ConfigError):
                load_dataset(RunConfig.create(dataset='mnist'), empty)

    def test_cifar_from_directory(self):
        with tempfile.TemporaryDirectory() as folder:
            raw = _read(CIFAR_BATCH)
            for name in ('data_batch_1.bin', 'test_batch.bin'):
                with open(os.path.join(folder, name), 'wb') as handle:
                    handle.write(raw)
            train, test = load_dataset(RunConfig.create(dataset='cifar10', train_size=4, test_size=2), folder)
        self.assertEqual((len(train), len(test)), (4, 2))
        self.assertEqual(train.image_shape, (3, 32, 32))


if __name__ == '__main__':
    unittest.main()
