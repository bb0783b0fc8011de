"""
Tests for catequiv.data (gain processing and the UCI-HAR loader).
"""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from catequiv.data import (
    DatasetSplit,
    Window,
    compute_rms,
    gain_process,
    gain_process_batch,
    load_ucihar,
    normalize_stream,
    stratified_split,
)
from catequiv.exceptions import DataError, ShapeError
from catequiv.nn import Rng
from catequiv.ood import sample_rotation
from catequiv.tests.helpers import random_values, synthetic_split, write_ucihar


class RmsTests(SimpleTestCase):
    def test_constant_stream(self) -> None:
        """x ≡ 2 should give R = 4, ρ = 2, r = log 2."""
        stats = compute_rms(np.full((3, 128), 2.0))
        self.assertAlmostEqual(stats.R, 4.0, delta=1e-12)
        self.assertAlmostEqual(stats.rho, 2.0, delta=1e-12)
        self.assertAlmostEqual(stats.r, np.log(2.0), delta=1e-12)

    def test_zero_stream_uses_floor(self) -> None:
        """ρ = ε and r = log ε for an all-zero window."""
        stats = compute_rms(np.zeros((3, 128)), epsilon=1e-6)
        self.assertEqual(stats.R, 0.0)
        self.assertEqual(stats.rho, 1e-6)
        self.assertAlmostEqual(stats.r, np.log(1e-6), delta=1e-12)
        np.testing.assert_array_equal(normalize_stream(np.zeros((3, 8))), 0.0)

    def test_rotation_leaves_energy_unchanged(self) -> None:
        """R(Rx) == R(x)."""
        rng = Rng(0)
        x = rng.normal(size=(3, 128))
        rotation = sample_rotation(rng)
        self.assertAlmostEqual(compute_rms(rotation @ x).R, compute_rms(x).R, delta=1e-12)

    def test_log_rms_is_affine_in_gain(self) -> None:
        """r(λx) − r(x) == log λ when the floor is inactive."""
        x = Rng(1).normal(size=(3, 64))
        for gain in (0.3, 1.7, 25.0):
            self.assertAlmostEqual(compute_rms(gain * x).r - compute_rms(x).r, np.log(gain), delta=1e-10)

    def test_rejects_bad_shape(self) -> None:
        """Should require (3, T)."""
        with self.assertRaises(ShapeError):
            compute_rms(np.zeros((2, 8)))


class GainProcessTests(SimpleTestCase):
    def test_layout(self) -> None:
        """Rows 0–5 unit-RMS axes per sensor, rows 6–7 constant log-RMS."""
        values = random_values(0, 3, 32) * np.array([2.0, 0.5])[None, None, :, None]
        out = gain_process_batch(values)
        self.assertEqual(out.shape, (3, 8, 32))
        acc, gyr = out[:, :3], out[:, 3:6]
        np.testing.assert_allclose((acc**2).mean(axis=(1, 2)), 1.0, atol=1e-12)
        np.testing.assert_allclose((gyr**2).mean(axis=(1, 2)), 1.0, atol=1e-12)
        np.testing.assert_allclose(out[:, 6], out[:, 6, :1], atol=0)
        for i in range(3):
            window = Window(values[i], label=1, expected_length=32)
            self.assertAlmostEqual(out[i, 6, 0], compute_rms(window.acc).r, delta=1e-12)
            self.assertAlmostEqual(out[i, 7, 0], compute_rms(window.gyr).r, delta=1e-12)

    def test_gain_only_moves_log_rms_rows(self) -> None:
        """Scaling a sensor leaves its normalized axes and shifts its log-RMS by log λ."""
        values = random_values(1, 2, 32)
        scaled = values * np.array([3.0, 0.25])[None, None, :, None]
        base, moved = gain_process_batch(values), gain_process_batch(scaled)
        np.testing.assert_allclose(moved[:, :6], base[:, :6], atol=1e-12)
        np.testing.assert_allclose(moved[:, 6] - base[:, 6], np.log(3.0), atol=1e-10)
        np.testing.assert_allclose(moved[:, 7] - base[:, 7], np.log(0.25), atol=1e-10)

    def test_raw_mode(self) -> None:
        """normalize=False copies the streams and zeroes rows 6–7."""
        values = random_values(2, 1, 16)
        out = gain_process_batch(values, normalize=False)[0]
        np.testing.assert_array_equal(out[:3], values[0, :, 0, :].T)
        np.testing.assert_array_equal(out[3:6], values[0, :, 1, :].T)
        np.testing.assert_array_equal(out[6:], 0.0)

    def test_single_window(self) -> None:
        """gain_process should agree with the batch version."""
        window = Window(random_values(3, 1, 16)[0], label=2, expected_length=16)
        processed = gain_process(window)
        np.testing.assert_array_equal(processed.assembled, gain_process_batch(window.values[None])[0])
        self.assertEqual(processed.axes.shape, (6, 16))

    def test_window_shape_validation(self) -> None:
        """Should reject values that are not (T, 2, 3)."""
        with self.assertRaises(ShapeError):
            Window(np.zeros((16, 3, 2)), label=1, expected_length=16)

    def test_window_length_validation(self) -> None:
        """Should reject a window whose T differs from the expected length."""
        Window(np.zeros((128, 2, 3)), label=1)
        with self.assertRaises(ShapeError) as ctx:
            Window(np.zeros((100, 2, 3)), label=1)
        self.assertEqual(ctx.exception.context, {"length": 100, "expected": 128})

    def test_window_label_validation(self) -> None:
        """Should require a label in 1..6."""
        with self.assertRaises(TypeError):
            Window(np.zeros((128, 2, 3)))
        for label in (0, 7, -1):
            with self.assertRaises(DataError) as ctx:
                Window(np.zeros((128, 2, 3)), label=label)
            self.assertEqual(ctx.exception.code, "bad_label")


class LoaderTests(SimpleTestCase):
    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.data = synthetic_split(per_class=2, seed=4)

    def tearDown(self) -> None:
        self.tmp.cleanup()

    def signal(self, name: str) -> Path:
        return self.root / "train" / "Inertial Signals" / name

    def test_round_trip(self) -> None:
        """Should read back values, labels and subjects in channel order."""
        write_ucihar(self.root, self.data, "train")
        loaded = load_ucihar(self.root, "train")
        self.assertEqual(len(loaded), 12)
        np.testing.assert_allclose(loaded.values, self.data.values, atol=1e-10)
        np.testing.assert_array_equal(loaded.labels, self.data.labels)
        np.testing.assert_array_equal(loaded.subjects, self.data.subjects)
        self.assertEqual(loaded.class_counts(), [2] * 6)
        np.testing.assert_array_equal(loaded.targets, self.data.labels - 1)

    def test_body_acc_source(self) -> None:
        """acc_source='body' should read body_acc files."""
        write_ucihar(self.root, self.data, "train", acc_source="body")
        loaded = load_ucihar(self.root, "train", acc_source="body")
        np.testing.assert_allclose(loaded.values, self.data.values, atol=1e-10)
        with self.assertRaises(DataError) as ctx:
            load_ucihar(self.root, "train", acc_source="total")
        self.assertEqual(ctx.exception.code, "missing_file")

    def test_missing_file(self) -> None:
        """Should name the missing file."""
        write_ucihar(self.root, self.data, "train")
        self.signal("body_gyro_y_train.txt").unlink()
        with self.assertRaises(DataError) as ctx:
            load_ucihar(self.root, "train")
        self.assertEqual(ctx.exception.code, "missing_file")
        self.assertIn("body_gyro_y_train.txt", ctx.exception.message)

    def test_row_count_mismatch(self) -> None:
        """Should reject signal files with a different number of windows."""
        write_ucihar(self.root, self.data, "train")
        np.savetxt(self.signal("total_acc_x_train.txt"), self.data.values[:5, :, 0, 0])
        with self.assertRaises(DataError) as ctx:
            load_ucihar(self.root, "train")
        self.assertEqual(ctx.exception.code, "row_count_mismatch")

    def test_bad_row_length(self) -> None:
        """Should require 128 values per row."""
        write_ucihar(self.root, self.data, "train")
        np.savetxt(self.signal("total_acc_z_train.txt"), self.data.values[:, :127, 0, 2])
        with self.assertRaises(DataError) as ctx:
            load_ucihar(self.root, "train")
        self.assertEqual(ctx.exception.code, "bad_row_length")

    def test_non_numeric_token(self) -> None:
        """Should report the offending token."""
        write_ucihar(self.root, self.data, "train")
        path = self.signal("body_gyro_x_train.txt")
        lines = path.read_text().splitlines()
        lines[3] = "abc " + lines[3].split(" ", 1)[1]
        path.write_text("\n".join(lines) + "\n")
        with self.assertRaises(DataError) as ctx:
            load_ucihar(self.root, "train")
        self.assertEqual(ctx.exception.code, "non_numeric")
        self.assertEqual(ctx.exception.context["row"], 4)

    def test_bad_label(self) -> None:
        """Labels must lie in 1..6."""
        bad = DatasetSplit(
            values=self.data.values,
            labels=np.where(self.data.labels == 6, 7, self.data.labels),
            subjects=self.data.subjects,
        )
        write_ucihar(self.root, bad, "train")
        with self.assertRaises(DataError) as ctx:
            load_ucihar(self.root, "train")
        self.assertEqual(ctx.exception.code, "bad_label")

    def test_missing_subject_file_warns(self) -> None:
        """Should fall back to subject 0 with a warning."""
        write_ucihar(self.root, self.data, "train", subjects=False)
        with self.assertLogs("catequiv.data.ucihar", level="WARNING"):
            loaded = load_ucihar(self.root, "train")
        np.testing.assert_array_equal(loaded.subjects, 0)


class DatasetSplitTests(SimpleTestCase):
    def setUp(self) -> None:
        self.data = synthetic_split(per_class=10, length=16, seed=0)

    def test_window_access(self) -> None:
        """Indexing returns a Window with label and subject."""
        window = self.data[3]
        self.assertEqual(window.length, 16)
        self.assertEqual(window.label, int(self.data.labels[3]))
        self.assertEqual(len(self.data.windows), 60)
        rebuilt = DatasetSplit.from_windows(self.data.windows)
        np.testing.assert_array_equal(rebuilt.values, self.data.values)

    def test_stratified_split(self) -> None:
        """Should hold out the same fraction of every class, disjointly."""
        train, val = stratified_split(self.data, 0.2, Rng(0))
        self.assertEqual(val.class_counts(), [2] * 6)
        self.assertEqual(train.class_counts(), [8] * 6)
        self.assertEqual(val.split, "val")
        seen = {tuple(v.ravel()[:4]) for v in train.values}
        self.assertFalse(any(tuple(v.ravel()[:4]) in seen for v in val.values))

    def test_stratified_split_is_deterministic(self) -> None:
        """Same rng seed, same partition."""
        _, a = stratified_split(self.data, 0.1, Rng(5))
        _, b = stratified_split(self.data, 0.1, Rng(5))
        np.testing.assert_array_equal(a.values, b.values)

    def test_stratified_split_keeps_one_per_side(self) -> None:
        """A class with two members puts one on each side."""
        small = synthetic_split(per_class=2, length=16)
        train, val = stratified_split(small, 0.01, Rng(0))
        self.assertEqual(val.class_counts(), [1] * 6)
        self.assertEqual(train.class_counts(), [1] * 6)
