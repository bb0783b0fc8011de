"""
Tests for catequiv.metrics.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from catequiv.exceptions import DataError
from catequiv.metrics import (
    MetricsReport,
    compute_metrics,
    confusion_matrix,
    macro_average,
    write_report_csv,
    write_report_json,
    write_sweep_csv,
)

# Per-class precision/recall of a published CatEquiv run under the default OOD shift.
PUBLISHED_PRECISION = [0.9659, 0.9014, 0.9607, 0.3826, 0.5729, 0.6205]
PUBLISHED_RECALL = [0.9698, 0.9703, 0.8738, 0.3320, 0.7387, 0.5177]


class MetricsTests(SimpleTestCase):
    def test_confusion_matrix(self) -> None:
        """Rows are true classes, columns predictions."""
        cm = confusion_matrix([0, 0, 1, 2, 2, 2], [0, 1, 1, 2, 2, 0], 3)
        np.testing.assert_array_equal(cm, [[1, 1, 0], [0, 1, 0], [1, 0, 2]])

    def test_constant_predictor(self) -> None:
        """Balanced 3-class set, always predicting class 0."""
        y_true = [0, 0, 1, 1, 2, 2]
        report = compute_metrics(y_true, [0] * 6, num_classes=3, class_names=["a", "b", "c"])
        self.assertAlmostEqual(report.accuracy, 1 / 3)
        # class 0: P = 1/3, R = 1 → F1 = 0.5; classes 1 and 2 are 0/0 → 0
        self.assertAlmostEqual(report.f1[0], 0.5)
        self.assertEqual(report.f1[1:], [0.0, 0.0])
        self.assertAlmostEqual(report.macro_f1, 0.5 / 3, delta=1e-12)
        self.assertEqual(report.precision[1], 0.0)

    def test_invariants(self) -> None:
        """Row sums equal support and macro-F1 is the mean of class F1s."""
        rng = np.random.default_rng(0)
        y_true = rng.integers(0, 6, size=300)
        y_pred = np.where(rng.uniform(size=300) < 0.7, y_true, rng.integers(0, 6, size=300))
        report = compute_metrics(y_true, y_pred)
        np.testing.assert_array_equal(np.sum(report.confusion, axis=1), report.support)
        self.assertEqual(report.total, 300)
        self.assertAlmostEqual(report.macro_f1, float(np.mean(report.f1)), delta=1e-12)
        self.assertEqual(len(report.class_names), 6)

    def test_matches_brute_force_counts(self) -> None:
        """Should agree exactly with per-class counting loops on 1000 random label/prediction sets."""
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            k = int(rng.integers(2, 8))
            n = int(rng.integers(1, 200))
            y_true = rng.integers(0, k, size=n).tolist()
            y_pred = rng.integers(0, k, size=n).tolist()
            report = compute_metrics(y_true, y_pred, num_classes=k, class_names=[str(c) for c in range(k)])

            precision, recall, f1 = [], [], []
            for c in range(k):
                tp = fp = fn = 0
                for t, p in zip(y_true, y_pred):
                    if t == c and p == c:
                        tp += 1
                    elif p == c:
                        fp += 1
                    elif t == c:
                        fn += 1
                prec = tp / (tp + fp) if tp + fp else 0.0
                rec = tp / (tp + fn) if tp + fn else 0.0
                precision.append(prec)
                recall.append(rec)
                f1.append(2.0 * prec * rec / (prec + rec) if prec + rec else 0.0)
            correct = sum(1 for t, p in zip(y_true, y_pred) if t == p)

            self.assertEqual(report.precision, precision)
            self.assertEqual(report.recall, recall)
            self.assertEqual(report.f1, f1)
            self.assertEqual(report.macro_f1, sum(f1) / k)
            self.assertEqual(report.accuracy, correct / n)

    def test_out_of_range_labels(self) -> None:
        """Should raise bad_label for indices outside [0, K)."""
        for y_true, y_pred in (([0, 3], [0, 1]), ([0, 1], [0, -1]), ([0, 1], [0, 6])):
            with self.assertRaises(DataError) as ctx:
                compute_metrics(y_true, y_pred, num_classes=3)
            self.assertEqual(ctx.exception.code, "bad_label")

    def test_published_macro_averages(self) -> None:
        """Macro averages of the published per-class table are 0.7340 / 0.7337."""
        self.assertAlmostEqual(macro_average(PUBLISHED_PRECISION), 0.7340, delta=5e-3)
        self.assertAlmostEqual(macro_average(PUBLISHED_RECALL), 0.7337, delta=5e-3)

    def test_empty_input(self) -> None:
        """Should raise empty_split."""
        with self.assertRaises(DataError) as ctx:
            compute_metrics([], [])
        self.assertEqual(ctx.exception.code, "empty_split")

    def test_length_mismatch(self) -> None:
        """Should raise row_count_mismatch."""
        with self.assertRaises(DataError) as ctx:
            compute_metrics([0, 1], [0])
        self.assertEqual(ctx.exception.code, "row_count_mismatch")

    def test_dict_round_trip(self) -> None:
        """from_dict(to_dict()) rebuilds the report."""
        report = compute_metrics([0, 1, 2, 3, 4, 5], [0, 1, 2, 3, 5, 5])
        self.assertEqual(MetricsReport.from_dict(json.loads(json.dumps(report.to_dict()))), report)

    def test_per_class_frame(self) -> None:
        """One row per class plus a macro row."""
        frame = compute_metrics([0, 1, 2, 3, 4, 5], [0, 1, 2, 3, 4, 4]).per_class_frame()
        self.assertEqual(len(frame), 7)
        self.assertEqual(frame.iloc[-1]["class"], "macro")
        self.assertEqual(int(frame.iloc[-1]["support"]), 6)


class WriterTests(SimpleTestCase):
    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.report = compute_metrics([0, 1, 2, 3, 4, 5], [0, 1, 2, 3, 4, 4])

    def tearDown(self) -> None:
        self.tmp.cleanup()

    def test_json_report(self) -> None:
        """Includes confusion matrix and extra fields."""
        path = write_report_json(self.report, self.dir / "out" / "report.json", mode="ood")
        data = json.loads(path.read_text())
        self.assertEqual(data["mode"], "ood")
        self.assertEqual(data["confusion"][5], [0, 0, 0, 0, 1, 0])
        self.assertAlmostEqual(data["accuracy"], 5 / 6)

    def test_csv_report(self) -> None:
        """Per-class CSV readable by pandas."""
        frame = pd.read_csv(write_report_csv(self.report, self.dir / "report.csv"))
        self.assertEqual(list(frame.columns), ["class", "precision", "recall", "f1", "support"])
        self.assertEqual(frame["class"].iloc[0], "WALKING")

    def test_sweep_csv(self) -> None:
        """One row per grid point."""
        path = write_sweep_csv("shift", [0, 6], [self.report, self.report], self.dir / "sweep_shift.csv")
        frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), ["shift", "accuracy", "macro_f1"])
        self.assertEqual(len(frame), 2)
