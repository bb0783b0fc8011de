"""
Tests for catequiv.ood (rotation sampler, raw-stream actions, perturbation
draws, evaluation cache and sweep grids).
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from django.test import SimpleTestCase

from catequiv.data import Window
from catequiv.exceptions import ConfigError
from catequiv.nn import Rng
from catequiv.ood import (
    OodConfig,
    Perturbation,
    apply_gain,
    apply_rotation,
    apply_shift,
    axis_angle_rotation,
    draw_perturbation,
    parse_grid,
    perturb,
    perturb_values,
    perturbation_cache,
    sample_bounded_rotation,
    sample_rotation,
    sample_rotations,
    sweep_config,
)
from catequiv.tests.helpers import random_values


class RotationTests(SimpleTestCase):
    def test_orthogonal_with_unit_determinant(self) -> None:
        """RᵀR == I and det R == +1."""
        rng = Rng(0)
        for _ in range(1000):
            r = sample_rotation(rng)
            np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
            self.assertAlmostEqual(np.linalg.det(r), 1.0, delta=1e-12)

    def test_batch_sampler(self) -> None:
        """Batched draws are rotations too."""
        rs = sample_rotations(Rng(1), 500)
        np.testing.assert_allclose(np.linalg.det(rs), 1.0, atol=1e-12)
        np.testing.assert_allclose(np.einsum("nji,njk->nik", rs, rs), np.broadcast_to(np.eye(3), rs.shape), atol=1e-12)

    def test_haar_mean_is_zero(self) -> None:
        """The Haar measure on SO(3) has zero mean."""
        mean = sample_rotations(Rng(2), 20000).mean(axis=0)
        self.assertLess(np.abs(mean).max(), 0.02)

    def test_axis_angle(self) -> None:
        """90° about z maps x̂ to ŷ."""
        r = axis_angle_rotation([0, 0, 1], math.pi / 2)
        np.testing.assert_allclose(r @ [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], atol=1e-12)

    def test_bounded_rotation_angle(self) -> None:
        """Rotation angle never exceeds the bound; 0 is the identity."""
        rng = Rng(3)
        for _ in range(200):
            r = sample_bounded_rotation(rng, 30.0)
            angle = math.degrees(math.acos(np.clip((np.trace(r) - 1) / 2, -1, 1)))
            self.assertLessEqual(angle, 30.0 + 1e-9)
        np.testing.assert_array_equal(sample_bounded_rotation(rng, 0.0), np.eye(3))


class ActionTests(SimpleTestCase):
    def setUp(self) -> None:
        self.values = random_values(0, 4, 32)

    def test_shift_rolls_time_axis(self) -> None:
        """x(t) ↦ x(t − Δ)."""
        shifted = apply_shift(self.values, 3)
        np.testing.assert_array_equal(shifted[:, 3], self.values[:, 0])

    def test_gain_per_sensor(self) -> None:
        """ACC scales by g_ACC and GYR by g_GYR."""
        out = apply_gain(self.values, (2.0, 0.5))
        np.testing.assert_allclose(out[..., 0, :], 2.0 * self.values[..., 0, :])
        np.testing.assert_allclose(out[..., 1, :], 0.5 * self.values[..., 1, :])

    def test_rotation_applies_to_both_sensors(self) -> None:
        """Each time step of each sensor becomes R·x."""
        r = sample_rotation(Rng(1))
        out = apply_rotation(self.values, r)
        np.testing.assert_allclose(out[2, 7, 1], r @ self.values[2, 7, 1], atol=1e-12)
        np.testing.assert_allclose(out[0, 0, 0], r @ self.values[0, 0, 0], atol=1e-12)

    def test_application_orders_agree(self) -> None:
        """All 6 orders of shift, gain and rotation give the same window."""
        rng = Rng(4)
        for i in range(100):
            p = draw_perturbation(OodConfig(), rng)
            window = random_values(i, 1, 32)[0]
            reference = p.apply(window)
            for order in itertools.permutations(("shift", "gain", "rotation")):
                np.testing.assert_allclose(p.apply(window, order), reference, atol=1e-12)

    def test_unknown_operation(self) -> None:
        """Should raise invalid_config."""
        p = Perturbation(delta=0, gains=(1.0, 1.0), rotation=np.eye(3))
        with self.assertRaises(ConfigError):
            p.apply(self.values[0], ("shift", "scale"))


class DrawTests(SimpleTestCase):
    def test_ranges(self) -> None:
        """Δ in [−s, s] and gains in [lo, hi]."""
        rng = Rng(0)
        deltas = set()
        for _ in range(500):
            p = draw_perturbation(OodConfig(), rng)
            deltas.add(p.delta)
            self.assertTrue(all(0.7 <= g <= 1.4 for g in p.gains))
        self.assertEqual(min(deltas), -18)
        self.assertEqual(max(deltas), 18)

    def test_disabled_rotation(self) -> None:
        """rotate=False keeps the identity matrix."""
        p = draw_perturbation(OodConfig(rotate=False), Rng(0))
        np.testing.assert_array_equal(p.rotation, np.eye(3))

    def test_identity_config(self) -> None:
        """The identity configuration returns an equal copy."""
        values = random_values(1, 3, 32)
        out = perturb_values(values, OodConfig.identity(), Rng(0))
        np.testing.assert_array_equal(out, values)
        self.assertTrue(OodConfig.identity().is_identity)
        self.assertFalse(OodConfig().is_identity)

    def test_draw_depends_only_on_seed_and_index(self) -> None:
        """Window i gets the same perturbation regardless of batch size."""
        values = random_values(2, 6, 32)
        full = perturb_values(values, OodConfig(), Rng(9))
        head = perturb_values(values[:3], OodConfig(), Rng(9))
        np.testing.assert_array_equal(full[:3], head)
        self.assertFalse(np.allclose(perturb_values(values, OodConfig(), Rng(10)), full))

    def test_perturb_window(self) -> None:
        """perturb keeps label and subject."""
        window = Window(random_values(3, 1, 32)[0], label=4, subject=9, expected_length=32)
        out = perturb(window, OodConfig(), Rng(0))
        self.assertEqual((out.label, out.subject), (4, 9))
        self.assertFalse(np.allclose(out.values, window.values))

    def test_validation(self) -> None:
        """Rejects inverted gains, oversized shifts and angles above 180°."""
        for cfg in (OodConfig(gain_lo=1.5, gain_hi=1.0), OodConfig(shift_range=128), OodConfig(rotation_max_angle=200)):
            with self.assertRaises(ConfigError):
                cfg.validate()


class CacheTests(SimpleTestCase):
    def setUp(self) -> None:
        perturbation_cache.clear()

    def tearDown(self) -> None:
        perturbation_cache.clear()

    def test_same_key_reuses_draw(self) -> None:
        """Identical (data, cfg, seed) returns the cached array."""
        values = random_values(0, 4, 32)
        first = perturbation_cache.get(values, OodConfig(), seed=1)
        self.assertIs(perturbation_cache.get(values.copy(), OodConfig(seed=5), seed=1), first)
        self.assertFalse(first.flags.writeable)

    def test_seed_changes_draw(self) -> None:
        """Another seed gives another perturbed set."""
        values = random_values(0, 4, 32)
        a = perturbation_cache.get(values, OodConfig(), seed=1)
        b = perturbation_cache.get(values, OodConfig(), seed=2)
        self.assertFalse(np.allclose(a, b))


class GridTests(SimpleTestCase):
    def test_shift_range(self) -> None:
        """start:stop:step is inclusive."""
        self.assertEqual(parse_grid("shift", "0:18:6"), [0, 6, 12, 18])
        self.assertEqual(parse_grid("shift", "0,3, 9"), [0, 3, 9])

    def test_gain_pairs_and_factors(self) -> None:
        """lo:hi pairs and g-ranges."""
        self.assertEqual(parse_grid("gain", "0.8:1.25,0.5:2"), [(0.8, 1.25), (0.5, 2.0)])
        self.assertEqual(parse_grid("gain", "1:2:0.5"), [1.0, 1.5, 2.0])

    def test_rotation_angles(self) -> None:
        """Plain list of maximum angles."""
        self.assertEqual(parse_grid("rotation", "0,45,180"), [0.0, 45.0, 180.0])

    def test_bad_grids(self) -> None:
        """Should raise bad_grid."""
        for axis, text in [("shift", "a:b:c"), ("shift", "5:1:1"), ("tilt", "1"), ("shift", ""), ("gain", "1:2:3:4")]:
            with self.assertRaises(ConfigError) as ctx:
                parse_grid(axis, text)
            self.assertEqual(ctx.exception.code, "bad_grid")

    def test_sweep_config(self) -> None:
        """Only the swept axis departs from the identity."""
        self.assertEqual(sweep_config("shift", 6).shift_range, 6)
        gain = sweep_config("gain", 2.0)
        self.assertEqual((gain.gain_lo, gain.gain_hi), (0.5, 2.0))
        self.assertEqual(gain.shift_range, 0)
        self.assertTrue(sweep_config("rotation", 0.0).is_identity)
        rotation = sweep_config("rotation", 30.0)
        self.assertTrue(rotation.rotate)
        self.assertEqual(rotation.rotation_max_angle, 30.0)
