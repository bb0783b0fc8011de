"""
Tests for catequiv.networks.

Covers:
- ModelSpec validation, serialization and parameter counts
- Parameter naming, tying and initialization
- Eval-mode invariances of CatEquiv and the baselines
- Full-model gradient check on a tiny configuration
- Checkpoint save/load and its error codes
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from catequiv.exceptions import CheckpointError, ConfigError, ShapeError
from catequiv.networks import (
    CatEquivNet,
    CircCNN,
    ModelKind,
    ModelSpec,
    PlainCNN,
    build_network,
    load_checkpoint,
    param_count,
    read_checkpoint,
    save_checkpoint,
)
from catequiv.nn import Rng, Tape, grad_check
from catequiv.nn import functional as F
from catequiv.ood import apply_gain, apply_rotation, apply_shift, sample_rotations
from catequiv.services.ablation import DEFAULT_VARIANTS
from catequiv.tests.helpers import random_values, tiny_network, tiny_spec


def logits_of(network, values) -> np.ndarray:
    return network.logits(network.prepare(values))


class ModelSpecTests(SimpleTestCase):
    def test_default_parameter_counts(self) -> None:
        """Reference configuration: 46386 for CatEquiv, 41990 for each baseline."""
        self.assertEqual(param_count(ModelSpec()), 46386)
        self.assertEqual(param_count(ModelSpec(kind="plaincnn")), 41990)
        self.assertEqual(param_count(ModelSpec(kind="circcnn")), 41990)

    def test_count_matches_stored_parameters(self) -> None:
        """param_count equals the number of stored scalars for every variant."""
        base = tiny_spec(length=32)
        specs = [variant.apply(base) for variant in DEFAULT_VARIANTS]
        specs += [base.replace(kind="plaincnn"), base.replace(kind="circcnn", input_mode="raw")]
        for spec in specs:
            network = build_network(spec, Rng(0))
            stored = sum(p.data.size for p in network.parameters())
            self.assertEqual(stored, param_count(spec), msg=spec)

    def test_default_network_count(self) -> None:
        """Built default network should store exactly param_count scalars."""
        network = build_network(ModelSpec(), Rng(0), dtype=np.float32)
        self.assertEqual(sum(p.data.size for p in network.parameters()), 46386)
        self.assertEqual(network.num_parameters(), 46386)

    def test_even_kernel_rejected(self) -> None:
        """Should raise even_kernel."""
        with self.assertRaises(ShapeError) as ctx:
            ModelSpec(k1=8).validate()
        self.assertEqual(ctx.exception.code, "even_kernel")

    def test_dilation_too_large_rejected(self) -> None:
        """dilation·(κ−1) must be < T."""
        with self.assertRaises(ShapeError) as ctx:
            tiny_spec(length=16, k2=(3, 3, 9)).validate()
        self.assertEqual(ctx.exception.code, "dilation_too_large")

    def test_branch_lengths_must_match(self) -> None:
        """Should raise invalid_config."""
        with self.assertRaises(ConfigError):
            ModelSpec(c2=(64, 32)).validate()

    def test_dict_round_trip(self) -> None:
        """to_dict/from_dict should preserve the spec."""
        spec = tiny_spec(padding="zeros", axis_l2=False)
        self.assertEqual(ModelSpec.from_dict(json.loads(json.dumps(spec.to_dict()))), spec)

    def test_unknown_field_rejected(self) -> None:
        """Should raise invalid_config."""
        with self.assertRaises(ConfigError) as ctx:
            ModelSpec.from_dict({"kind": "catequiv", "width": 3})
        self.assertEqual(ctx.exception.code, "invalid_config")

    def test_unknown_kind(self) -> None:
        """Should raise unknown_model."""
        with self.assertRaises(ConfigError) as ctx:
            ModelKind.parse("resnet")
        self.assertEqual(ctx.exception.code, "unknown_model")

    def test_baseline_padding_is_fixed(self) -> None:
        """PlainCNN always uses zeros, CircCNN always circular."""
        self.assertEqual(ModelSpec(kind="plaincnn", padding="circular").conv_padding, "zeros")
        self.assertEqual(ModelSpec(kind="circcnn", padding="zeros").conv_padding, "circular")


class CatEquivNetTests(SimpleTestCase):
    def setUp(self) -> None:
        self.network = tiny_network(seed=1)
        self.values = random_values(2, 6)

    def test_parameter_names(self) -> None:
        """Default spec should expose the canonical parameter names."""
        self.assertEqual(
            list(CatEquivNet.shapes(ModelSpec())),
            [
                "stage1.weight",
                "gn.weight",
                "gn.bias",
                "stage2.1.weight",
                "stage2.1.bias",
                "stage2.2.weight",
                "stage2.2.bias",
                "stage2.3.weight",
                "stage2.3.bias",
                "head.weight",
                "head.bias",
            ],
        )
        self.assertEqual(CatEquivNet.shapes(ModelSpec())["stage2.1.weight"], (64, 32, 9))
        self.assertEqual(CatEquivNet.shapes(ModelSpec())["head.weight"], (6, 130))

    def test_initialization_is_seeded(self) -> None:
        """Same seed, same parameters; GroupNorm starts at the identity."""
        other = tiny_network(seed=1)
        for name, value in self.network.state_dict().items():
            np.testing.assert_array_equal(value, other.state_dict()[name])
        np.testing.assert_array_equal(self.network.params["gn.weight"].data, 1.0)
        np.testing.assert_array_equal(self.network.params["gn.bias"].data, 0.0)

    def test_tied_banks(self) -> None:
        """Stage 1 is one bank tiled over six axes; Stage 2 is shared by both sensors."""
        bank = self.network.stage1_bank().numpy()
        c1 = self.network.spec.c1
        for axis in range(6):
            np.testing.assert_array_equal(bank[axis * c1 : (axis + 1) * c1], bank[:c1])
        weight, bias = self.network.stage2_bank(2)
        half = weight.shape[0] // 2
        np.testing.assert_array_equal(weight.numpy()[:half], weight.numpy()[half:])
        np.testing.assert_array_equal(bias.numpy()[:half], bias.numpy()[half:])

    def test_forward_shapes(self) -> None:
        """Logits (N, K) and descriptor (N, F + 2)."""
        x = self.network.prepare(self.values)
        self.assertEqual(self.network(x).shape, (6, 6))
        self.assertEqual(self.network.descriptor(x).shape, (6, 8))
        self.assertEqual(self.network.predict(x).shape, (6,))

    def test_bad_input_names_stage(self) -> None:
        """Should raise bad_stage_input on a wrong input shape."""
        with self.assertRaises(ShapeError) as ctx:
            self.network(np.zeros((2, 6, 16)))
        self.assertEqual(ctx.exception.code, "bad_stage_input")

    def test_rotation_invariance(self) -> None:
        """logits(Rx) == logits(x) on 200 random (input, rotation) pairs, reflections included."""
        values = random_values(11, 200, 16)
        rotations = sample_rotations(Rng(3), 200)
        base = logits_of(self.network, values)
        rotated = logits_of(self.network, apply_rotation(values, rotations))
        self.assertLess(np.abs(rotated - base).max(), 1e-9)
        reflections = rotations @ np.diag([1.0, -1.0, 1.0])
        reflected = logits_of(self.network, apply_rotation(values, reflections))
        self.assertLess(np.abs(reflected - base).max(), 1e-9)

    def test_shift_invariance(self) -> None:
        """logits(τx) == logits(x) for every τ."""
        base = logits_of(self.network, self.values)
        for tau in range(16):
            np.testing.assert_allclose(logits_of(self.network, apply_shift(self.values, tau)), base, atol=1e-9)

    def test_gain_affinity_at_head(self) -> None:
        """logits(λ⊙x) − logits(x) == W_head · E_log · log λ."""
        gains = np.array([1.8, 0.6])
        delta = logits_of(self.network, apply_gain(self.values, gains)) - logits_of(self.network, self.values)
        expected = self.network.params["head.weight"].data[:, -2:] @ np.log(gains)
        np.testing.assert_allclose(delta, np.broadcast_to(expected, delta.shape), atol=1e-9)

    def test_untied_axes_break_rotation_invariance(self) -> None:
        """Independent per-axis filters should not be rotation invariant."""
        untied = tiny_network(seed=1, tie_axes=False)
        rotations = sample_rotations(Rng(3), len(self.values))
        diff = logits_of(untied, apply_rotation(self.values, rotations)) - logits_of(untied, self.values)
        self.assertGreater(np.abs(diff).max(), 1e-6)

    def test_box_commutes_with_sensor_mean(self) -> None:
        """Smoothing before or after the sensor mean gives the same features."""
        y = Rng(4).normal(size=(3, 2, 5, 16))
        after = F.box_smooth(F.mean(y, axis=1), 3).numpy()
        before = F.mean(F.reshape(F.box_smooth(F.reshape(y, (3, 10, 16)), 3), (3, 2, 5, 16)), axis=1).numpy()
        np.testing.assert_allclose(after, before, atol=1e-12)

    def test_dropout_only_in_training(self) -> None:
        """Eval forward is deterministic; train forward with dropout differs."""
        network = tiny_network(seed=1, dropout=0.5)
        x = network.prepare(self.values)
        np.testing.assert_array_equal(network(x).numpy(), network(x).numpy())
        self.assertFalse(np.allclose(network(x, train=True, rng=Rng(0)).numpy(), network(x).numpy()))

    def test_full_model_gradient_check(self) -> None:
        """Tape gradients match central differences for every parameter (T=16, C₁=2)."""
        x = self.network.prepare(self.values)
        targets = np.array([0, 1, 2, 3, 4, 5])
        weights = [1.0, 0.5, 1.5, 1.0, 1.0, 1.0]

        def loss(_params):
            return F.cross_entropy(self.network(x), targets, weights)

        self.assertLess(grad_check(loss, self.network.params), 1e-4)

    def test_gradient_reaches_tied_banks(self) -> None:
        """The shared Stage-1 bank and the GroupNorm affine receive gradient."""
        x = self.network.prepare(self.values)
        with Tape() as tape:
            tape.backward(F.cross_entropy(self.network(x), np.arange(6)))
        for name in ("stage1.weight", "gn.weight", "head.weight"):
            grad = tape.grad(self.network.params[name])
            self.assertEqual(grad.shape, self.network.params[name].shape)
            self.assertGreater(np.abs(grad).max(), 0.0, msg=name)


class BaselineTests(SimpleTestCase):
    def setUp(self) -> None:
        self.values = random_values(5, 4)

    def test_circcnn_is_shift_invariant(self) -> None:
        """Circular padding + GAP gives shift-invariant logits."""
        network = tiny_network(seed=2, kind="circcnn")
        self.assertIsInstance(network, CircCNN)
        base = logits_of(network, self.values)
        for tau in (1, 5, 15):
            np.testing.assert_allclose(logits_of(network, apply_shift(self.values, tau)), base, atol=1e-9)

    def test_plaincnn_is_not_shift_invariant(self) -> None:
        """Zero padding breaks the invariance at the borders."""
        network = tiny_network(seed=2, kind="plaincnn")
        self.assertIsInstance(network, PlainCNN)
        diff = logits_of(network, apply_shift(self.values, 5)) - logits_of(network, self.values)
        self.assertGreater(np.abs(diff).max(), 1e-6)

    def test_baseline_parameter_names(self) -> None:
        """conv1/conv2/head with eight input channels."""
        shapes = PlainCNN.shapes(ModelSpec(kind="plaincnn"))
        self.assertEqual(shapes["conv1.weight"], (64, 8, 9))
        self.assertEqual(shapes["conv2.weight"], (64, 64, 9))
        self.assertEqual(shapes["head.weight"], (6, 64))

    def test_raw_input_uses_six_channels(self) -> None:
        """Without log-RMS the first convolution reads only the six axes."""
        network = tiny_network(seed=2, kind="circcnn", input_mode="raw")
        self.assertEqual(network.params["conv1.weight"].shape[1], 6)
        self.assertEqual(logits_of(network, self.values).shape, (4, 6))


class CheckpointTests(SimpleTestCase):
    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / "ckpt.npz"
        self.network = tiny_network(seed=3)

    def tearDown(self) -> None:
        self.tmp.cleanup()

    def test_round_trip(self) -> None:
        """Loaded network reproduces the logits exactly."""
        save_checkpoint(self.network, self.path, extra={"best_epoch": 4})
        loaded = load_checkpoint(self.path)
        self.assertIsInstance(loaded, CatEquivNet)
        self.assertEqual(loaded.spec, self.network.spec)
        values = random_values(0, 3)
        np.testing.assert_array_equal(logits_of(loaded, values), logits_of(self.network, values))
        meta, _ = read_checkpoint(self.path)
        self.assertEqual(meta["extra"], {"best_epoch": 4})
        self.assertEqual(meta["format"], "catequiv-checkpoint")

    def test_spec_mismatch(self) -> None:
        """Should raise spec_mismatch when the expected spec differs."""
        save_checkpoint(self.network, self.path)
        with self.assertRaises(CheckpointError) as ctx:
            load_checkpoint(self.path, expected_spec=self.network.spec.replace(box=5))
        self.assertEqual(ctx.exception.code, "spec_mismatch")

    def test_missing_file(self) -> None:
        """Should raise unsupported_format."""
        with self.assertRaises(CheckpointError) as ctx:
            load_checkpoint(self.path)
        self.assertEqual(ctx.exception.code, "unsupported_format")

    def test_foreign_archive(self) -> None:
        """An npz without metadata is not a checkpoint."""
        np.savez(self.path, weights=np.zeros(3))
        with self.assertRaises(CheckpointError) as ctx:
            load_checkpoint(self.path)
        self.assertEqual(ctx.exception.code, "unsupported_format")

    def test_missing_tensor(self) -> None:
        """Should raise missing_tensor when a declared tensor is absent."""
        save_checkpoint(self.network, self.path)
        meta, tensors = read_checkpoint(self.path)
        tensors.pop("head.bias")
        np.savez(self.path, __meta__=np.array(json.dumps(meta)), **tensors)
        with self.assertRaises(CheckpointError) as ctx:
            load_checkpoint(self.path)
        self.assertEqual(ctx.exception.code, "missing_tensor")

    def test_dtype_conversion(self) -> None:
        """dtype argument converts the stored parameters."""
        save_checkpoint(self.network, self.path)
        loaded = load_checkpoint(self.path, dtype=np.float32)
        self.assertEqual(loaded.dtype, np.float32)
