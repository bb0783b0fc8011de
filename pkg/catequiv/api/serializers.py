from __future__ import annotations

import math

import numpy as np
from rest_framework import serializers

from catequiv.data.ucihar import ACC_SOURCES
from catequiv.exceptions import ConfigError, ShapeError
from catequiv.networks.spec import INPUT_MODES, ModelKind, ModelSpec
from catequiv.nn.functional import PADDING_MODES
from catequiv.services.train import AUGMENT_MODES, WEIGHT_DECAY_MODES

DTYPES = ("float32", "float64")


def _int_list(**kwargs) -> serializers.ListField:
    return serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=1, required=False, **kwargs)


class ModelSpecSerializer(serializers.Serializer):
    """
    Arquitetura. Campos omitidos ficam com os defaults do ModelSpec.

    Validação cruzada (kernels ímpares, dilatação·(κ−1) < T, ramos
    consistentes) é delegada a ModelSpec.validate().
    """

    kind = serializers.ChoiceField(choices=[k.value for k in ModelKind], required=False)
    length = serializers.IntegerField(min_value=3, required=False)
    num_classes = serializers.IntegerField(min_value=2, required=False)
    c1 = serializers.IntegerField(min_value=1, required=False)
    c2 = _int_list()
    k1 = serializers.IntegerField(min_value=1, required=False)
    k2 = _int_list()
    dilations = _int_list()
    box = serializers.IntegerField(min_value=1, required=False)
    dropout = serializers.FloatField(min_value=0.0, max_value=0.99, required=False)
    gn_eps = serializers.FloatField(min_value=0.0, required=False)
    padding = serializers.ChoiceField(choices=PADDING_MODES, required=False)
    input_mode = serializers.ChoiceField(choices=INPUT_MODES, required=False)
    tie_axes = serializers.BooleanField(required=False)
    axis_l2 = serializers.BooleanField(required=False)
    multiscale = serializers.BooleanField(required=False)
    group_norm = serializers.BooleanField(required=False)
    smoothing = serializers.BooleanField(required=False)
    baseline_widths = _int_list()
    baseline_kernels = _int_list()

    def validate(self, attrs):
        try:
            ModelSpec(**attrs).validate()
        except (ConfigError, ShapeError) as exc:
            raise serializers.ValidationError({"code": exc.code, "detail": exc.message}) from exc
        return attrs


class TrainConfigSerializer(serializers.Serializer):
    lr = serializers.FloatField(min_value=0.0, required=False)
    weight_decay = serializers.FloatField(min_value=0.0, required=False)
    beta1 = serializers.FloatField(min_value=0.0, max_value=0.999999, required=False)
    beta2 = serializers.FloatField(min_value=0.0, max_value=0.999999, required=False)
    adam_eps = serializers.FloatField(min_value=0.0, required=False)
    batch_size = serializers.IntegerField(min_value=1, required=False)
    clip_norm = serializers.FloatField(min_value=0.0, required=False)
    plateau_factor = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    plateau_patience = serializers.IntegerField(min_value=1, required=False)
    early_stop_patience = serializers.IntegerField(min_value=1, required=False)
    dropout = serializers.FloatField(min_value=0.0, max_value=0.99, required=False)
    max_epochs = serializers.IntegerField(min_value=1, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)
    augment = serializers.BooleanField(required=False)
    augment_mode = serializers.ChoiceField(choices=AUGMENT_MODES, required=False)
    weight_decay_mode = serializers.ChoiceField(choices=WEIGHT_DECAY_MODES, required=False)
    min_delta = serializers.FloatField(min_value=0.0, required=False)
    dtype = serializers.ChoiceField(choices=DTYPES, required=False)

    def validate(self, attrs):
        for name in ("lr", "adam_eps", "clip_norm", "plateau_factor"):
            if name in attrs and attrs[name] <= 0:
                raise serializers.ValidationError({name: "Deve ser positivo."})
        return attrs


class OodConfigSerializer(serializers.Serializer):
    shift_range = serializers.IntegerField(min_value=0, required=False)
    gain_lo = serializers.FloatField(min_value=0.0, required=False)
    gain_hi = serializers.FloatField(min_value=0.0, required=False)
    rotate = serializers.BooleanField(required=False)
    rotation_max_angle = serializers.FloatField(min_value=0.0, max_value=180.0, required=False, allow_null=True)
    seed = serializers.IntegerField(min_value=0, required=False)

    def validate(self, attrs):
        # camadas parciais só conhecem um dos ganhos; o par é checado na camada resolvida
        for name in ("gain_lo", "gain_hi"):
            if name in attrs and attrs[name] <= 0:
                raise serializers.ValidationError({name: "Deve ser positivo."})
        if "gain_lo" in attrs and "gain_hi" in attrs and attrs["gain_lo"] > attrs["gain_hi"]:
            raise serializers.ValidationError({"gain_lo": "Ganhos devem satisfazer 0 < lo ≤ hi."})
        return attrs


class SignalConfigSerializer(serializers.Serializer):
    data_root = serializers.CharField(required=False, allow_null=True, allow_blank=False)
    acc_source = serializers.ChoiceField(choices=ACC_SOURCES, required=False)
    epsilon = serializers.FloatField(min_value=0.0, required=False)
    val_fraction = serializers.FloatField(min_value=0.0, max_value=0.9, required=False)

    def validate_epsilon(self, value):
        if value <= 0:
            raise serializers.ValidationError("Deve ser positivo.")
        return value


class RunConfigSerializer(serializers.Serializer):
    """
    Configuração completa de uma execução (defaults → JSON → flags).

    {
        "seed": 1,
        "output_dir": "runs/a",
        "model": {...}, "train": {...}, "ood": {...}, "signal": {...}
    }
    """

    seed = serializers.IntegerField(min_value=0, required=False)
    output_dir = serializers.CharField(required=False, allow_null=True, allow_blank=False)
    model = ModelSpecSerializer(required=False)
    train = TrainConfigSerializer(required=False)
    ood = OodConfigSerializer(required=False)
    signal = SignalConfigSerializer(required=False)


def json_safe(value):
    """Converte recursivamente escalares numpy em Python e floats não finitos (inf, NaN) em None."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, dict):
        return {key: json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class FiniteFloatField(serializers.FloatField):
    """FloatField que representa inf/NaN como null (JSON estrito)."""

    def to_representation(self, value):
        return json_safe(float(value))


class JsonValueField(serializers.Field):
    def to_representation(self, value):
        return json_safe(value)


class CheckResultSerializer(serializers.Serializer):
    name = serializers.CharField()
    trials = serializers.IntegerField()
    max_abs = FiniteFloatField()
    max_rel = FiniteFloatField()
    tolerance = serializers.FloatField()
    passed = serializers.BooleanField()
    seed = serializers.IntegerField(allow_null=True)
    details = serializers.DictField(child=JsonValueField())
