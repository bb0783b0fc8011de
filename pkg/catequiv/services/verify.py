"""
VerifierService — Certificação numérica das propriedades de simetria
sobre as camadas efetivamente implementadas.

Cada verificação devolve um CheckResult com o desvio máximo observado e a
tolerância usada; passa se, e somente se, desvio ≤ tolerância.

    core_naturality          Y(g) ∘ η_s = η_t ∘ X(g) no núcleo linearizado
    conv_shift_equivariance  conv(τx) = τ conv(x) nos bancos reais
    poset_naturality         η_TOTAL bloco-diagonal ⇔ quadrados comutam
    readout_invariance       z invariante a O(3) e C_T, afim em log λ
    gn_shift_commutation     GN(τx) = τ GN(x)
    norm_floor_equality      ‖𝒩(λx) − 𝒩(x)‖ em forma fechada
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from catequiv.data.windows import RMS_EPSILON, compute_rms, normalize_stream
from catequiv.exceptions import ConfigError
from catequiv.ids import derive_seed
from catequiv.networks import CatEquivNet, ModelSpec, Network, build_network
from catequiv.nn import functional as F
from catequiv.nn.rng import Rng
from catequiv.nn.tensor import Parameter
from catequiv.ood import apply_gain, apply_rotation, apply_shift, sample_rotations
from catequiv.symmetry import ARROWS, PosetObject, apply_morphism, inject, sample_morphism

logger = logging.getLogger(__name__)

DESCRIPTOR_BATCH = 32


@dataclass(frozen=True)
class CheckResult:
    name: str
    trials: int
    max_abs: float
    max_rel: float
    tolerance: float
    seed: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.max_abs <= self.tolerance)

    def to_dict(self) -> dict:
        """Representação JSON estrita: desvios não finitos viram null."""
        from catequiv.api.serializers import CheckResultSerializer

        return dict(CheckResultSerializer(self).data)


class _Deviation:
    """Acumula max|a − b| e o desvio relativo max|a − b| / max|b|."""

    def __init__(self) -> None:
        self.max_abs = 0.0
        self.max_rel = 0.0

    def update(self, actual, expected) -> float:
        actual = np.asarray(actual, dtype=np.float64)
        expected = np.asarray(expected, dtype=np.float64)
        if actual.shape != expected.shape:
            self.max_abs = self.max_rel = float("inf")
            return self.max_abs
        diff = float(np.max(np.abs(actual - expected))) if actual.size else 0.0
        if not np.isfinite(diff):
            diff = float("inf")
        scale = float(np.max(np.abs(expected))) if expected.size else 0.0
        self.max_abs = max(self.max_abs, diff)
        self.max_rel = max(self.max_rel, diff / scale if scale > 0 else diff)
        return diff

    def result(self, name: str, trials: int, tolerance: float, **details) -> CheckResult:
        return CheckResult(
            name=name,
            trials=trials,
            max_abs=self.max_abs,
            max_rel=self.max_rel,
            tolerance=tolerance,
            details=details,
        )


def promote(network: Network, dtype=np.float64) -> Network:
    """Cópia da rede com parâmetros em `dtype` (as verificações rodam em 64 bits)."""
    if network.dtype == dtype:
        return network
    params = {name: Parameter(p.data, name=name, dtype=dtype) for name, p in network.params.items()}
    return type(network)(network.spec, params)


def _require_catequiv(network: Network) -> CatEquivNet:
    if not isinstance(network, CatEquivNet):
        raise ConfigError(
            code="unknown_model",
            message=f"As verificações exigem uma rede CatEquiv, recebido {network.spec.kind.value}",
        )
    return promote(network)


def descriptors(network: Network, values, epsilon: float = RMS_EPSILON) -> np.ndarray:
    """Descritores z em modo de avaliação para janelas brutas (N, T, 2, 3)."""
    values = np.asarray(values, dtype=np.float64)
    chunks = [
        network.descriptor(network.prepare(values[i : i + DESCRIPTOR_BATCH], epsilon)).numpy()
        for i in range(0, values.shape[0], DESCRIPTOR_BATCH)
    ]
    return np.concatenate(chunks, axis=0)


# =============================================================================
# VERIFICAÇÕES
# =============================================================================


def check_core_naturality(network: Network, rng, trials: int = 50, tolerance: float = 1e-9, **_) -> CheckResult:
    """
    Y(g) ∘ η_s == η_t ∘ X(g) para morfismos g = (τ, λ, u) aleatórios.

    As primeiras 23 tentativas percorrem todas as setas do poset; as demais
    sorteiam a seta.
    """
    net = _require_catequiv(network)
    length = net.spec.length
    deviation = _Deviation()
    arrows_seen = set()
    for trial in range(trials):
        arrow = ARROWS[trial] if trial < len(ARROWS) else None
        g = sample_morphism(rng, length, arrow)
        arrows_seen.add((g.source.value, g.target.value))
        x = rng.normal(size=(g.source.dim, length))
        lhs = apply_morphism(net.linear_core(x, g.source), g)
        rhs = net.linear_core(apply_morphism(x, g), g.target)
        deviation.update(lhs, rhs)
    return deviation.result(
        "core_naturality", trials, tolerance, arrows_covered=len(arrows_seen), arrows_total=len(ARROWS)
    )


def check_conv_shift_equivariance(network: Network, rng, trials: int = 3, tolerance: float = 1e-12, **_) -> CheckResult:
    """conv(τx) == τ conv(x) para todo τ, com os bancos materializados da rede."""
    net = _require_catequiv(network)
    spec = net.spec
    padding = spec.conv_padding
    layers = [("stage1", net.stage1_bank(), None, 6, 1)]
    for i, (_, _, dilation) in enumerate(spec.branches, start=1):
        weight, bias = net.stage2_bank(i)
        layers.append((f"stage2.{i}", weight, bias, 2, dilation))

    deviation = _Deviation()
    for _ in range(trials):
        for _, weight, bias, groups, dilation in layers:
            x = rng.normal(size=(1, weight.shape[1] * groups, spec.length))
            shifted = np.stack([np.roll(x[0], tau, axis=-1) for tau in range(spec.length)])
            out = F.conv1d(x, weight, bias, groups=groups, dilation=dilation, padding=padding).numpy()[0]
            lhs = F.conv1d(shifted, weight, bias, groups=groups, dilation=dilation, padding=padding).numpy()
            rhs = np.stack([np.roll(out, tau, axis=-1) for tau in range(spec.length)])
            deviation.update(lhs, rhs)
    return deviation.result("conv_shift_equivariance", trials, tolerance, layers=[name for name, *_ in layers])


def naturality_square_deviation(eta_total: np.ndarray, eta_sensor: np.ndarray, sensor: PosetObject, x) -> float:
    """max |η_TOTAL(J x) − J(η_s x)| para um mapa pontual no tempo (matrizes de canais)."""
    lhs = eta_total @ inject(x, sensor, PosetObject.TOTAL)
    rhs = inject(eta_sensor @ np.asarray(x), sensor, PosetObject.TOTAL)
    return float(np.max(np.abs(lhs - rhs)))


def check_poset_naturality(
    network: Network | None, rng, trials: int = 20, tolerance: float = 1e-12, **_
) -> CheckResult:
    """
    (a) η_TOTAL = diag(η_ACC, η_GYR) aleatório: os quadrados em i_ACC, i_GYR comutam;
    (b) com bloco fora da diagonal 0.5·I o quadrado falha em alguma base;
    (c) os bancos reais do Stage 2 (groups=2) não misturam sensores.
    """
    length = network.spec.length if network is not None else 16
    sensors = (PosetObject.ACC, PosetObject.GYR)
    deviation = _Deviation()
    for _ in range(trials):
        blocks = {s: rng.normal(size=(3, 3)) for s in sensors}
        eta_total = np.zeros((6, 6))
        eta_total[:3, :3] = blocks[PosetObject.ACC]
        eta_total[3:, 3:] = blocks[PosetObject.GYR]
        for sensor in sensors:
            x = rng.normal(size=(3, length))
            deviation.update(eta_total @ inject(x, sensor, PosetObject.TOTAL), inject(blocks[sensor] @ x, sensor, PosetObject.TOTAL))

    mixed = np.zeros((6, 6))
    mixed[:3, :3] = np.eye(3)
    mixed[3:, 3:] = np.eye(3)
    mixed[3:, :3] = 0.5 * np.eye(3)
    detection = max(
        naturality_square_deviation(mixed, np.eye(3), sensor, np.tile(basis[:, None], (1, length)))
        for sensor in sensors
        for basis in np.eye(3)
    )
    detected = detection > 1e-6

    layers_checked = 0
    if network is not None:
        net = _require_catequiv(network)
        spec = net.spec
        for i, (width, _, dilation) in enumerate(spec.branches, start=1):
            bank, _ = net.stage2_bank(i)
            single = net.params[f"stage2.{i}.weight"]
            for block in range(2):
                h = rng.normal(size=(spec.stage2_in, spec.length))
                total = np.zeros((2 * spec.stage2_in, spec.length))
                total[block * spec.stage2_in : (block + 1) * spec.stage2_in] = h
                lhs = F.conv1d(total, bank, groups=2, dilation=dilation, padding=spec.conv_padding).numpy()
                rhs = np.zeros_like(lhs)
                rhs[block * width : (block + 1) * width] = F.conv1d(
                    h, single, dilation=dilation, padding=spec.conv_padding
                ).numpy()
                deviation.update(lhs, rhs)
            layers_checked += 1

    result = deviation.result(
        "poset_naturality",
        trials,
        tolerance,
        off_diagonal_deviation=detection,
        off_diagonal_detected=detected,
        stage2_layers_checked=layers_checked,
    )
    if not detected:
        return CheckResult(**{**result.__dict__, "max_abs": float("inf")})
    return result


def check_readout_invariance(
    network: Network, rng, trials: int = 200, tolerance: float = 1e-9, epsilon: float = RMS_EPSILON, shift_windows: int = 2, **_
) -> CheckResult:
    """
    Descritor z em modo de avaliação:
        (i)   z(Rx) = z(x) para rotações de Haar e reflexões (det −1)
        (ii)  z(τx) = z(x) para todo τ
        (iii) z(λ⊙x) − z(x) nulo exceto nas duas coordenadas log-RMS,
              que valem (log λ_ACC, log λ_GYR)
    """
    net = _require_catequiv(network)
    spec = net.spec
    values = rng.normal(size=(trials, spec.length, 2, 3))
    base = descriptors(net, values, epsilon)
    sub = {name: _Deviation() for name in ("rotation", "reflection", "shift", "gain")}

    rotations = sample_rotations(rng, trials)
    sub["rotation"].update(descriptors(net, apply_rotation(values, rotations), epsilon), base)
    reflections = rotations @ np.diag([1.0, 1.0, -1.0])
    sub["reflection"].update(descriptors(net, apply_rotation(values, reflections), epsilon), base)

    for w in range(min(shift_windows, trials)):
        shifted = np.stack([apply_shift(values[w], tau) for tau in range(spec.length)])
        sub["shift"].update(descriptors(net, shifted, epsilon), np.broadcast_to(base[w], (spec.length, base.shape[1])))

    log_gains = rng.uniform(np.log(0.5), np.log(2.0), size=(trials, 2))
    expected = np.zeros_like(base)
    if spec.uses_log_rms:
        expected[:, -2:] = log_gains
    sub["gain"].update(descriptors(net, apply_gain(values, np.exp(log_gains)), epsilon) - base, expected)

    deviation = _Deviation()
    deviation.max_abs = max(d.max_abs for d in sub.values())
    deviation.max_rel = max(d.max_rel for d in sub.values())
    return deviation.result(
        "readout_invariance",
        trials,
        tolerance,
        **{f"{name}_max_abs": d.max_abs for name, d in sub.items()},
    )


def check_gn_shift_commutation(network: Network | None, rng, trials: int = 10, tolerance: float = 1e-12, **_) -> CheckResult:
    """GN(τx) == τ GN(x) para τ ∈ {0, 1, T−1} mais um subconjunto aleatório."""
    if network is not None and "gn.weight" in network.params:
        net = promote(network)
        weight, bias = net.params["gn.weight"], net.params["gn.bias"]
        channels, length, eps = weight.shape[0], net.spec.length, net.spec.gn_eps
    else:
        channels, length, eps = 8, network.spec.length if network is not None else 128, 1e-5
        weight = rng.normal(size=channels)
        bias = rng.normal(size=channels)

    deviation = _Deviation()
    for _ in range(trials):
        x = rng.normal(size=(2, channels, length))
        taus = sorted({0, 1, length - 1, *rng.choice(length, size=min(5, length), replace=False).tolist()})
        out = F.group_norm(x, 2, weight, bias, eps=eps).numpy()
        for tau in taus:
            lhs = F.group_norm(np.roll(x, tau, axis=-1), 2, weight, bias, eps=eps).numpy()
            deviation.update(lhs, np.roll(out, tau, axis=-1))
    return deviation.result("gn_shift_commutation", trials, tolerance)


def norm_floor_closed_form(x, gain: float, epsilon: float = RMS_EPSILON) -> float:
    """|λ/max(ε, λ√R) − 1/max(ε, √R)| · ‖x‖₂."""
    rho = np.sqrt(compute_rms(x, epsilon).R)
    factor = gain / max(epsilon, gain * rho) - 1.0 / max(epsilon, rho)
    return abs(factor) * float(np.linalg.norm(np.asarray(x)))


def _stream_with_rms(rng, target: float, length: int) -> np.ndarray:
    x = rng.normal(size=(3, length))
    return x * (target / np.sqrt(compute_rms(x).R))


def check_norm_floor_equality(
    network: Network | None, rng, trials: int = 50, tolerance: float = 1e-10, epsilon: float = RMS_EPSILON, **_
) -> CheckResult:
    """
    ‖𝒩(λx) − 𝒩(x)‖₂ calculado contra a forma fechada, incluindo casos com o
    piso ativo em um ou nos dois lados.
    """
    length = network.spec.length if network is not None else 128
    cases = [
        (epsilon / 2, 4.0),  # piso ativo só em x
        (2 * epsilon, 0.25),  # piso ativo só em λx
        (epsilon / 4, 2.0),  # piso ativo nos dois
        (1.0, 1.0),
        (epsilon / 2, 1.0),
        (1.0, 3.0),  # piso inativo nos dois
    ]
    for _ in range(trials):
        cases.append((epsilon * 10 ** rng.uniform(-1, 1), 10 ** rng.uniform(-1, 1)))

    deviation = _Deviation()
    for target, gain in cases:
        x = _stream_with_rms(rng, target, length)
        computed = float(np.linalg.norm(normalize_stream(gain * x, epsilon) - normalize_stream(x, epsilon)))
        deviation.update(computed, norm_floor_closed_form(x, gain, epsilon))
    return deviation.result("norm_floor_equality", len(cases), tolerance, epsilon=epsilon)


# =============================================================================
# REGISTRO E EXECUÇÃO
# =============================================================================


@dataclass(frozen=True)
class FunctionCheck:
    """Adapta uma função de verificação ao protocolo Check do registry."""

    name: str
    tolerance: float
    func: Callable[..., CheckResult]
    trials: int

    def run(self, *, network, rng, ctx: dict) -> CheckResult:
        trials = ctx.get("trials") or self.trials
        return self.func(
            network,
            rng,
            trials=trials,
            tolerance=self.tolerance,
            epsilon=ctx.get("epsilon", RMS_EPSILON),
        )


DEFAULT_CHECKS = (
    FunctionCheck("core_naturality", 1e-9, check_core_naturality, 50),
    FunctionCheck("conv_shift_equivariance", 1e-12, check_conv_shift_equivariance, 3),
    FunctionCheck("poset_naturality", 1e-12, check_poset_naturality, 20),
    FunctionCheck("readout_invariance", 1e-9, check_readout_invariance, 200),
    FunctionCheck("gn_shift_commutation", 1e-12, check_gn_shift_commutation, 10),
    FunctionCheck("norm_floor_equality", 1e-10, check_norm_floor_equality, 50),
)


def fresh_network(seed: int, spec: ModelSpec | None = None) -> CatEquivNet:
    """CatEquiv com parâmetros iniciais em 64 bits."""
    return build_network(spec or ModelSpec(), Rng(seed).spawn("init"), dtype=np.float64)


def untied_control(seed: int, spec: ModelSpec | None = None) -> CatEquivNet:
    """Controle negativo: bancos do Stage 1 independentes por eixo."""
    return fresh_network(seed, (spec or ModelSpec()).replace(tie_axes=False))


class VerifierService:
    @staticmethod
    def run_all(
        network: Network,
        *,
        seed: int = 0,
        trials: int | None = None,
        epsilon: float = RMS_EPSILON,
        names: list[str] | None = None,
    ) -> list[CheckResult]:
        """
        Executa todas as verificações registradas (ou as de `names`),
        cada uma com o stream derivado de (seed, nome).
        """
        from catequiv import registry

        checks = registry.get_checks()
        if names:
            unknown = set(names) - {c.name for c in checks}
            if unknown:
                raise ConfigError(
                    code="invalid_config",
                    message=f"Verificações desconhecidas: {', '.join(sorted(unknown))}",
                )
            checks = [c for c in checks if c.name in names]

        results = []
        for check in checks:
            check_seed = derive_seed(seed, check.name)
            result = check.run(network=network, rng=Rng(check_seed), ctx={"trials": trials, "epsilon": epsilon})
            result = CheckResult(**{**result.__dict__, "seed": check_seed})
            logger.info(
                "verify: %s %s (max_abs=%.3e, tol=%.0e)",
                result.name, "PASS" if result.passed else "FAIL", result.max_abs, result.tolerance,
            )
            results.append(result)
        return results

    @staticmethod
    def run_negative_controls(seed: int = 0, spec: ModelSpec | None = None, trials: int = 20) -> list[CheckResult]:
        """Controles que devem falhar: rede com Stage 1 desamarrado na invariância a rotações."""
        network = untied_control(seed, spec)
        rng = Rng(derive_seed(seed, "controls"))
        return [check_readout_invariance(network, rng, trials=trials, shift_windows=0)]

    @staticmethod
    def summary(results: list[CheckResult], seed: int) -> dict:
        return {
            "seed": seed,
            "passed": all(r.passed for r in results),
            "checks": [r.to_dict() for r in results],
        }

    @staticmethod
    def format_table(results: list[CheckResult]) -> str:
        header = f"{'check':<26} {'trials':>6} {'max_abs':>11} {'max_rel':>11} {'tol':>8}  result"
        lines = [header, "-" * len(header)]
        for r in results:
            lines.append(
                f"{r.name:<26} {r.trials:>6} {r.max_abs:>11.3e} {r.max_rel:>11.3e} {r.tolerance:>8.0e}  "
                f"{'PASS' if r.passed else 'FAIL'}"
            )
        return "\n".join(lines)
