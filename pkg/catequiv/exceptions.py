"""
CatEquiv Exceptions — Exceções específicas do CatEquiv.

Todas as exceções seguem o padrão:
- code: Código máquina do erro (ex.: "shape_mismatch", "missing_file")
- message: Mensagem legível para humanos
- context: Dados adicionais sobre o erro
"""

from __future__ import annotations


class CatEquivError(Exception):
    """
    Classe base para todas as exceções do CatEquiv.

    Attributes:
        code: Código máquina do erro
        message: Mensagem legível para humanos
        context: Dados adicionais sobre o erro
    """

    def __init__(self, code: str = "error", message: str = "", context: dict | None = None):
        self.code = code
        self.message = message
        self.context = context or {}
        super().__init__(message)


class ShapeError(CatEquivError):
    """
    Erro de forma/contrato de um tensor ou de um estágio da rede.

    Codes: "shape_mismatch", "even_kernel", "bad_groups", "dilation_too_large", "bad_stage_input"
    """


class SymmetryError(CatEquivError):
    """
    Erro ao construir ou aplicar um morfismo da categoria de simetrias.

    Codes: "not_below", "non_positive_gain", "not_composable", "period_mismatch"
    """


class DataError(CatEquivError):
    """
    Erro de leitura ou consistência dos dados inerciais.

    Codes: "missing_file", "row_count_mismatch", "non_numeric", "bad_row_length", "bad_label", "empty_split"
    """


class ConfigError(CatEquivError):
    """
    Configuração inválida (arquivo JSON, flags ou settings).

    Codes: "invalid_config", "unknown_variant", "unknown_model", "bad_grid"
    """


class TrainingError(CatEquivError):
    """
    Erro durante o treinamento.

    Codes: "diverged", "non_finite_grad", "empty_split"
    """


class CheckpointError(CatEquivError):
    """
    Erro ao ler ou gravar um checkpoint.

    Codes: "unsupported_format", "spec_mismatch", "missing_tensor"
    """


class VerificationError(CatEquivError):
    """
    Uma ou mais verificações de equivariância falharam.

    Codes: "checks_failed"
    """
