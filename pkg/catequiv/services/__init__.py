"""
CatEquiv Services — Serviços de treino, avaliação, ablação e verificação.
"""

from .ablation import AblationResult, AblationService  # noqa: F401
from .evaluate import EvaluationService  # noqa: F401
from .train import TrainConfig, TrainResult, TrainService  # noqa: F401
from .verify import CheckResult, VerifierService  # noqa: F401
