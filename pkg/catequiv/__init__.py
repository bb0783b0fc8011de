"""
Django CatEquiv — Rede 1-D equivariante por categoria para reconhecimento de atividades (HAR).

Uso básico:
    from catequiv.networks import ModelSpec, build_network
    from catequiv.data import load_ucihar, gain_process_batch
    from catequiv.services import TrainService, EvaluationService, VerifierService

Linha de comando (via manage.py):
    python manage.py train --model catequiv --seed 1 --out runs/a
    python manage.py verify --seed 7
"""

__title__ = "Django CatEquiv"
__version__ = "0.1.0a1"
__author__ = "Pablo Valentini"
