"""
CatEquiv Data — Ingestão do UCI-HAR e processamento de ganho por sensor.
"""

from .ucihar import (  # noqa: F401
    ACC_SOURCES,
    ACTIVITY_LABELS,
    NUM_CLASSES,
    DatasetSplit,
    load_ucihar,
    signal_files,
    stratified_split,
)
from .windows import (  # noqa: F401
    INPUT_CHANNELS,
    RMS_EPSILON,
    WINDOW_LENGTH,
    ProcessedInput,
    RmsStats,
    Window,
    compute_rms,
    gain_process,
    gain_process_batch,
    normalize_stream,
)
