"""Image manipulation detection and localization toolkit."""

from ._core import (
    Model,
    auc,
    dct2,
    eer_threshold,
    extract_high_frequency,
    f1_at_threshold,
    generate_dataset,
    high_pass_mask,
    idct2,
    local_cosine_similarity,
    sinusoidal_positions,
    to_luminance,
)

__all__ = [
    "Model",
    "auc",
    "dct2",
    "eer_threshold",
    "extract_high_frequency",
    "f1_at_threshold",
    "generate_dataset",
    "high_pass_mask",
    "idct2",
    "local_cosine_similarity",
    "sinusoidal_positions",
    "to_luminance",
]

__version__ = "0.1.0"
