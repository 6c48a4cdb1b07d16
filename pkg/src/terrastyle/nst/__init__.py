"""Feature-space morphology transfer: extractor network, losses, optimizer loop."""

from .losses import (
    FeatureActivations,
    GramMatrix,
    LossBreakdown,
    content_loss,
    gram_matrix,
    style_loss,
    tv_loss,
    weighted_terms,
)
from .extractor import (
    IMAGENET_MEANS,
    LAYER_NAMES,
    SHAPE_PLAN,
    FeatureExtractor,
    WeightFormatError,
    load_weights,
    postprocess,
    preprocess,
)
from .transfer import (
    DEFAULT_STYLE_LAYERS,
    DivergenceError,
    TransferCancelled,
    TransferParams,
    TransferResult,
    run_transfer,
    total_loss,
)
from .convert import convert_torchvision, synthesize_weights

__all__ = [
    "DEFAULT_STYLE_LAYERS",
    "DivergenceError",
    "FeatureActivations",
    "FeatureExtractor",
    "GramMatrix",
    "IMAGENET_MEANS",
    "LAYER_NAMES",
    "LossBreakdown",
    "SHAPE_PLAN",
    "TransferCancelled",
    "TransferParams",
    "TransferResult",
    "WeightFormatError",
    "content_loss",
    "convert_torchvision",
    "gram_matrix",
    "load_weights",
    "postprocess",
    "preprocess",
    "run_transfer",
    "style_loss",
    "synthesize_weights",
    "total_loss",
    "tv_loss",
    "weighted_terms",
]
