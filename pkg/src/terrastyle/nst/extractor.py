"""Convolutional feature extractor with the canonical VGG-19 conv topology.

Sixteen 3x3 convolution stages in five groups of (2, 2, 4, 4, 4), each stage
followed by a ReLU, groups separated by 2x2 max pooling. The two dense
classifier layers of the full network are not part of this extractor. Weights
come from a named-tensor .npz archive; a conversion tool for the public
pretrained release lives in `convert`.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F

from ..heightfield import HeightMap
from .losses import FeatureActivations

_GROUP_CONVS = (2, 2, 4, 4, 4)
_GROUP_CHANNELS = (64, 128, 256, 512, 512)

# Ordered conv stage names: conv1_1 ... conv5_4.
LAYER_NAMES = tuple(
    f"conv{g + 1}_{i + 1}" for g, count in enumerate(_GROUP_CONVS) for i in range(count)
)

# Mean pixel values (RGB, 0-255 scale) subtracted during preprocessing; the
# values the public pretrained release was trained against.
IMAGENET_MEANS = (123.68, 116.779, 103.939)


def _shape_plan() -> dict[str, tuple[int, int]]:
    """Expected (out_channels, in_channels) per conv stage."""
    plan = {}
    in_ch = 3
    for g, count in enumerate(_GROUP_CONVS):
        out_ch = _GROUP_CHANNELS[g]
        for i in range(count):
            plan[f"conv{g + 1}_{i + 1}"] = (out_ch, in_ch)
            in_ch = out_ch
    return plan


SHAPE_PLAN = _shape_plan()

# Stages whose output is max-pooled before the next stage (group boundaries;
# nothing follows group 5, so conv5_4 is not pooled).
_POOL_AFTER = frozenset({"conv1_2", "conv2_2", "conv3_4", "conv4_4"})


class WeightFormatError(ValueError):
    """Raised when a weight archive is missing entries or has wrong shapes."""


class FeatureExtractor:
    """Immutable conv stack; one instance is shareable across transfers."""

    def __init__(self, weights: dict[str, tuple[torch.Tensor, torch.Tensor]]):
        for name in LAYER_NAMES:
            if name not in weights:
                raise WeightFormatError(f"missing conv stage {name!r}")
            w, b = weights[name]
            out_ch, in_ch = SHAPE_PLAN[name]
            if tuple(w.shape) != (out_ch, in_ch, 3, 3):
                raise WeightFormatError(
                    f"{name}.weight has shape {tuple(w.shape)}, expected {(out_ch, in_ch, 3, 3)}"
                )
            if tuple(b.shape) != (out_ch,):
                raise WeightFormatError(
                    f"{name}.bias has shape {tuple(b.shape)}, expected {(out_ch,)}"
                )
        self._weights = {
            name: (w.detach().to(torch.float32), b.detach().to(torch.float32))
            for name, (w, b) in weights.items()
        }
        self._by_dtype: dict[torch.dtype, dict[str, tuple[torch.Tensor, torch.Tensor]]] = {
            torch.float32: self._weights
        }

    @property
    def layers(self) -> tuple[str, ...]:
        return LAYER_NAMES

    def _weights_for(self, dtype: torch.dtype):
        if dtype not in self._by_dtype:
            self._by_dtype[dtype] = {
                name: (w.to(dtype), b.to(dtype)) for name, (w, b) in self._weights.items()
            }
        return self._by_dtype[dtype]

    def features(self, img: torch.Tensor, layers) -> dict[str, FeatureActivations]:
        """Forward pass recording the named stages' post-ReLU responses.

        img is a (3, h, w) preprocessed tensor. The pass stops at the deepest
        requested stage. Each recorded response is flattened to
        (filters, positions).
        """
        wanted = list(layers)
        for name in wanted:
            if name not in SHAPE_PLAN:
                raise ValueError(f"unknown layer {name!r}; valid: {', '.join(LAYER_NAMES)}")
        if img.ndim != 3 or img.shape[0] != 3:
            raise ValueError(f"expected a (3, h, w) image tensor, got shape {tuple(img.shape)}")
        deepest = max(LAYER_NAMES.index(name) for name in wanted)
        weights = self._weights_for(img.dtype)

        out: dict[str, FeatureActivations] = {}
        x = img.unsqueeze(0)
        for idx, name in enumerate(LAYER_NAMES):
            w, b = weights[name]
            x = F.relu(F.conv2d(x, w, b, padding=1))
            if name in wanted:
                n = x.shape[1]
                out[name] = FeatureActivations(layer=name, matrix=x.reshape(n, -1))
            if idx == deepest:
                break
            if name in _POOL_AFTER:
                if x.shape[-2] < 2 or x.shape[-1] < 2:
                    raise ValueError(
                        f"image too small to pool after {name}: spatial size is "
                        f"{x.shape[-2]}x{x.shape[-1]}; deeper layers need a larger input "
                        "(each conv group past the first halves both dimensions)"
                    )
                x = F.max_pool2d(x, kernel_size=2, stride=2)
        return out


def load_weights(path) -> FeatureExtractor:
    """Load a FeatureExtractor from a .npz archive.

    The archive must hold float32 entries `conv{g}_{i}.weight` with shape
    (out, in, 3, 3) and `conv{g}_{i}.bias` with shape (out,) for all 16
    stages. Errors name the offending entry.
    """
    try:
        archive = np.load(str(path))
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise WeightFormatError(f"cannot read weight archive {path!r}: {exc}") from exc
    weights = {}
    for name in LAYER_NAMES:
        for suffix in ("weight", "bias"):
            if f"{name}.{suffix}" not in archive:
                raise WeightFormatError(f"archive is missing entry {name}.{suffix}")
        w = archive[f"{name}.weight"]
        b = archive[f"{name}.bias"]
        out_ch, in_ch = SHAPE_PLAN[name]
        if w.shape != (out_ch, in_ch, 3, 3):
            raise WeightFormatError(
                f"{name}.weight has shape {w.shape}, expected {(out_ch, in_ch, 3, 3)}"
            )
        if b.shape != (out_ch,):
            raise WeightFormatError(f"{name}.bias has shape {b.shape}, expected {(out_ch,)}")
        weights[name] = (
            torch.from_numpy(np.ascontiguousarray(w, dtype=np.float32)),
            torch.from_numpy(np.ascontiguousarray(b, dtype=np.float32)),
        )
    return FeatureExtractor(weights)


def preprocess(hmap: HeightMap) -> torch.Tensor:
    """HeightMap -> (3, h, w) network input.

    Values scale to [0, 255], replicate across three identical channels, and
    each channel has its mean (IMAGENET_MEANS order) subtracted.
    """
    v = torch.from_numpy(hmap.values.astype(np.float32)) * 255.0
    means = torch.tensor(IMAGENET_MEANS, dtype=torch.float32).view(3, 1, 1)
    return v.unsqueeze(0).expand(3, -1, -1) - means


def postprocess(img: torch.Tensor) -> HeightMap:
    """(3, h, w) network-space image -> HeightMap.

    Adds the channel means back, averages the channels, clamps to [0, 255]
    and rescales to [0, 1].
    """
    if img.ndim != 3 or img.shape[0] != 3:
        raise ValueError(f"expected a (3, h, w) image tensor, got shape {tuple(img.shape)}")
    means = torch.tensor(IMAGENET_MEANS, dtype=img.dtype).view(3, 1, 1)
    gray = (img.detach() + means).mean(dim=0).clamp(0.0, 255.0) / 255.0
    return HeightMap(gray.cpu().numpy().astype(np.float32))
