"""Pixel-space gradient descent imprinting style statistics onto a noise map.

The loop optimizes raw pixel values of the output image against the weighted
content/style/TV loss with a plain SGD step whose learning rate decays
exponentially. No optimizer state, no momentum: the update at iteration i is
o -= lr0 * decay_rate^(i / decay_every) * grad.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from ..heightfield import HeightMap, resample
from .extractor import IMAGENET_MEANS, LAYER_NAMES, FeatureExtractor, postprocess, preprocess
from .losses import GramMatrix, LossBreakdown, gram_matrix, weighted_terms

DEFAULT_STYLE_LAYERS = (
    ("conv1_1", 1.0),
    ("conv2_1", 1.0),
    ("conv3_1", 1.0),
    ("conv4_1", 1.0),
    ("conv5_1", 1.0),
)


class DivergenceError(RuntimeError):
    """Optimization produced a non-finite loss."""

    def __init__(self, iteration: int, content: float, style: float, tv: float, total: float):
        self.iteration = iteration
        self.content = content
        self.style = style
        self.tv = tv
        self.total = total
        super().__init__(
            f"non-finite loss at iteration {iteration}: "
            f"content={content}, style={style}, tv={tv}, total={total}"
        )


class TransferCancelled(RuntimeError):
    """Cooperative cancellation was requested between iterations."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"transfer cancelled at iteration {iteration}")


@dataclass(frozen=True)
class TransferParams:
    """Hyperparameters of the transfer loop.

    Defaults follow the reference configuration: content weight 1e-5, style
    weight 2.5e-11, TV weight 1e-10, 2000 iterations, content measured at
    conv5_2, style over the first conv of each group.
    """

    alpha: float = 1e-5
    beta: float = 2.5e-11
    gamma: float = 1e-10
    iterations: int = 2000
    content_layer: str = "conv5_2"
    style_layers: tuple[tuple[str, float], ...] = DEFAULT_STYLE_LAYERS
    lr0: float = 5.0
    decay_rate: float = 0.96
    decay_every: int = 100
    init_mode: str = "content"
    max_dim: int = 1500

    def __post_init__(self):
        if isinstance(self.style_layers, dict):
            object.__setattr__(self, "style_layers", tuple(self.style_layers.items()))
        else:
            pairs = []
            for entry in self.style_layers:
                if isinstance(entry, str):
                    pairs.append((entry, 1.0))
                else:
                    name, weight = entry
                    pairs.append((str(name), float(weight)))
            object.__setattr__(self, "style_layers", tuple(pairs))

        for w, label in ((self.alpha, "alpha"), (self.beta, "beta"), (self.gamma, "gamma")):
            if w < 0:
                raise ValueError(f"{label} must be >= 0, got {w}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if self.content_layer not in LAYER_NAMES:
            raise ValueError(f"unknown content layer {self.content_layer!r}")
        if not self.style_layers:
            raise ValueError("style_layers must not be empty")
        for name, weight in self.style_layers:
            if name not in LAYER_NAMES:
                raise ValueError(f"unknown style layer {name!r}")
            if weight < 0:
                raise ValueError(f"style layer weight for {name} must be >= 0, got {weight}")
        if self.lr0 <= 0:
            raise ValueError(f"lr0 must be positive, got {self.lr0}")
        if not 0.0 < self.decay_rate <= 1.0:
            raise ValueError(f"decay_rate must be in (0, 1], got {self.decay_rate}")
        if self.decay_every < 1:
            raise ValueError(f"decay_every must be >= 1, got {self.decay_every}")
        if self.init_mode not in ("content", "random"):
            raise ValueError(f"init_mode must be 'content' or 'random', got {self.init_mode!r}")
        if self.max_dim < 1:
            raise ValueError(f"max_dim must be >= 1, got {self.max_dim}")

    @property
    def style_weights(self) -> dict[str, float]:
        return dict(self.style_layers)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "iterations": self.iterations,
            "content_layer": self.content_layer,
            "style_layers": {name: weight for name, weight in self.style_layers},
            "lr0": self.lr0,
            "decay_rate": self.decay_rate,
            "decay_every": self.decay_every,
            "init_mode": self.init_mode,
            "max_dim": self.max_dim,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TransferParams":
        if not isinstance(doc, dict):
            raise ValueError("transfer params must be a JSON object")
        known = {
            "alpha",
            "beta",
            "gamma",
            "iterations",
            "content_layer",
            "style_layers",
            "lr0",
            "decay_rate",
            "decay_every",
            "init_mode",
            "max_dim",
        }
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown transfer param keys: {', '.join(sorted(unknown))}")
        return cls(**doc)


@dataclass
class TransferResult:
    """Output map plus the recorded loss trajectory."""

    heightmap: HeightMap
    history: list[LossBreakdown] = field(default_factory=list)


def _working_size(w: int, h: int, long_side: int) -> tuple[int, int]:
    """Scale (w, h) so the longer side equals long_side, aspect preserved."""
    if w >= h:
        return long_side, max(1, round(h * long_side / w))
    return max(1, round(w * long_side / h)), long_side


def _breakdown(iteration: int, c, s, t, total) -> LossBreakdown:
    return LossBreakdown(
        iteration=iteration,
        content=float(c.detach()),
        style=float(s.detach()),
        tv=float(t.detach()),
        total=float(total.detach()),
    )


def total_loss(
    content: HeightMap,
    style: HeightMap,
    out_img: torch.Tensor,
    params: TransferParams,
    extractor: FeatureExtractor,
) -> LossBreakdown:
    """Evaluate the weighted loss of an image against content and style maps.

    One-shot version of what the optimization loop computes per step; the
    reference features are extracted fresh on every call.
    """
    style_names = [name for name, _ in params.style_layers]
    content_ref = extractor.features(preprocess(content), [params.content_layer])
    style_feats = extractor.features(preprocess(style), style_names)
    style_grams = {name: gram_matrix(style_feats[name]) for name in style_names}
    out_feats = extractor.features(out_img, set(style_names) | {params.content_layer})
    c, s, t, total = weighted_terms(
        content_ref,
        style_grams,
        out_feats,
        out_img,
        params.alpha,
        params.beta,
        params.gamma,
        params.content_layer,
        params.style_weights,
    )
    return _breakdown(0, c, s, t, total)


def run_transfer(
    content: HeightMap,
    style: HeightMap,
    params: TransferParams,
    extractor: FeatureExtractor,
    progress=None,
    progress_stride: int = 25,
    preview_stride: int | None = None,
    preview_max_side: int = 256,
    should_cancel=None,
    seed: int = 0,
) -> TransferResult:
    """Run the descent loop; returns the final map and the loss history.

    Both inputs are resampled to a common working grid: the content's
    aspect, long side = min of both long sides and params.max_dim. `progress(breakdown,
    preview)` fires every progress_stride iterations, at iteration 0 and
    once more after the final update; preview is a downscaled HeightMap on
    preview_stride multiples (None otherwise). `should_cancel` is polled
    between iterations; a True return raises TransferCancelled.
    """
    long_side = min(
        max(content.width, content.height), max(style.width, style.height), params.max_dim
    )
    # one common working grid: the content's aspect at the capped long side;
    # the style is resampled onto the same grid so per-layer position counts
    # agree between its reference statistics and the optimized image
    cw, ch = _working_size(content.width, content.height, long_side)
    content_work = resample(content, cw, ch)
    style_work = resample(style, cw, ch)

    style_names = [name for name, _ in params.style_layers]
    wanted = list(dict.fromkeys(style_names + [params.content_layer]))

    with torch.no_grad():
        content_img = preprocess(content_work)
        content_ref = extractor.features(content_img, [params.content_layer])
        style_feats = extractor.features(preprocess(style_work), style_names)
        style_grams = {
            name: GramMatrix(
                layer=name,
                g=gram_matrix(style_feats[name]).g.detach(),
                n=style_feats[name].n,
                m=style_feats[name].m,
            )
            for name in style_names
        }
        content_ref = {
            params.content_layer: content_ref[params.content_layer],
        }

    if params.init_mode == "content":
        o = content_img.clone()
    else:
        rng = np.random.default_rng(seed)
        raw = rng.random((content_img.shape[1], content_img.shape[2]), dtype=np.float32) * 255.0
        means = torch.tensor(IMAGENET_MEANS, dtype=torch.float32).view(3, 1, 1)
        o = torch.from_numpy(raw).unsqueeze(0).expand(3, -1, -1).contiguous() - means
    o.requires_grad_(True)

    history: list[LossBreakdown] = []

    def evaluate():
        out_feats = extractor.features(o, wanted)
        return weighted_terms(
            content_ref,
            style_grams,
            out_feats,
            o,
            params.alpha,
            params.beta,
            params.gamma,
            params.content_layer,
            params.style_weights,
        )

    def emit(bd: LossBreakdown, preview_due: bool):
        history.append(bd)
        if progress is not None:
            preview = None
            if preview_due:
                with torch.no_grad():
                    full = postprocess(o)
                pw, ph = _working_size(full.width, full.height, min(preview_max_side, long_side))
                preview = resample(full, pw, ph)
            progress(bd, preview)

    for i in range(params.iterations):
        if should_cancel is not None and should_cancel():
            raise TransferCancelled(i)
        c, s, t, total = evaluate()
        bd = _breakdown(i, c, s, t, total)
        if not all(np.isfinite(v) for v in (bd.content, bd.style, bd.tv, bd.total)):
            raise DivergenceError(i, bd.content, bd.style, bd.tv, bd.total)
        if i % progress_stride == 0:
            emit(bd, preview_stride is not None and i % preview_stride == 0)
        grad = torch.autograd.grad(total, o)[0]
        lr = params.lr0 * params.decay_rate ** (i / params.decay_every)
        with torch.no_grad():
            o -= lr * grad

    with torch.no_grad():
        c, s, t, total = evaluate()
    bd = _breakdown(params.iterations, c, s, t, total)
    if not np.isfinite(bd.total):
        raise DivergenceError(params.iterations, bd.content, bd.style, bd.tv, bd.total)
    emit(bd, preview_stride is not None)

    return TransferResult(heightmap=postprocess(o), history=history)
