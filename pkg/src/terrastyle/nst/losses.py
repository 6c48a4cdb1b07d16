"""Loss terms for feature-space morphology transfer.

All functions take and return torch tensors so they compose under autograd;
the optimizer differentiates through them directly. Numeric contracts:

- content: plain sum of squared feature differences at one layer.
- style: per-layer squared Gram difference scaled by 1/(4 N^2 M^2),
  where N is the filter count and M the number of spatial positions.
- tv: anisotropic total variation, the sum of absolute neighbor
  differences along both axes, summed over channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch


@dataclass(frozen=True)
class FeatureActivations:
    """Responses of one extractor stage: filters x flattened positions."""

    layer: str
    matrix: torch.Tensor  # (n, m)

    def __post_init__(self):
        if self.matrix.ndim != 2:
            raise ValueError(
                f"activations for {self.layer!r} must be 2D (filters x positions), "
                f"got shape {tuple(self.matrix.shape)}"
            )

    @property
    def n(self) -> int:
        """Filter count."""
        return int(self.matrix.shape[0])

    @property
    def m(self) -> int:
        """Number of spatial positions."""
        return int(self.matrix.shape[1])


@dataclass(frozen=True)
class GramMatrix:
    """Filter co-activation matrix of one layer, with dims kept for scaling."""

    layer: str
    g: torch.Tensor  # (n, n)
    n: int
    m: int

    def __post_init__(self):
        if self.g.ndim != 2 or self.g.shape[0] != self.g.shape[1]:
            raise ValueError(f"gram matrix must be square, got shape {tuple(self.g.shape)}")
        if self.g.shape[0] != self.n:
            raise ValueError(f"gram dims {tuple(self.g.shape)} disagree with n={self.n}")


@dataclass(frozen=True)
class LossBreakdown:
    """All loss components at one iteration, already weighted into total."""

    iteration: int
    content: float
    style: float
    tv: float
    total: float

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "content": self.content,
            "style": self.style,
            "tv": self.tv,
            "total": self.total,
        }


def gram_matrix(f: FeatureActivations) -> GramMatrix:
    """G_ij = sum_k F_ik F_jk, the unnormalized position sum."""
    return GramMatrix(layer=f.layer, g=f.matrix @ f.matrix.T, n=f.n, m=f.m)


def content_loss(f1: FeatureActivations, f2: FeatureActivations) -> torch.Tensor:
    """Sum of squared element-wise differences between two activation sets."""
    if f1.matrix.shape != f2.matrix.shape:
        raise ValueError(
            f"activation shapes differ: {tuple(f1.matrix.shape)} vs {tuple(f2.matrix.shape)}"
        )
    d = f1.matrix - f2.matrix
    return (d * d).sum()


def style_loss(g1: GramMatrix, g2: GramMatrix) -> torch.Tensor:
    """Single-layer style term: squared Gram difference over 4 N^2 M^2."""
    if g1.g.shape != g2.g.shape or (g1.n, g1.m) != (g2.n, g2.m):
        raise ValueError(
            f"gram dims differ: {tuple(g1.g.shape)} (n={g1.n}, m={g1.m}) "
            f"vs {tuple(g2.g.shape)} (n={g2.n}, m={g2.m})"
        )
    d = g1.g - g2.g
    n = float(g1.n)
    m = float(g1.m)
    return (d * d).sum() / (4.0 * n * n * m * m)


def tv_loss(img: torch.Tensor) -> torch.Tensor:
    """Anisotropic total variation over a (h, w) or (c, h, w) image."""
    if img.ndim == 2:
        img = img.unsqueeze(0)
    if img.ndim != 3:
        raise ValueError(f"expected (h, w) or (c, h, w) image, got shape {tuple(img.shape)}")
    if img.shape[-2] < 2 or img.shape[-1] < 2:
        raise ValueError(f"image must be at least 2x2, got {tuple(img.shape[-2:])}")
    dv = (img[:, 1:, :] - img[:, :-1, :]).abs().sum()
    dh = (img[:, :, 1:] - img[:, :, :-1]).abs().sum()
    return dv + dh


def weighted_terms(
    content_ref: dict[str, FeatureActivations],
    style_grams: dict[str, GramMatrix],
    out_feats: dict[str, FeatureActivations],
    out_img: torch.Tensor,
    alpha: float,
    beta: float,
    gamma: float,
    content_layer: str,
    style_layers: dict[str, float],
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
    """Weighted three-term loss from precomputed reference features.

    Returns (content, style, tv, total) as 0-d tensors; total is the
    alpha/beta/gamma-weighted sum of the other three.
    """
    c = content_loss(content_ref[content_layer], out_feats[content_layer])
    s = out_img.new_zeros(())
    for layer, weight in style_layers.items():
        s = s + weight * style_loss(style_grams[layer], gram_matrix(out_feats[layer]))
    t = tv_loss(out_img)
    return c, s, t, alpha * c + beta * s + gamma * t
