"""Weight archive tooling.

The extractor loads named tensors from an .npz archive. Two ways to build
one:

- convert_torchvision: map the public pretrained VGG-19 checkpoint
  (a torch state dict) into the archive layout. The index mapping is
  documented in docs/weights.md.
- synthesize_weights: generate a deterministic random archive for
  environments without the pretrained checkpoint. Statistically calibrated
  (He-style init with a per-stage gain) so the default transfer
  hyperparameters behave; see docs/weights.md for the trade-offs.
"""

from __future__ import annotations

import numpy as np

from .extractor import LAYER_NAMES, SHAPE_PLAN

# torchvision vgg19().features module indices for each conv stage.
TORCHVISION_FEATURE_INDEX = {
    "conv1_1": 0,
    "conv1_2": 2,
    "conv2_1": 5,
    "conv2_2": 7,
    "conv3_1": 10,
    "conv3_2": 12,
    "conv3_3": 14,
    "conv3_4": 16,
    "conv4_1": 19,
    "conv4_2": 21,
    "conv4_3": 23,
    "conv4_4": 25,
    "conv5_1": 28,
    "conv5_2": 30,
    "conv5_3": 32,
    "conv5_4": 34,
}

# Per-group gains for synthesized weights, tuned so the default transfer
# hyperparameters behave on CPU-sized runs. The net is positively
# homogeneous (zero biases), so a group's gain multiplies every deeper
# activation; this ladder makes the well-conditioned first-group term carry
# most of the style gradient while keeping the pixel Jacobian of the deep
# content layer small enough for stable descent at the default learning
# rate. See docs/weights.md.
DEFAULT_GROUP_GAINS = (155.0, 0.5, 1.0, 1.0, 1.0)
DEFAULT_TAIL_GAIN = 0.135

# Stages after the deepest default style layer (conv5_1); tail_gain applies
# on top of the group-5 gain there.
_TAIL_STAGES = frozenset({"conv5_2", "conv5_3", "conv5_4"})


def convert_torchvision(state_dict_path, out_path) -> None:
    """Convert a torchvision VGG-19 state dict (.pth) to the .npz archive."""
    import torch

    state = torch.load(str(state_dict_path), map_location="cpu", weights_only=True)
    if hasattr(state, "state_dict"):
        state = state.state_dict()
    entries = {}
    for name, idx in TORCHVISION_FEATURE_INDEX.items():
        for suffix in ("weight", "bias"):
            key = f"features.{idx}.{suffix}"
            if key not in state:
                raise KeyError(f"state dict is missing {key} (needed for {name}.{suffix})")
            entries[f"{name}.{suffix}"] = state[key].detach().cpu().numpy().astype(np.float32)
    _validate_shapes(entries)
    np.savez(str(out_path), **entries)


def synthesize_weights(
    out_path,
    seed: int = 0,
    group_gains: tuple[float, ...] = DEFAULT_GROUP_GAINS,
    tail_gain: float = DEFAULT_TAIL_GAIN,
) -> None:
    """Write a deterministic randomly-initialized archive.

    Weights are He-normal (std = stage_gain * sqrt(2 / fan_in)) with zero
    biases, drawn from a single seeded stream, so the archive is a pure
    function of (seed, group_gains, tail_gain). Within a group, the group's
    gain applies to its first stage only (the group's output scale is the
    product of all gains up to it); stages past conv5_1 are additionally
    scaled by tail_gain.
    """
    if len(group_gains) != 5:
        raise ValueError(f"expected 5 group gains, got {len(group_gains)}")
    rng = np.random.default_rng(seed)
    entries = {}
    for name in LAYER_NAMES:
        out_ch, in_ch = SHAPE_PLAN[name]
        fan_in = in_ch * 9
        group = int(name[4]) - 1
        stage_gain = group_gains[group] if name.endswith("_1") else 1.0
        if name in _TAIL_STAGES:
            stage_gain *= tail_gain
        std = stage_gain * np.sqrt(2.0 / fan_in)
        entries[f"{name}.weight"] = (rng.standard_normal((out_ch, in_ch, 3, 3)) * std).astype(
            np.float32
        )
        entries[f"{name}.bias"] = np.zeros(out_ch, dtype=np.float32)
    np.savez(str(out_path), **entries)


def _validate_shapes(entries: dict[str, np.ndarray]) -> None:
    for name in LAYER_NAMES:
        out_ch, in_ch = SHAPE_PLAN[name]
        w = entries[f"{name}.weight"]
        if w.shape != (out_ch, in_ch, 3, 3):
            raise ValueError(f"{name}.weight has shape {w.shape}, expected {(out_ch, in_ch, 3, 3)}")
        b = entries[f"{name}.bias"]
        if b.shape != (out_ch,):
            raise ValueError(f"{name}.bias has shape {b.shape}, expected {(out_ch,)}")
