"""Procedural terrain height maps with morphology transfer from example terrain."""

__version__ = "0.1.0"

from .heightfield import (
    ColorImage,
    FormatError,
    HeightMap,
    TriangleMesh,
    apply_colormap,
    load_heightmap,
    normalize,
    resample,
    save_color_image,
    save_heightmap,
    save_mesh,
    to_mesh,
    upscale,
)
from .metrics import SsimParams, aligned_ssim, ssim

__all__ = [
    "ColorImage",
    "FormatError",
    "HeightMap",
    "SsimParams",
    "TriangleMesh",
    "aligned_ssim",
    "apply_colormap",
    "load_heightmap",
    "normalize",
    "resample",
    "save_color_image",
    "save_heightmap",
    "save_mesh",
    "ssim",
    "to_mesh",
    "upscale",
    "__version__",
]
