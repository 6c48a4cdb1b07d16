"""Height-map representation, file I/O, resampling, rendering and mesh export.

A height map is a 2D grid of floats in [0, 1]: 0 is the lowest elevation,
1 the highest. Everything else in the toolkit consumes and produces this
type, so the helpers here are deliberately small and pure.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from PIL import Image

# Little-endian magic + u32 width + u32 height, then w*h float32 row-major.
RAW_HMAP_MAGIC = b"HMAP"


class FormatError(ValueError):
    """Raised when a file is readable but not a supported height-map format."""


@dataclass(frozen=True)
class HeightMap:
    """2D elevation grid, row-major, float32 values with semantic range [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"height map must be a non-empty 2D grid, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("height map contains non-finite values")
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def height(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class TriangleMesh:
    """Triangle soup over a regular grid: (x, y, z) vertices, index triples."""

    vertices: np.ndarray  # (n, 3) float32
    triangles: np.ndarray  # (m, 3) int32, indices into vertices


@dataclass(frozen=True)
class ColorImage:
    """8-bit RGB raster with the same dimensions as its source height map."""

    pixels: np.ndarray  # (h, w, 3) uint8

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])


def load_heightmap(path) -> HeightMap:
    """Load a height map from an 8/16-bit grayscale PNG or a RAW-HMAP file.

    PNG code values are divided by the format's maximum (255 or 65535) so the
    result is always in [0, 1]. RAW-HMAP files store float32 directly.
    """
    path = str(path)
    with open(path, "rb") as f:
        head = f.read(4)
    if head == RAW_HMAP_MAGIC:
        return _load_raw_hmap(path)

    try:
        img = Image.open(path)
        img.load()
    except OSError:
        raise
    except Exception as exc:  # Pillow raises a mix of error types on bad files
        raise FormatError(f"cannot decode {path!r}: {exc}") from exc

    if img.mode in ("RGB", "RGBA", "P", "PA", "LA", "CMYK", "YCbCr"):
        raise FormatError(f"color PNG not supported (mode {img.mode}); expected 8- or 16-bit grayscale")
    if img.mode == "L":
        arr = np.asarray(img, dtype=np.float32) / 255.0
    elif img.mode in ("I;16", "I"):
        arr = np.asarray(img, dtype=np.float64)
        if arr.max(initial=0) > 65535:
            raise FormatError(f"unsupported bit depth in {path!r}: values exceed 16-bit range")
        arr = (arr / 65535.0).astype(np.float32)
    else:
        raise FormatError(f"unsupported bit depth or mode {img.mode!r}; expected 8- or 16-bit grayscale")
    return HeightMap(arr)


def save_heightmap(hmap: HeightMap, path, depth: int = 16) -> None:
    """Write a grayscale PNG; codes are round(v * (2^depth - 1)), half up."""
    if depth not in (8, 16):
        raise ValueError(f"depth must be 8 or 16, got {depth}")
    path = str(path)
    if path.endswith(".hmap"):
        _save_raw_hmap(hmap, path)
        return
    maxcode = (1 << depth) - 1
    codes = np.floor(hmap.values.astype(np.float64) * maxcode + 0.5)
    codes = np.clip(codes, 0, maxcode)
    if depth == 8:
        Image.fromarray(codes.astype(np.uint8), mode="L").save(path, format="PNG")
    else:
        Image.fromarray(codes.astype(np.uint16)).save(path, format="PNG")


def _load_raw_hmap(path: str) -> HeightMap:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 12 or data[:4] != RAW_HMAP_MAGIC:
        raise FormatError(f"{path!r} is not a RAW-HMAP file (bad magic)")
    width, height = struct.unpack_from("<II", data, 4)
    expected = 12 + 4 * width * height
    if len(data) != expected:
        raise FormatError(f"RAW-HMAP payload size mismatch: expected {expected} bytes, got {len(data)}")
    values = np.frombuffer(data, dtype="<f4", count=width * height, offset=12)
    return HeightMap(values.reshape(height, width).copy())


def _save_raw_hmap(hmap: HeightMap, path: str) -> None:
    with open(path, "wb") as f:
        f.write(RAW_HMAP_MAGIC)
        f.write(struct.pack("<II", hmap.width, hmap.height))
        f.write(np.ascontiguousarray(hmap.values, dtype="<f4").tobytes())


def normalize(hmap: HeightMap) -> HeightMap:
    """Affinely rescale values to span [0, 1]; a constant map becomes all 0.5."""
    v = hmap.values
    lo = float(v.min())
    hi = float(v.max())
    if hi == lo:
        return HeightMap(np.full_like(v, 0.5))
    return HeightMap((v - lo) / (hi - lo))


def resample(hmap: HeightMap, target_w: int, target_h: int) -> HeightMap:
    """Bilinear resample to any size, endpoints aligned to the source corners."""
    if target_w < 1 or target_h < 1:
        raise ValueError("target dimensions must be positive")
    return HeightMap(_bilinear(hmap.values, target_w, target_h))


def upscale(hmap: HeightMap, target_w: int, target_h: int) -> HeightMap:
    """Bilinear upscale; corners of the output equal corners of the input."""
    if target_w < hmap.width or target_h < hmap.height:
        raise ValueError(
            f"upscale target {target_w}x{target_h} is smaller than source {hmap.width}x{hmap.height}"
        )
    return HeightMap(_bilinear(hmap.values, target_w, target_h))


def _bilinear(values: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    src_h, src_w = values.shape
    if (target_w, target_h) == (src_w, src_h):
        return values.copy()
    # Corner-aligned sample positions: output corner pixels land exactly on
    # input corner pixels.
    xs = np.linspace(0.0, src_w - 1.0, target_w) if target_w > 1 else np.zeros(1)
    ys = np.linspace(0.0, src_h - 1.0, target_h) if target_h > 1 else np.zeros(1)
    x0 = np.clip(np.floor(xs).astype(np.int64), 0, src_w - 1)
    y0 = np.clip(np.floor(ys).astype(np.int64), 0, src_h - 1)
    x1 = np.minimum(x0 + 1, src_w - 1)
    y1 = np.minimum(y0 + 1, src_h - 1)
    fx = (xs - x0).astype(np.float64)
    fy = (ys - y0).astype(np.float64)

    v = values.astype(np.float64)
    top = v[y0[:, None], x0[None, :]] * (1 - fx)[None, :] + v[y0[:, None], x1[None, :]] * fx[None, :]
    bot = v[y1[:, None], x0[None, :]] * (1 - fx)[None, :] + v[y1[:, None], x1[None, :]] * fx[None, :]
    out = top * (1 - fy)[:, None] + bot * fy[:, None]
    return out.astype(np.float32)


# Piecewise-linear palettes: sorted (position, (r, g, b)) stops on [0, 1].
PALETTES = {
    "gray": [
        (0.0, (0, 0, 0)),
        (1.0, (255, 255, 255)),
    ],
    "terrain": [
        (0.0, (40, 70, 140)),
        (0.15, (50, 120, 180)),
        (0.25, (70, 150, 90)),
        (0.50, (200, 190, 120)),
        (0.75, (140, 100, 70)),
        (0.90, (180, 180, 180)),
        (1.0, (255, 255, 255)),
    ],
}


def apply_colormap(hmap: HeightMap, palette: str = "terrain") -> ColorImage:
    """Map each elevation through a named piecewise-linear color palette."""
    if palette not in PALETTES:
        raise ValueError(f"unknown palette {palette!r}; available: {', '.join(sorted(PALETTES))}")
    stops = PALETTES[palette]
    positions = np.array([p for p, _ in stops], dtype=np.float64)
    colors = np.array([c for _, c in stops], dtype=np.float64)

    v = np.clip(hmap.values.astype(np.float64), 0.0, 1.0)
    out = np.empty(v.shape + (3,), dtype=np.uint8)
    for ch in range(3):
        interp = np.interp(v, positions, colors[:, ch])
        out[..., ch] = np.floor(interp + 0.5).astype(np.uint8)
    return ColorImage(out)


def save_color_image(img: ColorImage, path) -> None:
    Image.fromarray(img.pixels, mode="RGB").save(str(path), format="PNG")


def to_mesh(hmap: HeightMap, vertical_scale: float, horizontal_step: float = 1.0) -> TriangleMesh:
    """Tessellate the grid into a triangle mesh.

    Vertex (i, j) sits at (j*step, i*step, v_ij*vertical_scale). Each grid
    cell is split into two triangles wound counter-clockwise seen from +z.
    """
    if vertical_scale <= 0 or horizontal_step <= 0:
        raise ValueError("vertical_scale and horizontal_step must be positive")
    h, w = hmap.values.shape
    if h < 2 or w < 2:
        raise ValueError(f"mesh export needs at least a 2x2 map, got {w}x{h}")

    jj, ii = np.meshgrid(np.arange(w), np.arange(h))
    vertices = np.stack(
        [
            jj.ravel() * horizontal_step,
            ii.ravel() * horizontal_step,
            hmap.values.ravel() * vertical_scale,
        ],
        axis=1,
    ).astype(np.float32)

    idx = np.arange(h * w).reshape(h, w)
    v00 = idx[:-1, :-1].ravel()
    v10 = idx[:-1, 1:].ravel()
    v01 = idx[1:, :-1].ravel()
    v11 = idx[1:, 1:].ravel()
    tris = np.empty((2 * (h - 1) * (w - 1), 3), dtype=np.int32)
    tris[0::2] = np.stack([v00, v10, v11], axis=1)
    tris[1::2] = np.stack([v00, v11, v01], axis=1)
    return TriangleMesh(vertices, tris)


def save_mesh(mesh: TriangleMesh, path) -> None:
    """Write Wavefront-style ASCII: one `v x y z` per vertex, 1-based `f` faces."""
    with open(str(path), "w") as f:
        for x, y, z in mesh.vertices:
            f.write(f"v {x:.6f} {y:.6f} {z:.6f}\n")
        for a, b, c in mesh.triangles:
            f.write(f"f {a + 1} {b + 1} {c + 1}\n")
