"""Procedural noise generators.

Two families: explicit noise (averaged multi-scale uniform matrices with
Gaussian smoothing passes) and lattice gradient noise summed over octaves
with doubling frequency and halving amplitude. Both are pure functions of
their config; the seed fully determines the output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from .heightfield import HeightMap, normalize, upscale

# ---------------------------------------------------------------------------
# Configs
# ---------------------------------------------------------------------------

DEFAULT_BASE_SIZES = (4, 8, 16, 32)
DEFAULT_SIGMAS = (8.0, 4.0, 2.0)
DEFAULT_KERNELS = (33, 17, 9)
DEFAULT_TARGET_DIM = 1500


@dataclass(frozen=True)
class ExplicitNoiseConfig:
    """Parameters for multi-scale smoothed uniform noise.

    Each of ``n`` matrices starts at its own ``base_sizes`` resolution,
    is upscaled to ``target_dim`` and run through every (sigma, kernel)
    smoothing pass; the results are averaged and normalized.
    """

    n: int = 4
    base_sizes: tuple[int, ...] = DEFAULT_BASE_SIZES
    target_dim: int = DEFAULT_TARGET_DIM
    sigmas: tuple[float, ...] = DEFAULT_SIGMAS
    kernels: tuple[int, ...] = DEFAULT_KERNELS
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "base_sizes", tuple(int(s) for s in self.base_sizes))
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        object.__setattr__(self, "kernels", tuple(int(k) for k in self.kernels))
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if len(self.base_sizes) != self.n:
            raise ValueError(f"base_sizes has {len(self.base_sizes)} entries, expected n={self.n}")
        if self.target_dim < 1:
            raise ValueError(f"target_dim must be >= 1, got {self.target_dim}")
        if len(self.sigmas) != len(self.kernels):
            raise ValueError(
                f"sigmas ({len(self.sigmas)}) and kernels ({len(self.kernels)}) must pair up"
            )
        for s in self.base_sizes:
            if not 1 <= s <= self.target_dim:
                raise ValueError(f"base size {s} outside [1, target_dim={self.target_dim}]")
        for sg in self.sigmas:
            if sg <= 0:
                raise ValueError(f"sigma must be positive, got {sg}")
        for k in self.kernels:
            if k < 1 or k % 2 == 0:
                raise ValueError(f"kernel size must be odd and >= 1, got {k}")


@dataclass(frozen=True)
class PerlinConfig:
    """Parameters for octave-summed lattice gradient noise."""

    octaves: int = 4
    base_freq: float = 1.0 / 64.0
    base_amplitude: float = 1.0
    seed: int = 0
    width: int = DEFAULT_TARGET_DIM
    height: int = DEFAULT_TARGET_DIM

    def __post_init__(self):
        if self.octaves < 1:
            raise ValueError(f"octaves must be >= 1, got {self.octaves}")
        if self.base_freq <= 0:
            raise ValueError(f"base_freq must be positive, got {self.base_freq}")
        if self.base_amplitude <= 0:
            raise ValueError(f"base_amplitude must be positive, got {self.base_amplitude}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"map dimensions must be positive, got {self.width}x{self.height}")


# ---------------------------------------------------------------------------
# Explicit noise
# ---------------------------------------------------------------------------


def gen_random_matrix(size: int, rng: np.random.Generator) -> np.ndarray:
    """size x size i.i.d. uniform values on [0, 1), drawn from rng in order."""
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    return rng.random((size, size), dtype=np.float64)


def gaussian_kernel(sigma: float, size: int) -> np.ndarray:
    """Discrete 2D Gaussian truncated to size x size, normalized to sum 1."""
    if size < 1 or size % 2 == 0:
        raise ValueError(f"kernel size must be odd and >= 1, got {size}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    half = size // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g1 = np.exp(-(x * x) / (2.0 * sigma * sigma))
    g1 /= g1.sum()
    return np.outer(g1, g1)


def gaussian_smooth(values: np.ndarray, sigma: float, kernel: int) -> np.ndarray:
    """Convolve with a normalized truncated Gaussian, reflect-padded borders.

    The truncated 2D Gaussian factors exactly into its two 1D profiles, so
    the convolution runs as two 1D passes; the result equals the full 2D
    convolution up to float rounding.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"expected a 2D matrix, got shape {values.shape}")
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"kernel size must be odd and >= 1, got {kernel}")
    if kernel > min(values.shape):
        raise ValueError(f"kernel {kernel} exceeds matrix dims {values.shape}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    half = kernel // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g1 = np.exp(-(x * x) / (2.0 * sigma * sigma))
    g1 /= g1.sum()
    out = convolve1d(values, g1, axis=0, mode="reflect")
    out = convolve1d(out, g1, axis=1, mode="reflect")
    return out


def generate_explicit(cfg: ExplicitNoiseConfig) -> HeightMap:
    """Average n upscaled-and-smoothed uniform matrices, then normalize.

    A single RNG stream seeded from cfg.seed feeds all n matrices in order,
    so the whole map is reproducible from the config alone.
    """
    rng = np.random.default_rng(cfg.seed)
    acc = np.zeros((cfg.target_dim, cfg.target_dim), dtype=np.float64)
    for base in cfg.base_sizes:
        m = gen_random_matrix(base, rng)
        m = upscale(HeightMap(m), cfg.target_dim, cfg.target_dim).values.astype(np.float64)
        for sigma, kernel in zip(cfg.sigmas, cfg.kernels):
            m = gaussian_smooth(m, sigma, kernel)
        acc += m
    acc /= cfg.n
    return normalize(HeightMap(acc))


# ---------------------------------------------------------------------------
# Lattice gradient noise
# ---------------------------------------------------------------------------

_SQ = float(np.sqrt(0.5))
# 8 unit gradients at 45 degree steps; unit length keeps octave magnitudes
# bounded by their amplitude.
_GRADIENTS = np.array(
    [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (_SQ, _SQ),
        (-_SQ, _SQ),
        (_SQ, -_SQ),
        (-_SQ, -_SQ),
    ],
    dtype=np.float64,
)


def _permutation_table(seed: int) -> np.ndarray:
    """256-entry seeded permutation, doubled so nested lookups need no wrap."""
    perm = np.random.default_rng(seed).permutation(256)
    return np.concatenate([perm, perm]).astype(np.int64)


def _fade(t: np.ndarray) -> np.ndarray:
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def _lerp(a, b, t):
    return a + t * (b - a)


def _corner_dot(table: np.ndarray, xi, yi, dx, dy) -> np.ndarray:
    h = table[table[xi & 255] + (yi & 255)] % len(_GRADIENTS)
    g = _GRADIENTS[h]
    return g[..., 0] * dx + g[..., 1] * dy


def _gradient_noise(xs: np.ndarray, ys: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Single-octave value at lattice coordinates (xs, ys), elementwise."""
    xi = np.floor(xs).astype(np.int64)
    yi = np.floor(ys).astype(np.int64)
    xf = xs - xi
    yf = ys - yi
    u = _fade(xf)
    v = _fade(yf)
    n00 = _corner_dot(table, xi, yi, xf, yf)
    n10 = _corner_dot(table, xi + 1, yi, xf - 1.0, yf)
    n01 = _corner_dot(table, xi, yi + 1, xf, yf - 1.0)
    n11 = _corner_dot(table, xi + 1, yi + 1, xf - 1.0, yf - 1.0)
    return _lerp(_lerp(n00, n10, u), _lerp(n01, n11, u), v)


def octave_schedule(cfg: PerlinConfig) -> list[tuple[float, float]]:
    """(freq, amplitude) per octave: freq doubles, amplitude halves."""
    pairs = []
    freq = float(cfg.base_freq)
    amp = float(cfg.base_amplitude)
    for _ in range(cfg.octaves):
        pairs.append((freq, amp))
        freq *= 2.0
        amp *= 0.5
    return pairs


def perlin_sample(x: float, y: float, cfg: PerlinConfig) -> float:
    """Octave-summed gradient noise at pixel coordinates (x, y).

    All octaves share one seeded permutation table; octave o samples the
    lattice at (x, y) * freq_o and contributes amp_o times the result.
    """
    table = _permutation_table(cfg.seed)
    total = 0.0
    for freq, amp in octave_schedule(cfg):
        total += float(_gradient_noise(np.float64(x) * freq, np.float64(y) * freq, table)) * amp
    return total


def _octave_sum(cfg: PerlinConfig) -> np.ndarray:
    """Raw (unnormalized) octave sum over the pixel grid."""
    table = _permutation_table(cfg.seed)
    xs = np.arange(cfg.width, dtype=np.float64)[None, :]
    ys = np.arange(cfg.height, dtype=np.float64)[:, None]
    total = np.zeros((cfg.height, cfg.width), dtype=np.float64)
    for freq, amp in octave_schedule(cfg):
        total += _gradient_noise(xs * freq, ys * freq, table) * amp
    return total


def generate_perlin_map(cfg: PerlinConfig) -> HeightMap:
    """Evaluate perlin_sample over the pixel grid and normalize to [0, 1]."""
    return normalize(HeightMap(_octave_sum(cfg)))


# ---------------------------------------------------------------------------
# Feature blending
# ---------------------------------------------------------------------------


def blend_custom_feature(custom: HeightMap, noise: HeightMap, weight: float = 0.5) -> HeightMap:
    """weight * custom + (1 - weight) * noise, then normalize.

    The default is a plain average: equal say for the drawn feature and the
    procedural base.
    """
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must be in [0, 1], got {weight}")
    if custom.values.shape != noise.values.shape:
        raise ValueError(
            f"dimension mismatch: custom {custom.values.shape} vs noise {noise.values.shape}"
        )
    mixed = weight * custom.values.astype(np.float64) + (1.0 - weight) * noise.values.astype(
        np.float64
    )
    return normalize(HeightMap(mixed))


# ---------------------------------------------------------------------------
# Config (de)serialization shared by CLI and service
# ---------------------------------------------------------------------------


def noise_config_to_dict(cfg) -> dict:
    """JSON-ready dict with a `method` tag plus the config's own fields."""
    if isinstance(cfg, ExplicitNoiseConfig):
        return {
            "method": "explicit",
            "seed": cfg.seed,
            "n": cfg.n,
            "base_sizes": list(cfg.base_sizes),
            "target_dim": cfg.target_dim,
            "sigmas": list(cfg.sigmas),
            "kernels": list(cfg.kernels),
        }
    if isinstance(cfg, PerlinConfig):
        return {
            "method": "perlin",
            "seed": cfg.seed,
            "octaves": cfg.octaves,
            "base_freq": cfg.base_freq,
            "base_amplitude": cfg.base_amplitude,
            "width": cfg.width,
            "height": cfg.height,
        }
    raise TypeError(f"not a noise config: {type(cfg).__name__}")


def noise_config_from_dict(doc: dict):
    """Inverse of noise_config_to_dict; unknown keys are rejected."""
    if not isinstance(doc, dict) or "method" not in doc:
        raise ValueError("noise config document must be an object with a 'method' key")
    method = doc["method"]
    rest = {k: v for k, v in doc.items() if k != "method"}
    if method == "explicit":
        cls = ExplicitNoiseConfig
    elif method == "perlin":
        cls = PerlinConfig
    else:
        raise ValueError(f"unknown method {method!r}; expected 'explicit' or 'perlin'")
    try:
        return cls(**rest)
    except TypeError as exc:
        raise ValueError(f"bad noise config: {exc}") from exc
