"""Regenerate the bundled style maps in src/terrastyle/assets/.

Three deterministic 512x512 16-bit maps, one per terrain class. Each is
built from the package's own noise primitives plus a class-specific
transform: ridge-folded octaves for mountains, a carved channel network
over rolling lowland for rivers, and an asymmetric warped dune field for
deserts. Run from the repo root:

    python3 scripts/generate_bundled_styles.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.ndimage import distance_transform_edt, gaussian_filter

from terrastyle.heightfield import HeightMap, normalize, save_heightmap
from terrastyle.procgen import PerlinConfig, generate_perlin_map

SIZE = 512
ASSETS = Path(__file__).resolve().parents[1] / "src" / "terrastyle" / "assets"


def signed_octave(freq: float, seed: int) -> np.ndarray:
    """Single normalized octave remapped to [-1, 1]."""
    cfg = PerlinConfig(width=SIZE, height=SIZE, octaves=1, base_freq=freq, seed=seed)
    return 2.0 * generate_perlin_map(cfg).values.astype(np.float64) - 1.0


def fbm(base_freq: float, octaves: int, seed: int) -> np.ndarray:
    cfg = PerlinConfig(
        width=SIZE, height=SIZE, octaves=octaves, base_freq=base_freq, seed=seed
    )
    return generate_perlin_map(cfg).values.astype(np.float64)


def mountain() -> np.ndarray:
    # fold each octave around its midline: |signed| valleys become ridgelines
    total = np.zeros((SIZE, SIZE))
    amp = 1.0
    for o in range(6):
        ridge = (1.0 - np.abs(signed_octave(1.0 / 96.0 * 2.0**o, seed=31 + o))) ** 2
        total += amp * ridge
        amp *= 0.5
    # massif mask keeps some low country between ranges
    mask = 0.35 + 0.65 * fbm(1.0 / 256.0, 2, seed=77)
    return total * mask


def river() -> np.ndarray:
    rng = np.random.default_rng(19)
    lowland = 0.25 * fbm(1.0 / 128.0, 5, seed=41)

    # meandering main stem, west to east, plus tributaries entering from
    # the north and south edges
    network = np.zeros((SIZE, SIZE), dtype=bool)

    def carve_path(xs: np.ndarray, ys: np.ndarray):
        xi = np.clip(np.round(xs).astype(int), 0, SIZE - 1)
        yi = np.clip(np.round(ys).astype(int), 0, SIZE - 1)
        network[yi, xi] = True

    t = np.linspace(0.0, 1.0, SIZE * 4)
    meander = sum(
        a * np.sin(2.0 * np.pi * (f * t + rng.random()))
        for f, a in ((1.5, 60.0), (3.1, 28.0), (6.7, 11.0))
    )
    main_y = SIZE / 2 + meander
    carve_path(t * (SIZE - 1), main_y)

    for k in range(5):
        join = int((0.12 + 0.19 * k) * len(t))
        jx, jy = t[join] * (SIZE - 1), main_y[join]
        edge_y = 0.0 if k % 2 == 0 else SIZE - 1.0
        edge_x = jx + rng.uniform(-140.0, 140.0)
        s = np.linspace(0.0, 1.0, SIZE * 2)
        wiggle = 22.0 * np.sin(2.0 * np.pi * (2.3 * s + rng.random()))
        carve_path(edge_x + (jx - edge_x) * s + wiggle * s * (1 - s) * 4, edge_y + (jy - edge_y) * s)

    depth = np.exp(-((distance_transform_edt(~network) / 7.0) ** 2))
    depth = gaussian_filter(depth, 1.5)
    return lowland - 0.9 * depth


def desert() -> np.ndarray:
    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    theta = np.deg2rad(25.0)
    along = xx * np.cos(theta) + yy * np.sin(theta)
    warp = 38.0 * signed_octave(1.0 / 180.0, seed=55)
    phase = 2.0 * np.pi * (along + warp) / 52.0
    # steep lee face, gentle windward slope
    dunes = np.sin(phase) + 0.45 * np.sin(2.0 * phase + 0.8)
    ripples = 0.12 * np.sin(4.5 * phase + 12.0 * signed_octave(1.0 / 40.0, seed=56))
    swell = 0.8 * fbm(1.0 / 300.0, 2, seed=57)
    return dunes + ripples + swell


def main():
    ASSETS.mkdir(parents=True, exist_ok=True)
    builders = {"mountain": mountain, "river": river, "desert": desert}
    index = []
    for terrain_class, build in builders.items():
        hmap = normalize(HeightMap(build()))
        out = ASSETS / f"{terrain_class}.png"
        save_heightmap(hmap, out, depth=16)
        index.append(
            {
                "terrain_class": terrain_class,
                "file": out.name,
                "width": SIZE,
                "height": SIZE,
            }
        )
        print(f"wrote {out}")
    (ASSETS / "styles.json").write_text(json.dumps(index, indent=2) + "\n")
    print(f"wrote {ASSETS / 'styles.json'}")


if __name__ == "__main__":
    main()
