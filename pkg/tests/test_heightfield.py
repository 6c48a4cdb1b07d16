import numpy as np
import pytest
from PIL import Image

from terrastyle.heightfield import (
    FormatError,
    HeightMap,
    apply_colormap,
    load_heightmap,
    normalize,
    resample,
    save_heightmap,
    save_mesh,
    to_mesh,
    upscale,
)


class TestHeightMap:
    def test_rejects_non_2d(self):
        with pytest.raises(ValueError):
            HeightMap(np.zeros(5))
        with pytest.raises(ValueError):
            HeightMap(np.zeros((2, 2, 3)))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            HeightMap(np.zeros((0, 4)))

    def test_rejects_nan(self):
        v = np.zeros((3, 3))
        v[1, 1] = np.nan
        with pytest.raises(ValueError):
            HeightMap(v)

    def test_casts_to_float32(self):
        h = HeightMap(np.zeros((2, 2), dtype=np.float64))
        assert h.values.dtype == np.float32

    def test_width_height(self):
        h = HeightMap(np.zeros((3, 7)))
        assert (h.width, h.height) == (7, 3)


class TestPngRoundTrip:
    def test_16bit_full_precision(self, tmp_path, rng):
        # 16-bit codes survive a save/load cycle exactly.
        codes = rng.integers(0, 65536, size=(32, 32))
        h = HeightMap((codes / 65535.0).astype(np.float32))
        p = tmp_path / "m.png"
        save_heightmap(h, p, depth=16)
        back = load_heightmap(p)
        np.testing.assert_allclose(back.values, codes / 65535.0, atol=1e-7)

    def test_8bit_quantization_error_bound(self, tmp_path, ramp_map):
        p = tmp_path / "m8.png"
        save_heightmap(ramp_map, p, depth=8)
        back = load_heightmap(p)
        assert back.values.shape == ramp_map.values.shape
        assert np.max(np.abs(back.values - ramp_map.values)) <= 0.5 / 255 + 1e-7

    def test_rounds_half_up(self, tmp_path):
        # 0.5/255 quantizes to code 1, not 0 (no banker's rounding).
        h = HeightMap(np.full((2, 2), 0.5 / 255, dtype=np.float32))
        p = tmp_path / "half.png"
        save_heightmap(h, p, depth=8)
        img = np.asarray(Image.open(p))
        assert img.dtype == np.uint8
        assert np.all(img == 1)

    def test_16bit_saves_as_16bit(self, tmp_path):
        h = HeightMap(np.array([[0.0, 1.0]], dtype=np.float32))
        p = tmp_path / "d.png"
        save_heightmap(h, p, depth=16)
        img = Image.open(p)
        assert img.mode in ("I;16", "I")
        assert np.asarray(img).max() == 65535

    def test_bad_depth_rejected(self, tmp_path, ramp_map):
        with pytest.raises(ValueError):
            save_heightmap(ramp_map, tmp_path / "x.png", depth=12)

    def test_color_png_rejected(self, tmp_path):
        p = tmp_path / "rgb.png"
        Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8), mode="RGB").save(p)
        with pytest.raises(FormatError, match="color"):
            load_heightmap(p)

    def test_palette_png_rejected(self, tmp_path):
        p = tmp_path / "pal.png"
        Image.fromarray(np.zeros((4, 4), dtype=np.uint8), mode="L").convert("P").save(p)
        with pytest.raises(FormatError):
            load_heightmap(p)


class TestRawHmap:
    def test_round_trip_exact(self, tmp_path, rng):
        v = rng.random((17, 23), dtype=np.float32)
        h = HeightMap(v)
        p = tmp_path / "m.hmap"
        save_heightmap(h, p)
        back = load_heightmap(p)
        np.testing.assert_array_equal(back.values, v)

    def test_header_layout(self, tmp_path):
        h = HeightMap(np.zeros((2, 3), dtype=np.float32))
        p = tmp_path / "m.hmap"
        save_heightmap(h, p)
        raw = p.read_bytes()
        assert raw[:4] == b"HMAP"
        assert int.from_bytes(raw[4:8], "little") == 3  # width
        assert int.from_bytes(raw[8:12], "little") == 2  # height
        assert len(raw) == 12 + 4 * 6

    def test_truncated_rejected(self, tmp_path):
        p = tmp_path / "bad.hmap"
        p.write_bytes(b"HMAP" + (5).to_bytes(4, "little") + (5).to_bytes(4, "little") + b"\x00" * 8)
        with pytest.raises(FormatError, match="size"):
            load_heightmap(p)


class TestNormalize:
    def test_spans_unit_interval(self, rng):
        h = HeightMap(rng.random((8, 8), dtype=np.float32) * 0.3 + 0.2)
        n = normalize(h)
        assert n.values.min() == 0.0
        assert n.values.max() == 1.0

    def test_constant_becomes_half(self):
        n = normalize(HeightMap(np.full((4, 4), 0.73, dtype=np.float32)))
        np.testing.assert_array_equal(n.values, 0.5)

    def test_idempotent(self, ramp_map):
        once = normalize(ramp_map)
        twice = normalize(once)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-7)

    def test_monotone(self, rng):
        v = rng.random((6, 6), dtype=np.float32)
        n = normalize(HeightMap(v))
        order = np.argsort(v.ravel())
        assert np.all(np.diff(n.values.ravel()[order]) >= 0)


class TestResample:
    def test_identity_when_same_size(self, ramp_map):
        out = resample(ramp_map, ramp_map.width, ramp_map.height)
        np.testing.assert_array_equal(out.values, ramp_map.values)

    def test_corners_preserved(self, rng):
        v = rng.random((9, 13), dtype=np.float32)
        h = HeightMap(v)
        up = upscale(h, 51, 33)
        got = up.values
        np.testing.assert_allclose(
            [got[0, 0], got[0, -1], got[-1, 0], got[-1, -1]],
            [v[0, 0], v[0, -1], v[-1, 0], v[-1, -1]],
            atol=1e-6,
        )

    def test_no_overshoot(self, rng):
        v = rng.random((7, 7), dtype=np.float32)
        up = upscale(HeightMap(v), 40, 40)
        assert up.values.min() >= v.min() - 1e-6
        assert up.values.max() <= v.max() + 1e-6

    def test_linear_ramp_stays_linear(self):
        # Bilinear interpolation reproduces an affine surface exactly.
        x = np.linspace(0.0, 1.0, 5)[None, :] * np.ones((5, 1))
        up = upscale(HeightMap(x.astype(np.float32)), 17, 17)
        expected = np.linspace(0.0, 1.0, 17)[None, :] * np.ones((17, 1))
        np.testing.assert_allclose(up.values, expected, atol=1e-6)

    def test_downscale_allowed_via_resample(self, ramp_map):
        out = resample(ramp_map, 16, 12)
        assert (out.width, out.height) == (16, 12)

    def test_upscale_rejects_shrink(self, ramp_map):
        with pytest.raises(ValueError):
            upscale(ramp_map, 8, 8)


class TestColormap:
    def test_shape_and_dtype(self, ramp_map):
        img = apply_colormap(ramp_map, "terrain")
        assert img.pixels.shape == (ramp_map.height, ramp_map.width, 3)
        assert img.pixels.dtype == np.uint8

    def test_gray_is_identity_ramp(self):
        h = HeightMap(np.array([[0.0, 0.5, 1.0]], dtype=np.float32))
        img = apply_colormap(h, "gray")
        np.testing.assert_array_equal(img.pixels[0, 0], [0, 0, 0])
        np.testing.assert_array_equal(img.pixels[0, 2], [255, 255, 255])
        assert np.all(img.pixels[0, 1] == img.pixels[0, 1][0])  # gray stays neutral

    def test_unknown_palette(self, ramp_map):
        with pytest.raises(ValueError, match="palette"):
            apply_colormap(ramp_map, "viridis")


class TestMesh:
    def test_counts(self):
        h = HeightMap(np.zeros((5, 7), dtype=np.float32))
        mesh = to_mesh(h, vertical_scale=2.0)
        assert mesh.vertices.shape == (35, 3)
        assert mesh.triangles.shape == (2 * 4 * 6, 3)

    def test_vertex_positions(self):
        v = np.array([[0.0, 0.25], [0.5, 1.0]], dtype=np.float32)
        mesh = to_mesh(HeightMap(v), vertical_scale=10.0, horizontal_step=2.0)
        # Row i, column j maps to (x=2j, y=2i, z=10*v).
        np.testing.assert_allclose(mesh.vertices[0], [0.0, 0.0, 0.0])
        np.testing.assert_allclose(mesh.vertices[1], [2.0, 0.0, 2.5])
        np.testing.assert_allclose(mesh.vertices[2], [0.0, 2.0, 5.0])
        np.testing.assert_allclose(mesh.vertices[3], [2.0, 2.0, 10.0])

    def test_winding_ccw_from_above(self):
        # For a flat map every triangle's signed area in the xy plane is
        # positive when wound counter-clockwise seen from +z.
        mesh = to_mesh(HeightMap(np.zeros((3, 3), dtype=np.float32)), vertical_scale=1.0)
        p = mesh.vertices[mesh.triangles]
        cross = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
            p[:, 1, 1] - p[:, 0, 1]
        ) * (p[:, 2, 0] - p[:, 0, 0])
        assert np.all(cross > 0)

    def test_obj_export(self, tmp_path):
        mesh = to_mesh(HeightMap(np.zeros((2, 2), dtype=np.float32)), vertical_scale=1.0)
        p = tmp_path / "m.obj"
        save_mesh(mesh, p)
        lines = p.read_text().strip().splitlines()
        assert sum(1 for ln in lines if ln.startswith("v ")) == 4
        f_lines = [ln for ln in lines if ln.startswith("f ")]
        assert len(f_lines) == 2
        # Face indices are 1-based.
        assert all(min(int(t) for t in ln.split()[1:]) >= 1 for ln in f_lines)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            to_mesh(HeightMap(np.zeros((1, 5), dtype=np.float32)), vertical_scale=1.0)
