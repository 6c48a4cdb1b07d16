import numpy as np
import pytest
import torch

from terrastyle.heightfield import HeightMap
from terrastyle.nst import (
    IMAGENET_MEANS,
    LAYER_NAMES,
    SHAPE_PLAN,
    FeatureExtractor,
    WeightFormatError,
    load_weights,
    postprocess,
    preprocess,
)


class TestTopology:
    def test_sixteen_stages_in_order(self):
        assert LAYER_NAMES == (
            "conv1_1", "conv1_2",
            "conv2_1", "conv2_2",
            "conv3_1", "conv3_2", "conv3_3", "conv3_4",
            "conv4_1", "conv4_2", "conv4_3", "conv4_4",
            "conv5_1", "conv5_2", "conv5_3", "conv5_4",
        )

    def test_channel_plan(self):
        assert SHAPE_PLAN["conv1_1"] == (64, 3)
        assert SHAPE_PLAN["conv1_2"] == (64, 64)
        assert SHAPE_PLAN["conv2_1"] == (128, 64)
        assert SHAPE_PLAN["conv3_4"] == (256, 256)
        assert SHAPE_PLAN["conv4_1"] == (512, 256)
        assert SHAPE_PLAN["conv5_4"] == (512, 512)


class TestFeatures:
    def test_shapes_track_pooling(self, extractor, rng):
        # 32px input halves at each of the four group boundaries
        img = torch.from_numpy(rng.random((3, 32, 32), dtype=np.float32))
        feats = extractor.features(img, ["conv1_1", "conv2_1", "conv3_1", "conv4_1", "conv5_1"])
        assert (feats["conv1_1"].n, feats["conv1_1"].m) == (64, 32 * 32)
        assert (feats["conv2_1"].n, feats["conv2_1"].m) == (128, 16 * 16)
        assert (feats["conv3_1"].n, feats["conv3_1"].m) == (256, 8 * 8)
        assert (feats["conv4_1"].n, feats["conv4_1"].m) == (512, 4 * 4)
        assert (feats["conv5_1"].n, feats["conv5_1"].m) == (512, 2 * 2)

    def test_non_square_input(self, extractor, rng):
        img = torch.from_numpy(rng.random((3, 24, 40), dtype=np.float32))
        feats = extractor.features(img, ["conv2_2"])
        assert feats["conv2_2"].m == 12 * 20

    def test_responses_are_post_relu(self, extractor, rng):
        img = torch.from_numpy(rng.standard_normal((3, 16, 16)).astype(np.float32)) * 50
        feats = extractor.features(img, ["conv1_1", "conv3_1", "conv5_1"])
        for f in feats.values():
            assert f.matrix.min().item() >= 0.0

    def test_deterministic(self, extractor, rng):
        img = torch.from_numpy(rng.random((3, 20, 20), dtype=np.float32))
        a = extractor.features(img, ["conv3_1"])["conv3_1"].matrix
        b = extractor.features(img.clone(), ["conv3_1"])["conv3_1"].matrix
        assert torch.equal(a, b)

    def test_float64_passes_through(self, extractor, rng):
        img = torch.from_numpy(rng.random((3, 8, 8)))
        feats = extractor.features(img, ["conv1_2"])
        assert feats["conv1_2"].matrix.dtype == torch.float64

    def test_rejects_unknown_layer(self, extractor):
        with pytest.raises(ValueError, match="unknown layer 'conv6_1'"):
            extractor.features(torch.zeros(3, 8, 8), ["conv6_1"])

    def test_rejects_bad_input_shape(self, extractor):
        with pytest.raises(ValueError, match=r"\(3, h, w\)"):
            extractor.features(torch.zeros(1, 8, 8), ["conv1_1"])


class TestArchiveLoading:
    def test_loads_synthesized_archive(self, weights_path):
        fx = load_weights(weights_path)
        assert fx.layers == LAYER_NAMES

    def test_missing_entry_named(self, weights_path, tmp_path):
        archive = dict(np.load(weights_path))
        del archive["conv3_4.bias"]
        broken = tmp_path / "broken.npz"
        np.savez(broken, **archive)
        with pytest.raises(WeightFormatError, match=r"missing entry conv3_4\.bias"):
            load_weights(broken)

    def test_wrong_shape_named(self, weights_path, tmp_path):
        archive = dict(np.load(weights_path))
        archive["conv2_1.weight"] = archive["conv2_1.weight"][:, :32]
        broken = tmp_path / "broken.npz"
        np.savez(broken, **archive)
        with pytest.raises(WeightFormatError, match=r"conv2_1\.weight has shape"):
            load_weights(broken)

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_weights(tmp_path / "nope.npz")

    def test_garbage_file_raises(self, tmp_path):
        bad = tmp_path / "bad.npz"
        bad.write_bytes(b"not an archive")
        with pytest.raises(WeightFormatError, match="cannot read"):
            load_weights(bad)

    def test_constructor_rejects_missing_stage(self):
        weights = {
            name: (torch.zeros(out, inp, 3, 3), torch.zeros(out))
            for name, (out, inp) in SHAPE_PLAN.items()
            if name != "conv4_3"
        }
        with pytest.raises(WeightFormatError, match="conv4_3"):
            FeatureExtractor(weights)

    def test_constructor_rejects_bad_bias(self):
        weights = {
            name: (torch.zeros(out, inp, 3, 3), torch.zeros(out))
            for name, (out, inp) in SHAPE_PLAN.items()
        }
        weights["conv1_1"] = (weights["conv1_1"][0], torch.zeros(65))
        with pytest.raises(WeightFormatError, match=r"conv1_1\.bias has shape"):
            FeatureExtractor(weights)


class TestPrePostProcess:
    def test_preprocess_layout(self, ramp_map):
        img = preprocess(ramp_map)
        assert img.shape == (3, 48, 64)
        assert img.dtype == torch.float32

    def test_preprocess_channels_identical_before_shift(self, ramp_map):
        img = preprocess(ramp_map)
        means = torch.tensor(IMAGENET_MEANS).view(3, 1, 1)
        restored = img + means
        assert torch.allclose(restored[0], restored[1], atol=1e-5)
        assert torch.allclose(restored[0], restored[2], atol=1e-5)
        assert torch.allclose(
            restored[0], torch.from_numpy(ramp_map.values) * 255.0, atol=1e-4
        )

    def test_round_trip(self, ramp_map):
        out = postprocess(preprocess(ramp_map))
        assert np.allclose(out.values, ramp_map.values, atol=1e-5)

    def test_postprocess_clamps(self):
        img = torch.full((3, 4, 4), 900.0)
        assert postprocess(img).values.max() == 1.0
        img = torch.full((3, 4, 4), -900.0)
        assert postprocess(img).values.min() == 0.0

    def test_postprocess_rejects_bad_shape(self):
        with pytest.raises(ValueError, match=r"\(3, h, w\)"):
            postprocess(torch.zeros(4, 4))

    def test_postprocess_averages_channels(self):
        img = torch.zeros(3, 2, 2)
        means = torch.tensor(IMAGENET_MEANS).view(3, 1, 1)
        # channels carrying 0, 127.5 and 255 after mean restoration
        img += torch.tensor([0.0, 127.5, 255.0]).view(3, 1, 1) - means
        out = postprocess(img)
        assert np.allclose(out.values, 0.5, atol=1e-6)
