import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ramp_map():
    """64x48 map with distinct horizontal and vertical gradients."""
    from terrastyle.heightfield import HeightMap

    y = np.linspace(0.0, 1.0, 48)[:, None]
    x = np.linspace(0.0, 1.0, 64)[None, :]
    return HeightMap((0.6 * y + 0.4 * x).astype(np.float32))


@pytest.fixture(scope="session")
def weights_path(tmp_path_factory):
    """Synthesized weight archive, built once per test session."""
    from terrastyle.nst.convert import synthesize_weights

    path = tmp_path_factory.mktemp("weights") / "weights.npz"
    synthesize_weights(path, seed=0)
    return path


@pytest.fixture(scope="session")
def extractor(weights_path):
    from terrastyle.nst.extractor import load_weights

    return load_weights(weights_path)
