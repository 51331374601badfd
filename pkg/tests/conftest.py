import numpy as np
import pytest

from saropt.data import DatasetManifest, ManifestEntry
from saropt.models import DiscriminatorConfig, TranslatorConfig

TINY_TRANSLATOR = TranslatorConfig(in_channels=1, out_channels=3,
                                   base_feature_maps=2, num_scales=2,
                                   input_size=16)
TINY_DISCRIMINATOR = DiscriminatorConfig(channel_schedule=(4, 8, 8, 8, 1))


@pytest.fixture(scope="session")
def default_translator():
    from saropt.models import build_translator
    return build_translator(TranslatorConfig(), init_seed=0)


@pytest.fixture(scope="session")
def tiny_translator_config():
    return TINY_TRANSLATOR


@pytest.fixture(scope="session")
def tiny_discriminator_config():
    return TINY_DISCRIMINATOR


def make_toy_corpus(root, n=8, size=16, seed=0, splits=("train",)):
    """Paired 16x16 corpus with a smooth, learnable SAR->optical map.

    Values stay within +-0.6 so tanh saturation never blocks the fit;
    optical channels are fixed linear images of the SAR channel.
    """
    rng = np.random.default_rng(seed)
    root = root if hasattr(root, "mkdir") else __import__("pathlib").Path(root)
    (root / "patches").mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(n):
        base = rng.uniform(-0.6, 0.6, (size // 4, size // 4, 1)).astype(np.float32)
        sar = np.repeat(np.repeat(base, 4, 0), 4, 1)
        opt = np.concatenate([sar, -sar, 0.5 * sar], axis=2).astype(np.float32)
        sar_path = f"patches/p{i}_sar.npy"
        opt_path = f"patches/p{i}_opt.npy"
        np.save(root / sar_path, sar)
        np.save(root / opt_path, opt)
        split = splits[i % len(splits)]
        entries.append(ManifestEntry(f"p{i}", sar_path, opt_path, split))
    return DatasetManifest(entries=entries, seed=seed, root=root)


@pytest.fixture()
def toy_manifest(tmp_path):
    return make_toy_corpus(tmp_path)


def finite_difference_grads(loss_fn, param, h):
    """Central finite differences of a scalar function w.r.t. one array."""
    num = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    nflat = num.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        lp = loss_fn()
        flat[i] = orig - h
        lm = loss_fn()
        flat[i] = orig
        nflat[i] = (lp - lm) / (2.0 * h)
    return num


def max_relative_error(analytic, numeric, floor=1e-8):
    denom = np.maximum(floor, np.abs(analytic) + np.abs(numeric))
    return float((np.abs(analytic - numeric) / denom).max())
