import numpy as np
import pytest

from mirage.codec.ae import fit_ae
from mirage.pipeline import VqModel, default_vq_config
from mirage.codec.vqvae import train_vqvae
from mirage.video import synthetic_video


@pytest.fixture(scope="session")
def video():
    return synthetic_video()


@pytest.fixture(scope="session")
def small_video():
    return synthetic_video(n=6, height=64, width=64, seed=3)


@pytest.fixture(scope="session")
def ae_params(video):
    return fit_ae(video.frames, patch=4, q=8)


@pytest.fixture(scope="session")
def vq_model(video):
    """Briefly trained 16x16-grid model; enough for plumbing tests."""
    from dataclasses import replace
    cfg = replace(default_vq_config(video, K=256), steps=25)
    res = train_vqvae(video.frames, cfg, seed=11)
    return VqModel(res.encoder, res.decoder, res.codebook)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
