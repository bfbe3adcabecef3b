"""Desk-scale VQ-VAE: affine patch encoder/decoder, shared codebook,
straight-through training with Adam.

The objective per batch is::

    L = mean((x - x_hat)^2)                  # reconstruction (Gaussian NLL up to scale)
      + mean((sg[z_e] - e_s)^2)              # codebook term, moves codewords
      + beta * mean((z_e - sg[e_s])^2)       # commitment term, moves the encoder

Means run over elements. The decoder sees ``e_s`` in the forward pass and
its input gradient is copied straight through to ``z_e``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import DivergenceError, InsufficientDataError
from .kmeans import kmeans_codebook
from .patches import video_patches
from .vq import Codebook, PatchDecoder, PatchEncoder, nearest_codeword


@dataclass(frozen=True)
class VqVaeConfig:
    patch_size: int = 4
    latent_dim: int = 8
    K: int = 256
    beta: float = 0.25
    learning_rate: float = 1e-2
    steps: int = 200
    batch_size: int = 4096

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.K < 2 or self.latent_dim < 1 or self.patch_size < 1:
            raise ValueError("K >= 2, latent_dim >= 1 and patch_size >= 1 required")


class LossTerms(NamedTuple):
    total: float
    recon: float
    codebook: float
    commit: float


class TrainResult(NamedTuple):
    encoder: PatchEncoder
    decoder: PatchDecoder
    codebook: Codebook
    loss_trace: list


def vqvae_loss(x, recon, z_e, e_s, beta: float) -> LossTerms:
    x, recon = np.asarray(x, float), np.asarray(recon, float)
    z_e, e_s = np.asarray(z_e, float), np.asarray(e_s, float)
    if x.shape != recon.shape or z_e.shape != e_s.shape:
        raise ValueError("x/recon and z_e/e_s must have matching shapes")
    r = float(np.mean((x - recon) ** 2))
    gap = float(np.mean((z_e - e_s) ** 2))
    # sg[] only changes gradients; both latent terms share the same value
    return LossTerms(r + gap + beta * gap, r, gap, beta * gap)


class Forward(NamedTuple):
    z: np.ndarray       # (M, d) encoder output
    idx: np.ndarray     # (M,) selected codewords
    q: np.ndarray       # (M, d) e_s
    recon: np.ndarray   # (M, P) decoder output, unclamped


def forward(encoder: PatchEncoder, decoder: PatchDecoder, codewords, X, idx=None) -> Forward:
    z = X @ encoder.w.T + encoder.b
    if idx is None:
        idx = nearest_codeword(z, codewords)
    q = codewords[idx]
    return Forward(z, idx, q, q @ decoder.w.T + decoder.b)


def term_gradients(encoder, decoder, codewords, X, beta, idx=None):
    """Loss terms plus the gradient of each term w.r.t. the parameters it trains.

    Returns ``(terms, fwd, grads)`` where ``grads`` maps
    ``"recon"`` -> decoder weights and the straight-through latent gradient,
    ``"codebook"`` -> codewords, ``"commit"`` -> encoder weights.
    With ``idx`` fixed, every entry except ``recon/dz`` is the exact derivative
    of its term's value.
    """
    X = np.asarray(X, float)
    f = forward(encoder, decoder, codewords, X, idx)
    terms = vqvae_loss(X, f.recon, f.z, f.q, beta)
    M, P = X.shape
    d = f.z.shape[1]

    d_recon = 2.0 * (f.recon - X) / (M * P)
    dq = d_recon @ decoder.w
    diff = f.z - f.q
    d_cb = np.zeros_like(codewords)
    np.add.at(d_cb, f.idx, -2.0 * diff / (M * d))
    d_commit_z = 2.0 * beta * diff / (M * d)

    grads = {
        "recon": {"dec_w": d_recon.T @ f.q, "dec_b": d_recon.sum(axis=0), "dz": dq},
        "codebook": {"codebook": d_cb},
        "commit": {"enc_w": d_commit_z.T @ X, "enc_b": d_commit_z.sum(axis=0)},
    }
    return terms, f, grads


def training_gradients(encoder, decoder, codewords, X, beta):
    """Total-loss gradients with the straight-through estimator applied."""
    terms, f, g = term_gradients(encoder, decoder, codewords, X, beta)
    dz = g["recon"]["dz"]
    return terms, {
        "enc_w": g["commit"]["enc_w"] + dz.T @ X,
        "enc_b": g["commit"]["enc_b"] + dz.sum(axis=0),
        "dec_w": g["recon"]["dec_w"],
        "dec_b": g["recon"]["dec_b"],
        "codebook": g["codebook"]["codebook"],
    }


class _Adam:
    def __init__(self, params, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        for k in params:
            g = grads[k]
            self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * g * g
            m_hat = self.m[k] / (1 - self.b1 ** self.t)
            v_hat = self.v[k] / (1 - self.b2 ** self.t)
            params[k] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def init_params(patch: int, channels: int, latent_dim: int, rng):
    P = patch * patch * channels
    enc = PatchEncoder(patch, channels, rng.normal(0.0, 1.0 / np.sqrt(P), (latent_dim, P)),
                       np.zeros(latent_dim))
    dec = PatchDecoder(patch, channels, rng.normal(0.0, 1.0 / np.sqrt(latent_dim), (P, latent_dim)),
                       np.zeros(P))
    return enc, dec


def _init_codebook(z, K, rng):
    sample = z[rng.permutation(len(z))[: max(K * 16, 4096)]]
    try:
        return kmeans_codebook(sample, K, seed=int(rng.integers(2**31)), iters=10).codewords.copy()
    except InsufficientDataError:
        # too few distinct latents: jitter random picks so codewords stay distinct
        base = sample[rng.integers(len(sample), size=K)]
        return base + rng.normal(0.0, 1e-3, base.shape)


def train_vqvae(frames, cfg: VqVaeConfig = VqVaeConfig(), seed: int = 0) -> TrainResult:
    """Train encoder, decoder and codebook on the patches of ``frames``.

    ``frames`` is an (n, H, W, D) array (a single (H, W, D) frame is accepted).
    ``loss_trace`` holds full-dataset :class:`LossTerms` before every step
    and after the last one. Deterministic given ``seed``.
    """
    frames = np.asarray(frames, dtype=float)
    if frames.ndim == 3:
        frames = frames[None]
    if frames.size == 0:
        raise ValueError("training set is empty")
    X = video_patches(frames, cfg.patch_size)
    rng = np.random.default_rng(seed)
    enc, dec = init_params(cfg.patch_size, frames.shape[-1], cfg.latent_dim, rng)
    codewords = _init_codebook(X @ enc.w.T + enc.b, cfg.K, rng)

    params = {"enc_w": enc.w, "enc_b": enc.b, "dec_w": dec.w, "dec_b": dec.b, "codebook": codewords}
    opt = _Adam(params, cfg.learning_rate)
    trace = []

    def full_loss():
        f = forward(enc, dec, params["codebook"], X)
        return vqvae_loss(X, f.recon, f.z, f.q, cfg.beta)

    full_batch = len(X) <= cfg.batch_size
    for _ in range(cfg.steps):
        batch = X if full_batch else X[rng.choice(len(X), cfg.batch_size, replace=False)]
        terms, grads = training_gradients(enc, dec, params["codebook"], batch, cfg.beta)
        trace.append(terms if full_batch else full_loss())
        if not np.isfinite(terms.total) or not all(np.all(np.isfinite(g)) for g in grads.values()):
            raise DivergenceError(f"loss became non-finite after {len(trace)} steps")
        opt.step(params, grads)
    trace.append(full_loss())
    if not np.isfinite(trace[-1].total):
        raise DivergenceError("loss became non-finite")

    # round to float32 so the shared codebook file reproduces these values exactly
    codebook = Codebook(params["codebook"].astype(np.float32))
    return TrainResult(enc, dec, codebook, trace)

