"""End-to-end scheme execution.

Four schemes are supported:

* ``RAW``        every frame, q-bit pixels, straight over the noisy channel
* ``RAW_AE``     every frame, q-bit autoencoder latents (2 values per pixel)
* ``MIRAGE_AE``  N selected keyframes as AE latents + ARQ-protected caption
* ``MIRAGE_VQ``  N selected keyframes as VQ indices + ARQ-protected caption

Keyframe codes are exposed to bit errors; captions are delivered exactly or
the run fails. Latency is ``(code bits + caption bits on air) / T + t0``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from ._bits import bits_to_bytes, bits_to_codes, bytes_to_bits, codes_to_bits
from ._rng import substream
from .channel import (
    ChannelConfig,
    LinkBudget,
    ReliabilityConfig,
    arq_transmit,
    expected_arq_bits,
    link_budget,
    optimal_segment_bytes,
    transmit_bits,
)
from .codec.ae import AeParams, ae_decode, ae_dequantize, ae_encode, ae_quantize, fit_ae
from .codec.pixels import dequantize, pixel_codes
from .codec.vq import Codebook, IndexMap, PatchDecoder, PatchEncoder, vq_decode, vq_encode
from .codec.vqvae import VqVaeConfig, train_vqvae
from .errors import CodebookFormatError, MirageError
from .metrics import QualityReport, bpp, mse, psnr, speedups
from .selector import SelectorConfig, score_frames, select_keyframes
from .transport import (
    KeyframeCodes,
    Scheme,
    SemanticPayload,
    compress_caption,
    decompress_caption,
    frame_payload,
    payload_size_report,
)
from .video import VideoTensor, atomic_write, synthetic_video

__all__ = [
    "VqModel", "SchemeConfig", "TransmissionRecord", "run_scheme", "run_table1",
    "size_model_record", "raw_baseline", "sweep", "prepare_models", "records_to_csv",
    "records_to_json", "CSV_COLUMNS", "VideoTensor", "synthetic_video", "DEFAULT_CAPTION",
    "Table1Report", "parse_sizes", "default_vq_config", "save_vq_model", "load_vq_model",
]

DEFAULT_CAPTION = "a bright square drifts to the right across a slowly shifting colour gradient"

CSV_COLUMNS = ["scheme", "snr_db", "q", "K", "semantic_bytes", "total_bytes", "latency_ms",
               "attempts", "mse", "psnr_db", "bpp", "data_speedup", "latency_speedup",
               "seed", "error"]


class VqModel(NamedTuple):
    encoder: PatchEncoder
    decoder: PatchDecoder
    codebook: Codebook


@dataclass
class SchemeConfig:
    scheme: Scheme
    q: int = 8
    K: int = 256
    N: int = 1
    caption: str = DEFAULT_CAPTION
    selector: SelectorConfig = field(default_factory=SelectorConfig)
    ae: AeParams | None = None
    vq: VqModel | None = None

    def __post_init__(self):
        self.scheme = Scheme(self.scheme)
        if self.scheme in (Scheme.RAW, Scheme.RAW_AE, Scheme.MIRAGE_AE) and not 1 <= self.q <= 16:
            raise ValueError("q must be in [1, 16]")
        if self.scheme in (Scheme.RAW_AE, Scheme.MIRAGE_AE) and self.ae is None:
            raise ValueError(f"{self.scheme.name} needs AE parameters")
        if self.scheme == Scheme.MIRAGE_VQ:
            if self.vq is None:
                raise ValueError("MIRAGE_VQ needs a trained VQ model")
            if self.vq.codebook.K != self.K:
                raise ValueError(f"codebook has K={self.vq.codebook.K}, config says K={self.K}")
        if self.is_mirage and self.N < 1:
            raise ValueError("keyframe budget N must be >= 1")

    @property
    def is_mirage(self) -> bool:
        return self.scheme in (Scheme.MIRAGE_AE, Scheme.MIRAGE_VQ)

    @property
    def rate_param(self) -> int:
        return self.K if self.scheme == Scheme.MIRAGE_VQ else self.q


@dataclass(eq=False)
class TransmissionRecord:
    scheme: Scheme
    snr_db: float
    q: int | None
    K: int | None
    seed: int
    semantic_bits: int = 0
    overhead_bits: int = 0
    total_bytes: int = 0
    latency_s: float = math.nan
    arq_attempts: int = 0
    arq_bits: int = 0
    bit_errors: int = 0
    caption_ok: bool | None = None
    caption: str | None = None
    keyframes: list = field(default_factory=list)
    quality: QualityReport = field(default_factory=lambda: QualityReport(math.nan, math.nan, math.nan))
    error: str | None = None
    reconstruction: np.ndarray | None = None
    payload: SemanticPayload | None = None
    received: SemanticPayload | None = None

    @property
    def semantic_bytes(self) -> float:
        return self.semantic_bits / 8

    @property
    def semantic_kb(self) -> float:
        return self.semantic_bits / 8 / 1024

    def to_dict(self) -> dict:
        qr = self.quality
        return {
            "scheme": self.scheme.cli_name,
            "snr_db": self.snr_db,
            "q": self.q,
            "K": self.K,
            "seed": self.seed,
            "semantic_bits": self.semantic_bits,
            "overhead_bits": self.overhead_bits,
            "semantic_bytes": self.semantic_bytes,
            "total_bytes": self.total_bytes,
            "latency_s": _num(self.latency_s),
            "arq_attempts": self.arq_attempts,
            "arq_bits": self.arq_bits,
            "bit_errors": self.bit_errors,
            "caption_ok": self.caption_ok,
            "caption": self.caption,
            "keyframes": list(self.keyframes),
            "mse": _num(qr.mse),
            "psnr_db": _num(qr.psnr_db),
            "bpp": _num(qr.bpp),
            "data_speedup": _num(qr.data_speedup),
            "latency_speedup": _num(qr.latency_speedup),
            "error": self.error,
        }

    def csv_row(self) -> dict:
        d = self.to_dict()
        d["latency_ms"] = None if d["latency_s"] is None else d["latency_s"] * 1e3
        d["attempts"] = d["arq_attempts"]
        return {k: "" if d.get(k) is None else d[k] for k in CSV_COLUMNS}


def _num(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return None
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


# ---------------------------------------------------------------------------
# models


def default_vq_config(video: VideoTensor, K: int = 256, grid: int = 16, steps: int = 200) -> VqVaeConfig:
    """VQ-VAE settings giving a ``grid x grid`` index map per frame."""
    H, W = video.shape[:2]
    if H % grid or W % grid or H // grid != W // grid:
        raise ValueError(f"frame {H}x{W} cannot be tiled into a {grid}x{grid} latent grid")
    return VqVaeConfig(patch_size=H // grid, latent_dim=8, K=K, steps=steps)


def prepare_models(video: VideoTensor, scheme: Scheme, *, q: int = 8, K: int = 256,
                   seed: int = 0, ae_patch: int = 4, grid: int = 16, steps: int = 200):
    """Fit the AE or train the VQ-VAE a scheme needs; None for RAW."""
    scheme = Scheme(scheme)
    if scheme in (Scheme.RAW_AE, Scheme.MIRAGE_AE):
        return fit_ae(video.frames, patch=ae_patch, q=q)
    if scheme == Scheme.MIRAGE_VQ:
        cfg = default_vq_config(video, K, grid, steps)
        res = train_vqvae(video.frames, cfg, seed=int(substream(seed, "training").integers(2**63)))
        return VqModel(res.encoder, res.decoder, res.codebook)
    return None


# ---------------------------------------------------------------------------
# single run


def _keyframe_indices(video: VideoTensor, scfg: SchemeConfig) -> list[int]:
    if not scfg.is_mirage:
        return list(range(video.n))
    return select_keyframes(score_frames(video, scfg.selector), scfg.N)


def _encode(video, scfg, indices) -> list[KeyframeCodes]:
    H, W, D = video.shape
    out = []
    for i in indices:
        frame = video.frames[i]
        if scfg.scheme == Scheme.RAW:
            out.append(KeyframeCodes.quantized(H, W, scfg.q, pixel_codes(frame, scfg.q), D))
        elif scfg.scheme in (Scheme.RAW_AE, Scheme.MIRAGE_AE):
            ae = replace(scfg.ae, q=scfg.q)
            codes = ae_quantize(ae_encode(frame, ae), ae)
            out.append(KeyframeCodes.quantized(H, W, scfg.q, codes, ae.values_per_pixel, scfg.ae.params_id))
        else:
            m = scfg.vq
            s = vq_encode(m.encoder(frame), m.codebook)
            out.append(KeyframeCodes.vq(s.h, s.w, m.codebook.K, s.indices, s.codebook_id))
    return out


def _decode(kf: KeyframeCodes, scfg: SchemeConfig, shape) -> np.ndarray:
    H, W, D = shape
    if scfg.scheme == Scheme.RAW:
        return dequantize(kf.codes, scfg.q).reshape(H, W, D)
    if scfg.scheme in (Scheme.RAW_AE, Scheme.MIRAGE_AE):
        ae = replace(scfg.ae, q=scfg.q)
        latent = ae_dequantize(kf.codes, ae, H // ae.patch, W // ae.patch)
        return ae_decode(latent, ae)
    m = scfg.vq
    return vq_decode(IndexMap(kf.h, kf.w, kf.codes, kf.codebook_id), m.codebook, m.decoder)


def _through_channel(keyframes, ber, rng):
    """Send every code section over the BER channel; returns (received, flips)."""
    if not keyframes:
        return [], 0
    bits = np.concatenate([codes_to_bits(k.codes, k.bits) for k in keyframes])
    rx = transmit_bits(bits, ber, rng)
    flips = int(np.count_nonzero(rx != bits))
    received, pos = [], 0
    for k in keyframes:
        n = k.code_bits
        codes = bits_to_codes(rx[pos:pos + n], k.bits, k.count)
        received.append(KeyframeCodes(k.h, k.w, k.tag, codes, k.bits, k.values, k.codebook_id))
        pos += n
    return received, flips


def run_scheme(video: VideoTensor, scfg: SchemeConfig, ccfg: ChannelConfig,
               rel: ReliabilityConfig = ReliabilityConfig(), seed: int | None = None,
               *, ber: float | None = None) -> TransmissionRecord:
    """Encode, transmit and decode ``video`` under one scheme.

    ``seed`` defaults to ``ccfg.seed``. ``ber`` overrides the link's bit
    error rate (throughput still follows ``ccfg``). Keyframe PSNR for Mirage
    schemes is measured against the selected source frames.
    """
    seed = ccfg.seed if seed is None else seed
    budget = link_budget(ccfg)
    if ber is not None:
        budget = replace(budget, ber=float(ber))
    indices = _keyframe_indices(video, scfg)
    caption = compress_caption(scfg.caption) if scfg.is_mirage else b""
    payload = SemanticPayload(scfg.scheme, _encode(video, scfg, indices), caption)
    framed = frame_payload(payload)
    sizes = payload_size_report(payload, framed)

    received_kf, flips = _through_channel(payload.keyframes, budget.ber, substream(seed, "channel"))

    rec = TransmissionRecord(
        scfg.scheme, ccfg.snr_db,
        None if scfg.scheme == Scheme.MIRAGE_VQ else scfg.q,
        scfg.K if scfg.scheme == Scheme.MIRAGE_VQ else None,
        seed, sizes.semantic_bits, sizes.overhead_bits, sizes.total_bytes,
        keyframes=indices if scfg.is_mirage else [],
    )
    rec.bit_errors = flips

    rx_caption = b""
    if scfg.is_mirage:
        arq = arq_transmit(bytes_to_bits(caption), budget, rel, substream(seed, "arq"))
        rx_caption = bits_to_bytes(arq.delivered)
        rec.arq_attempts, rec.arq_bits = arq.attempts, arq.bits_sent
        rec.caption = decompress_caption(rx_caption).decode("utf-8")
        rec.caption_ok = rec.caption == scfg.caption

    recon = np.stack([_decode(k, scfg, video.shape) for k in received_kf])
    reference = video.frames[indices]
    err = mse(reference, recon)
    H, W = video.shape[:2]
    rec.quality = QualityReport(err, psnr(err), bpp(payload.keyframe_bits, H, W) / len(indices))
    rec.latency_s = (payload.keyframe_bits + rec.arq_bits) / budget.throughput_bps + ccfg.fixed_overhead_s
    rec.reconstruction = recon
    rec.payload = payload
    rec.received = SemanticPayload(scfg.scheme, received_kf, rx_caption)
    return rec


# ---------------------------------------------------------------------------
# size-model mode and baselines


def size_model_record(scheme, frame_kb: float, text_kb: float, ccfg: ChannelConfig,
                      budget: LinkBudget | None = None) -> TransmissionRecord:
    """Record built from externally supplied sizes (KB = 1024 bytes).

    Caption bits are charged at their expected ARQ cost with CRC32 segments
    sized optimally for the link BER.
    """
    scheme = Scheme(scheme)
    budget = budget or link_budget(ccfg)
    frame_bits = frame_kb * 1024 * 8
    text_bits = text_kb * 1024 * 8
    arq_bits = 0.0
    if text_bits > 0:
        nbits = int(round(text_bits))
        arq_bits = expected_arq_bits(nbits, budget.ber, optimal_segment_bytes(nbits, budget.ber))
    rec = TransmissionRecord(scheme, ccfg.snr_db, None, None, ccfg.seed)
    rec.semantic_bits = frame_bits + text_bits
    rec.arq_bits = arq_bits
    rec.latency_s = (frame_bits + arq_bits) / budget.throughput_bps + ccfg.fixed_overhead_s
    return rec


def raw_baseline(video: VideoTensor, q: int, ccfg: ChannelConfig,
                 budget: LinkBudget | None = None) -> TransmissionRecord:
    """Size and latency of raw streaming without simulating the channel."""
    budget = budget or link_budget(ccfg)
    n, (H, W, D) = video.n, video.shape
    bits = n * H * W * D * q
    rec = TransmissionRecord(Scheme.RAW, ccfg.snr_db, q, None, ccfg.seed)
    rec.semantic_bits = bits
    rec.latency_s = bits / budget.throughput_bps + ccfg.fixed_overhead_s
    return rec


def _apply_speedups(rec: TransmissionRecord, baseline: TransmissionRecord):
    rec.quality.data_speedup, rec.quality.latency_speedup = speedups(rec, baseline)


class Table1Report(NamedTuple):
    records: list
    mode: str

    def speedups(self) -> dict:
        return {r.scheme.cli_name: (r.quality.data_speedup, r.quality.latency_speedup)
                for r in self.records}

    def to_dict(self) -> dict:
        return {"mode": self.mode, "records": [r.to_dict() for r in self.records]}


def parse_sizes(sizes: dict) -> dict:
    """Normalise a size table to ``{Scheme: (frame_kb, text_kb)}``.

    Values may be a number (frames only), ``[frame, text]`` or
    ``{"frame": ..., "text": ...}``.
    """
    out = {}
    for key, val in sizes.items():
        scheme = Scheme.parse(key)
        if isinstance(val, dict):
            out[scheme] = (float(val.get("frame", 0.0)), float(val.get("text", 0.0)))
        elif isinstance(val, (list, tuple)):
            out[scheme] = (float(val[0]), float(val[1]) if len(val) > 1 else 0.0)
        else:
            out[scheme] = (float(val), 0.0)
    if Scheme.RAW not in out:
        raise ValueError("size table needs a RAW entry as the baseline")
    return out


def run_table1(video: VideoTensor | None, configs, ccfg: ChannelConfig,
               rel: ReliabilityConfig = ReliabilityConfig(), seed: int | None = None,
               sizes: dict | None = None) -> Table1Report:
    """One record per scheme with speedups against RAW.

    With ``sizes`` (size-model mode) no video is needed and the records come
    straight from the supplied KB figures.
    """
    if sizes is not None:
        table = parse_sizes(sizes)
        budget = link_budget(ccfg)
        records = [size_model_record(s, f, t, ccfg, budget) for s, (f, t) in sorted(table.items())]
        mode = "size-model"
    else:
        records = [run_scheme(video, c, ccfg, rel, seed) for c in configs]
        mode = "simulated"
    base = next((r for r in records if r.scheme == Scheme.RAW), None)
    if base is None:
        raw_q = next((c.q for c in configs if c.scheme == Scheme.RAW), 8)
        base = raw_baseline(video, raw_q, ccfg)
    for r in records:
        _apply_speedups(r, base)
    return Table1Report(records, mode)


# ---------------------------------------------------------------------------
# sweeps


def sweep(video: VideoTensor, schemes, snr_db, ccfg: ChannelConfig,
          rel: ReliabilityConfig = ReliabilityConfig(), seeds=1) -> list[TransmissionRecord]:
    """Run every (scheme, snr, seed) cell; failures are recorded, not raised.

    ``seeds`` is a count (seeds ``ccfg.seed + i``) or an explicit list.
    Speedups are relative to raw streaming at the same SNR with the scheme's
    own q (AE schemes) or 8 bits (VQ).
    """
    seed_list = list(range(ccfg.seed, ccfg.seed + seeds)) if isinstance(seeds, int) else list(seeds)
    rows = []
    for snr in snr_db:
        cell_cfg = replace(ccfg, snr_db=float(snr))
        for seed in seed_list:
            cell_cfg_s = replace(cell_cfg, seed=seed)
            for scfg in schemes:
                try:
                    rec = run_scheme(video, scfg, cell_cfg_s, rel, seed)
                    base_q = 8 if scfg.scheme == Scheme.MIRAGE_VQ else scfg.q
                    _apply_speedups(rec, raw_baseline(video, base_q, cell_cfg_s))
                except MirageError as exc:
                    rec = TransmissionRecord(
                        scfg.scheme, float(snr),
                        None if scfg.scheme == Scheme.MIRAGE_VQ else scfg.q,
                        scfg.K if scfg.scheme == Scheme.MIRAGE_VQ else None, seed,
                        error=f"{type(exc).__name__}: {exc}")
                rec.reconstruction = None
                rows.append(rec)
    return rows


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def records_to_json(records) -> str:
    return json.dumps([r.to_dict() for r in records], indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# VQ model files


def vq_params_path(codebook_path) -> str:
    return f"{codebook_path}.params.npz"


def save_vq_model(model: VqModel, path) -> None:
    """Codebook file at ``path`` plus encoder/decoder weights beside it."""
    buf = io.BytesIO()
    np.savez(buf, enc_w=model.encoder.w, enc_b=model.encoder.b, dec_w=model.decoder.w,
             dec_b=model.decoder.b, patch=model.encoder.patch, channels=model.encoder.channels,
             codebook_id=model.codebook.id)
    atomic_write(vq_params_path(path), buf.getvalue())
    model.codebook.save(path)


def load_vq_model(path) -> VqModel:
    cb = Codebook.load(path)
    try:
        with np.load(vq_params_path(path)) as z:
            if int(z["codebook_id"]) != cb.id:
                raise CodebookFormatError("encoder/decoder weights belong to a different codebook")
            patch, ch = int(z["patch"]), int(z["channels"])
            enc = PatchEncoder(patch, ch, z["enc_w"], z["enc_b"])
            dec = PatchDecoder(patch, ch, z["dec_w"], z["dec_b"])
    except FileNotFoundError:
        raise CodebookFormatError(f"missing weights file {vq_params_path(path)}") from None
    if enc.w.shape[0] != cb.dim:
        raise CodebookFormatError("encoder latent width disagrees with the codebook")
    return VqModel(enc, dec, cb)
