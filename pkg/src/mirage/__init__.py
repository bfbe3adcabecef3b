"""Semantic video transmission: keyframe codes plus a caption instead of raw pixels."""
from .channel import (
    ChannelConfig,
    LinkBudget,
    ReliabilityConfig,
    arq_transmit,
    block_error_rate,
    erfc,
    link_budget,
    transmission_latency,
    transmit_bits,
)
from .metrics import QualityReport, bpp, mse, psnr, speedups
from .pipeline import SchemeConfig, TransmissionRecord, prepare_models, run_scheme, run_table1, sweep
from .selector import SelectorConfig, score_frames, select_keyframes
from .transport import Scheme, SemanticPayload, frame_payload, parse_payload
from .video import VideoTensor, ingest, synthetic_video

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig", "LinkBudget", "ReliabilityConfig", "arq_transmit", "block_error_rate", "erfc",
    "link_budget", "transmission_latency", "transmit_bits",
    "QualityReport", "bpp", "mse", "psnr", "speedups",
    "SchemeConfig", "TransmissionRecord", "prepare_models", "run_scheme", "run_table1", "sweep",
    "SelectorConfig", "score_frames", "select_keyframes",
    "Scheme", "SemanticPayload", "frame_payload", "parse_payload",
    "VideoTensor", "ingest", "synthetic_video",
]
