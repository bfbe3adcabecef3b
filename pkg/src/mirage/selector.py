"""Keyframe selection under a fixed budget.

Utility is additive over frames, so the best N-subset is simply the N
highest-scoring frames. Scorers are pluggable; the built-ins use pixel
statistics only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import BudgetError, ScoreFileError, UnknownScorerError


class FrameScore(NamedTuple):
    frame_index: int
    score: float


@dataclass(frozen=True)
class SelectorConfig:
    N: int = 1
    scorer: str = "variance"
    scorer_params: dict = field(default_factory=dict)


def _frames(video) -> np.ndarray:
    frames = getattr(video, "frames", video)
    frames = np.asarray(frames, dtype=float)
    if frames.ndim == 3:
        frames = frames[..., None]
    if frames.ndim != 4 or len(frames) == 0:
        raise ValueError("video must be a non-empty (n, H, W, D) array")
    return frames


def variance_scores(frames, **_):
    return frames.reshape(len(frames), -1).var(axis=1)


def tempdiff_scores(frames, **_):
    out = np.zeros(len(frames))
    if len(frames) > 1:
        out[1:] = np.abs(np.diff(frames, axis=0)).reshape(len(frames) - 1, -1).mean(axis=1)
    return out


def external_scores(frames, path=None, **_):
    if path is None:
        raise ScoreFileError("external scorer needs scorer_params['path']")
    return load_score_file(path, len(frames))


SCORERS: dict[str, Callable] = {
    "variance": variance_scores,
    "tempdiff": tempdiff_scores,
    "external": external_scores,
}


def load_score_file(path, n_frames: int) -> np.ndarray:
    """Read ``frame_index,score`` lines; every frame must appear exactly once."""
    scores = np.full(n_frames, np.nan)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                idx_s, score_s = line.split(",")
                idx, score = int(idx_s), float(score_s)
            except ValueError:
                raise ScoreFileError(f"{path}:{lineno}: expected 'frame_index,score'") from None
            if not 0 <= idx < n_frames:
                raise ScoreFileError(f"{path}:{lineno}: frame index {idx} outside 0..{n_frames - 1}")
            if not np.isnan(scores[idx]):
                raise ScoreFileError(f"{path}:{lineno}: duplicate frame index {idx}")
            scores[idx] = score
    if np.isnan(scores).any():
        raise ScoreFileError(f"{path}: scores cover {int((~np.isnan(scores)).sum())} of {n_frames} frames")
    return scores


def score_frames(video, cfg: SelectorConfig) -> list[FrameScore]:
    frames = _frames(video)
    try:
        scorer = SCORERS[cfg.scorer]
    except KeyError:
        raise UnknownScorerError(f"unknown scorer {cfg.scorer!r}; choose from {sorted(SCORERS)}") from None
    scores = np.asarray(scorer(frames, **cfg.scorer_params), dtype=float)
    if scores.shape != (len(frames),) or not np.all(np.isfinite(scores)):
        raise ScoreFileError("scorer must return one finite score per frame")
    return [FrameScore(i, float(s)) for i, s in enumerate(scores)]


def select_keyframes(scores, N: int) -> list[int]:
    """Indices of the N best frames, ties to the earlier frame, sorted ascending."""
    if N < 1 or N > len(scores):
        raise BudgetError(f"budget N={N} must lie in 1..{len(scores)}")
    scores = [s if isinstance(s, FrameScore) else FrameScore(i, float(s)) for i, s in enumerate(scores)]
    ranked = sorted(scores, key=lambda fs: (-fs.score, fs.frame_index))
    return sorted(fs.frame_index for fs in ranked[:N])
