import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mirage.errors import BudgetError, ScoreFileError, ShapeMismatchError, UnknownScorerError, ZeroDenominatorError
from mirage.metrics import bpp, mse, psnr, speedups
from mirage.selector import FrameScore, SelectorConfig, score_frames, select_keyframes

from oracles import best_subset


def test_mse_and_psnr_examples():
    a = np.zeros((2, 2))
    assert mse(a, a) == 0.0
    assert psnr(0.0) == math.inf
    assert psnr(0.01) == pytest.approx(20.0)
    assert mse(a, a + 0.1) == pytest.approx(0.01)
    with pytest.raises(ShapeMismatchError):
        mse(a, np.zeros(3))


def test_bpp_examples():
    assert bpp(2048, 256, 256) == 0.03125
    assert bpp(24 * 256 * 256, 256, 256) == 24


class _R:
    def __init__(self, b, t):
        self.semantic_bytes, self.latency_s = b, t


def test_speedups():
    assert speedups(_R(10, 2.0), _R(100, 4.0)) == (10.0, 2.0)
    with pytest.raises(ZeroDenominatorError):
        speedups(_R(0, 1.0), _R(1, 1.0))


def test_selector_picks_top_n_sorted():
    assert select_keyframes([0.1, 0.9, 0.5, 0.9], 2) == [1, 3]
    assert select_keyframes([0.3, 0.3, 0.3], 2) == [0, 1]
    with pytest.raises(BudgetError):
        select_keyframes([1.0], 2)
    with pytest.raises(BudgetError):
        select_keyframes([1.0], 0)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=9), st.integers(1, 3))
def test_selector_matches_exhaustive(scores, N):
    if N > len(scores):
        N = len(scores)
    got = select_keyframes([FrameScore(i, s) for i, s in enumerate(scores)], N)
    want = best_subset(scores, N)
    assert sum(scores[i] for i in got) == pytest.approx(sum(scores[i] for i in want))


def test_builtin_scorers(small_video):
    v = score_frames(small_video, SelectorConfig())
    assert len(v) == small_video.n and all(s.score >= 0 for s in v)
    t = score_frames(small_video, SelectorConfig(scorer="tempdiff"))
    assert t[0].score == 0.0
    with pytest.raises(UnknownScorerError):
        score_frames(small_video, SelectorConfig(scorer="clip"))


def test_external_score_file(tmp_path, small_video):
    path = tmp_path / "s.csv"
    path.write_text("".join(f"{i},{(i * 7) % 5}\n" for i in range(small_video.n)))
    cfg = SelectorConfig(2, "external", {"path": str(path)})
    scores = score_frames(small_video, cfg)
    assert select_keyframes(scores, 2) == [2, 4]


@pytest.mark.parametrize("text", ["0,1\n0,2\n", "0,1\n", "0;1\n1,2\n", "0,1\n9,1\n"])
def test_bad_score_files(tmp_path, text):
    path = tmp_path / "s.csv"
    path.write_text(text)
    with pytest.raises(ScoreFileError):
        score_frames(np.zeros((2, 2, 2, 1)), SelectorConfig(1, "external", {"path": str(path)}))
