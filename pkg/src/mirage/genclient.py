"""Receiver-side personalization and the generation-service client.

Requests travel as JSON; frames are base64-encoded binary PPM (P6)::

    {"prompt": {"content": ..., "identity": ..., "style": ...},
     "keyframes": ["<base64 P6>", ...],
     "config": {"F": .., "fps": .., "width": .., "height": ..,
                "lambda": .., "steps": .., "guidance": ..}}

The response is ``{"frames": ["<base64 P6>", ...]}``. ``endpoint="mock"``
runs a local stand-in generator instead of a network call.
"""
from __future__ import annotations

import base64
import binascii
import json
import os
import socket
import urllib.error
import urllib.request
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EndpointUnreachableError,
    GenerationTimeoutError,
    MalformedResponseError,
)
from .video import VideoTensor, decode_ppm, encode_ppm

ENDPOINT_ENV = "MIRAGE_GEN_ENDPOINT"
SEPARATOR = " | "


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("|", "\\|")


def _split_fields(s: str) -> list[str]:
    parts, cur, i = [], [], 0
    while i < len(s):
        ch = s[i]
        if ch == "\\" and i + 1 < len(s):
            cur.append(s[i + 1])
            i += 2
            continue
        if s.startswith(SEPARATOR, i):
            parts.append("".join(cur))
            cur = []
            i += len(SEPARATOR)
            continue
        cur.append(ch)
        i += 1
    parts.append("".join(cur))
    return parts


@dataclass(frozen=True)
class PromptFields:
    content: str
    identity: str = ""
    style: str = ""

    def __post_init__(self):
        if not self.content:
            raise ValueError("prompt content must be non-empty")
        for name in ("content", "identity", "style"):
            if not isinstance(getattr(self, name), str):
                raise TypeError(f"{name} must be text")

    def serialize(self) -> str:
        """Fields joined with ``" | "``; trailing empty fields are dropped.

        A literal ``|`` or backslash inside a field is backslash-escaped so
        :meth:`parse` can always split the string back apart.
        """
        fields = [self.content, self.identity, self.style]
        while fields and not fields[-1]:
            fields.pop()
        return SEPARATOR.join(_escape(f) for f in fields)

    @classmethod
    def parse(cls, s: str) -> "PromptFields":
        parts = _split_fields(s)
        if len(parts) > 3:
            raise ValueError("prompt string has more than three fields")
        parts += [""] * (3 - len(parts))
        return cls(*parts)


def personalize_prompt(caption: str, identity: str = "", style: str = "") -> PromptFields:
    if not caption:
        raise ValueError("caption is empty")
    return PromptFields(caption, identity, style)


@dataclass(frozen=True)
class GeneratorConfig:
    F: int = 16
    rho: float = 25.0
    H_g: int = 256
    W_g: int = 256
    lambda_: float = 0.5
    N_steps: int = 50
    omega: float = 7.5

    def __post_init__(self):
        if self.F < 1:
            raise ValueError("F must be >= 1")
        if self.H_g < 16 or self.W_g < 16:
            raise ValueError("output resolution must be at least 16x16")
        if not 0.0 <= self.lambda_ <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        if self.omega < 0:
            raise ValueError("guidance scale must be non-negative")
        if self.N_steps < 1:
            raise ValueError("N_steps must be >= 1")
        if not self.rho > 0:
            raise ValueError("fps must be positive")

    def to_json(self) -> dict:
        return {"F": self.F, "fps": self.rho, "width": self.W_g, "height": self.H_g,
                "lambda": self.lambda_, "steps": self.N_steps, "guidance": self.omega}

    @classmethod
    def from_json(cls, d: dict) -> "GeneratorConfig":
        return cls(F=int(d["F"]), rho=float(d["fps"]), H_g=int(d["height"]), W_g=int(d["width"]),
                   lambda_=float(d["lambda"]), N_steps=int(d["steps"]), omega=float(d["guidance"]))


@dataclass(eq=False)
class GenerationRequest:
    prompt: PromptFields
    keyframes: list = field(default_factory=list)
    config: GeneratorConfig = field(default_factory=GeneratorConfig)

    def __post_init__(self):
        if len(self.keyframes) == 0:
            raise ValueError("a generation request needs at least one keyframe")
        self.keyframes = [np.asarray(k, dtype=float) for k in self.keyframes]

    def to_json(self) -> str:
        body = {
            "prompt": {"content": self.prompt.content, "identity": self.prompt.identity,
                       "style": self.prompt.style},
            "keyframes": [encode_frame_b64(k) for k in self.keyframes],
            "config": self.config.to_json(),
        }
        return json.dumps(body, sort_keys=True)

    @classmethod
    def from_json(cls, text: str | bytes) -> "GenerationRequest":
        try:
            d = json.loads(text)
            p = d["prompt"]
            prompt = PromptFields(p["content"], p.get("identity", ""), p.get("style", ""))
            frames = [decode_frame_b64(s) for s in d["keyframes"]]
            return cls(prompt, frames, GeneratorConfig.from_json(d["config"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed generation request: {exc}") from None


def encode_frame_b64(frame) -> str:
    return base64.b64encode(encode_ppm(frame)).decode("ascii")


def decode_frame_b64(text: str) -> np.ndarray:
    try:
        raw = base64.b64decode(text, validate=True)
    except (binascii.Error, TypeError) as exc:
        raise ValueError(f"bad base64 frame: {exc}") from None
    return decode_ppm(raw)


# ---------------------------------------------------------------------------
# mock generator


def resize_nearest(frame, H: int, W: int) -> np.ndarray:
    """Nearest-neighbour resize; output pixel i samples source floor(i*h/H)."""
    frame = np.asarray(frame, dtype=float)
    h, w = frame.shape[:2]
    rows = (np.arange(H) * h) // H
    cols = (np.arange(W) * w) // W
    return frame[rows][:, cols]


def mock_generate(req: GenerationRequest) -> VideoTensor:
    """Cross-fade the resized keyframes at F uniformly spaced times.

    One keyframe is held for every frame. With several, output frame ``f``
    sits at position ``f * (k - 1) / (F - 1)`` along the keyframe list and
    blends its two neighbours linearly. lambda, steps and guidance are
    ignored here.
    """
    cfg = req.config
    keys = np.stack([resize_nearest(k if k.ndim == 3 else k[..., None], cfg.H_g, cfg.W_g)
                     for k in req.keyframes])
    F, k = cfg.F, len(keys)
    if k == 1 or F == 1:
        out = np.repeat(keys[:1], F, axis=0)
    else:
        pos = np.arange(F) * (k - 1) / (F - 1)
        lo = np.minimum(np.floor(pos).astype(int), k - 2)
        a = (pos - lo)[:, None, None, None]
        out = (1 - a) * keys[lo] + a * keys[lo + 1]
    return VideoTensor(np.clip(out, 0.0, 1.0), cfg.rho)


# ---------------------------------------------------------------------------
# HTTP client


def parse_response(body: bytes | str, fps: float = 25.0) -> VideoTensor:
    try:
        d = json.loads(body)
        frames = [decode_frame_b64(s) for s in d["frames"]]
        if not frames:
            raise ValueError("empty frame list")
        return VideoTensor(np.stack(frames), fps)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedResponseError(f"malformed generation response: {exc}") from None


def request_generation(req: GenerationRequest, endpoint: str | None = None,
                       timeout: float = 60.0) -> VideoTensor:
    """POST ``req`` and decode the returned frames.

    ``endpoint`` falls back to the MIRAGE_GEN_ENDPOINT environment variable;
    ``"mock"`` short-circuits to :func:`mock_generate`.
    """
    endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
    if not endpoint:
        raise EndpointUnreachableError(f"no endpoint given and {ENDPOINT_ENV} is unset")
    if endpoint == "mock":
        return mock_generate(req)
    http_req = urllib.request.Request(endpoint, data=req.to_json().encode("utf-8"), method="POST",
                                      headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(http_req, timeout=timeout) as resp:
            body = resp.read()
    except (socket.timeout, TimeoutError) as exc:
        raise GenerationTimeoutError(f"{endpoint} timed out after {timeout} s") from exc
    except urllib.error.HTTPError as exc:
        raise MalformedResponseError(f"{endpoint} answered HTTP {exc.code}") from exc
    except urllib.error.URLError as exc:
        if isinstance(exc.reason, (socket.timeout, TimeoutError)):
            raise GenerationTimeoutError(f"{endpoint} timed out after {timeout} s") from exc
        raise EndpointUnreachableError(f"cannot reach {endpoint}: {exc.reason}") from exc
    except (ValueError, OSError) as exc:
        raise EndpointUnreachableError(f"cannot reach {endpoint}: {exc}") from exc
    return parse_response(body, req.config.rho)


__all__ = [
    "PromptFields", "personalize_prompt", "GeneratorConfig", "GenerationRequest",
    "mock_generate", "resize_nearest", "request_generation", "parse_response",
    "encode_frame_b64", "decode_frame_b64", "ENDPOINT_ENV",
]
