"""Contracts and implementations for the four external model roles.

Four protocols — video generator, chat judge, embedder, grounder — with:

* deterministic in-process mocks (oracle generator, scripted judge,
  patch-histogram embedder, color grounder) used by tests and offline runs;
* HTTP clients speaking one JSON wire shape (base64 PNG images), with retry
  and concurrency limits;
* a stdlib stub server implementing the same wire shape for integration
  tests, including scripted failure injection.
"""

from __future__ import annotations

import base64
import json
import os
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Protocol, Sequence, runtime_checkable

import numpy as np
import requests

from .core import (
    BBox,
    ConfigError,
    DatasetError,
    Dataset,
    Frame,
    MetricError,
    VideoClip,
    frame_from_png_bytes,
    frame_to_png_bytes,
)
from .draw import HUE_BANDS
from .imgproc import connected_components, hue_in_bands, resize_nearest, rgb_to_hsv

__all__ = [
    "ColorGrounder",
    "Detection",
    "Embedder",
    "GeneratorClient",
    "Grounder",
    "HttpEmbedder",
    "HttpGenerator",
    "HttpGrounder",
    "HttpJudge",
    "JudgeClient",
    "OracleGenerator",
    "PatchHistogramEmbedder",
    "ScriptedJudge",
    "StubServer",
]


# ---------------------------------------------------------------------------
# contracts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Detection:
    """One grounded box with confidence in [0, 1]."""

    bbox: BBox
    score: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"confidence {self.score} outside [0, 1]")


@runtime_checkable
class GeneratorClient(Protocol):
    def generate(self, initial: Frame, prompt: str, seed: int) -> VideoClip: ...


@runtime_checkable
class JudgeClient(Protocol):
    def chat(self, images: Sequence[Frame], text: str) -> str: ...


@runtime_checkable
class Embedder(Protocol):
    @property
    def dim(self) -> int: ...

    def embed(self, crop: Frame) -> np.ndarray: ...


@runtime_checkable
class Grounder(Protocol):
    def ground(self, frame: Frame, label: str) -> list[Detection]: ...


# ---------------------------------------------------------------------------
# deterministic in-process implementations
# ---------------------------------------------------------------------------


class PatchHistogramEmbedder:
    """Color-layout embedding: 4x4 patch grid x 3 channels x 4 bins = 192-dim.

    A deterministic, dependency-free stand-in for a semantic embedder; crops
    are resized to 32x32 so the vector is resolution-independent, and the
    output is L2-normalized.
    """

    _GRID = 4
    _BINS = 4

    @property
    def dim(self) -> int:
        return self._GRID * self._GRID * 3 * self._BINS

    def embed(self, crop: Frame) -> np.ndarray:
        px = crop.pixels
        if px.shape[0] < 4 or px.shape[1] < 4:
            raise MetricError(f"crop {px.shape[1]}x{px.shape[0]} too small to embed")
        small = resize_nearest(px, (32, 32))
        patch = 32 // self._GRID
        binned = small // (256 // self._BINS)  # channel value -> bin index
        out = np.zeros(self.dim, dtype=np.float64)
        pos = 0
        for gy in range(self._GRID):
            for gx in range(self._GRID):
                tile = binned[
                    gy * patch: (gy + 1) * patch, gx * patch: (gx + 1) * patch
                ]
                for ch in range(3):
                    hist = np.bincount(
                        tile[:, :, ch].ravel(), minlength=self._BINS
                    )[: self._BINS]
                    out[pos: pos + self._BINS] = hist
                    pos += self._BINS
        norm = float(np.linalg.norm(out))
        if norm == 0.0:
            raise MetricError("degenerate crop produced an all-zero embedding")
        return out / norm


class OracleGenerator:
    """Replays ground-truth (or deliberately corrupted) clips from a dataset.

    Samples are located by the digest of the initial frame, so the oracle
    behaves like a perfect (or precisely flawed) video model behind the
    standard generator interface.
    """

    def __init__(self, dataset: Dataset, noise=None) -> None:
        # noise: a taskgen CorruptionMode (or its string value), "auto" for
        # each task's first supported corruption, or None for faithful replay
        if isinstance(noise, str) and noise != "auto":
            from . import taskgen  # deferred: avoid a module cycle

            try:
                noise = taskgen.CorruptionMode(noise)
            except ValueError:
                raise ConfigError(
                    f"unknown noise mode {noise!r}; use 'auto' or one of: "
                    + ", ".join(m.value for m in taskgen.CorruptionMode)
                ) from None
        self.dataset = dataset
        self.noise = noise
        self._by_digest = {
            sample.initial.digest(): sample for sample in dataset.samples
        }

    def generate(self, initial: Frame, prompt: str, seed: int) -> VideoClip:
        del prompt
        sample = self._by_digest.get(initial.digest())
        if sample is None:
            raise DatasetError("initial frame does not match any dataset sample")
        from . import taskgen  # deferred: avoid a module cycle

        if self.noise is None:
            return taskgen.render_gt_video(sample)
        noise = self.noise
        if noise == "auto":
            noise = taskgen.CORRUPTIONS_FOR[sample.task][0]
        return taskgen.corrupt(sample, noise, seed)


class ScriptedJudge:
    """Replays a fixed list of replies and records every call."""

    def __init__(self, script: Sequence[str]) -> None:
        self._script = list(script)
        self._lock = threading.Lock()
        self.transcript: list[tuple[str, int]] = []  # (text, n_images)

    def chat(self, images: Sequence[Frame], text: str) -> str:
        with self._lock:
            self.transcript.append((text, len(images)))
            if not self._script:
                raise MetricError("scripted judge exhausted its replies")
            return self._script.pop(0)


class ColorGrounder:
    """Grounds labels like "blue circle" by color segmentation.

    The first word of the label that names a known hue band selects the
    color; the special label "selected" grounds the red highlight used by
    region-selection tasks.  Detections are connected components of
    sufficiently saturated, sufficiently bright pixels of that hue, largest
    first.
    """

    def __init__(
        self,
        min_area: int = 50,
        min_saturation: float = 0.4,
        min_value: float = 0.3,
    ) -> None:
        self.min_area = min_area
        self.min_saturation = min_saturation
        self.min_value = min_value

    def _bands(self, label: str) -> tuple[tuple[float, float], ...]:
        words = label.lower().replace("_", " ").split()
        if "selected" in words:
            return HUE_BANDS["red"]
        for word in words:
            if word in HUE_BANDS:
                return HUE_BANDS[word]
        raise MetricError(f"label {label!r} names no known color")

    def ground(self, frame: Frame, label: str) -> list[Detection]:
        bands = self._bands(label)
        h, s, v = rgb_to_hsv(frame.pixels)
        mask = (
            (s >= self.min_saturation)
            & (v >= self.min_value)
            & hue_in_bands(h, bands)
        )
        detections = []
        for comp in connected_components(mask):
            if comp.area < self.min_area:
                continue
            detections.append(Detection(bbox=comp.bbox, score=1.0))
        return detections


# ---------------------------------------------------------------------------
# HTTP wire format
# ---------------------------------------------------------------------------


def _b64_frame(frame: Frame) -> str:
    return base64.b64encode(frame_to_png_bytes(frame)).decode("ascii")


def _frame_from_b64(data: str) -> Frame:
    return frame_from_png_bytes(base64.b64decode(data))


def _require_env(name: str) -> str:
    value = os.environ.get(name)
    if not value:
        raise ConfigError(f"environment variable {name} is not set")
    return value


@dataclass
class _HttpBase:
    """Shared POST/retry/concurrency plumbing for the HTTP clients."""

    endpoint: str
    model: str = "default"
    api_key_env: str = "TIVI_JUDGE_API_KEY"
    timeout: float = 60.0
    max_retries: int = 3
    retry_base_delay: float = 1.0
    max_in_flight: int = 4
    _api_key: str = field(init=False, repr=False)
    _gate: threading.Semaphore = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._api_key = _require_env(self.api_key_env)
        self._gate = threading.Semaphore(self.max_in_flight)

    def _post(self, payload: dict) -> dict:
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.retry_base_delay * 2 ** (attempt - 1))
            try:
                with self._gate:
                    resp = requests.post(
                        self.endpoint,
                        json=payload,
                        headers={"Authorization": f"Bearer {self._api_key}"},
                        timeout=self.timeout,
                    )
                if resp.status_code == 200:
                    return resp.json()
                last_error = MetricError(
                    f"HTTP {resp.status_code} from {self.endpoint}"
                )
            except (requests.RequestException, ValueError) as exc:
                last_error = exc
        raise MetricError(
            f"request to {self.endpoint} failed after "
            f"{self.max_retries + 1} attempts: {last_error}"
        )


@dataclass
class HttpJudge(_HttpBase):
    """Chat-with-images judge speaking a generic OpenAI-style wire shape."""

    def chat(self, images: Sequence[Frame], text: str) -> str:
        content: list[dict] = [{"type": "text", "text": text}]
        content.extend(
            {"type": "image", "data": _b64_frame(img)} for img in images
        )
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": content}],
        }
        data = self._post(payload)
        try:
            reply = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MetricError(f"malformed judge reply: {exc}") from exc
        if not isinstance(reply, str) or not reply.strip():
            raise MetricError("judge returned an empty reply")
        return reply


@dataclass
class HttpEmbedder(_HttpBase):
    """POST /embed {model, image} -> {embedding: [float, ...]}."""

    expected_dim: int | None = None
    _dim: int | None = field(default=None, init=False, repr=False)

    @property
    def dim(self) -> int:
        if self._dim is None:
            raise MetricError("embedding dimension unknown before first call")
        return self._dim

    def embed(self, crop: Frame) -> np.ndarray:
        data = self._post({"model": self.model, "image": _b64_frame(crop)})
        try:
            vec = np.asarray(data["embedding"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise MetricError(f"malformed embedding reply: {exc}") from exc
        if vec.ndim != 1 or vec.size == 0:
            raise MetricError("embedding must be a non-empty vector")
        if self._dim is None:
            if self.expected_dim is not None and vec.size != self.expected_dim:
                raise MetricError(
                    f"embedding dim {vec.size} != expected {self.expected_dim}"
                )
            self._dim = int(vec.size)
        elif vec.size != self._dim:
            raise MetricError(
                f"embedding dim changed across calls: {vec.size} != {self._dim}"
            )
        return vec


@dataclass
class HttpGrounder(_HttpBase):
    """POST /ground {model, image, label} -> {detections: [{bbox, score}]}."""

    def ground(self, frame: Frame, label: str) -> list[Detection]:
        data = self._post(
            {"model": self.model, "image": _b64_frame(frame), "label": label}
        )
        try:
            out = []
            for det in data["detections"]:
                x, y, w, h = det["bbox"]
                out.append(
                    Detection(
                        bbox=BBox(int(x), int(y), int(w), int(h)),
                        score=float(det["score"]),
                    )
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise MetricError(f"malformed grounding reply: {exc}") from exc
        return out


@dataclass
class HttpGenerator(_HttpBase):
    """POST /generate {model, prompt, image, seed, n_frames} -> clip."""

    api_key_env: str = "TIVI_GEN_API_KEY"
    n_frames: int = 16

    def generate(self, initial: Frame, prompt: str, seed: int) -> VideoClip:
        data = self._post(
            {
                "model": self.model,
                "prompt": prompt,
                "image": _b64_frame(initial),
                "seed": int(seed),
                "n_frames": self.n_frames,
            }
        )
        try:
            frames = tuple(_frame_from_b64(b) for b in data["frames"])
            fps = float(data.get("fps", 8.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise MetricError(f"malformed generation reply: {exc}") from exc
        if not frames:
            raise MetricError("generator returned no frames")
        return VideoClip(frames=frames, fps=fps)


# ---------------------------------------------------------------------------
# stub server
# ---------------------------------------------------------------------------


class StubServer:
    """In-process HTTP server speaking the client wire shapes.

    Routes: /chat, /embed, /ground, /generate.  ``fail_times[path]`` makes
    the first N requests to that path return HTTP 500 (for retry tests).
    Replies are canned but configurable; /chat replies cycle through
    ``chat_replies``; /generate replays the posted initial frame ``n_frames``
    times (a deliberately static clip unless ``generate_clip`` is set).
    """

    def __init__(
        self,
        chat_replies: Sequence[str] = ("ok",),
        embed_dim: int = 192,
        detections: Sequence[dict] | None = None,
        generate_clip: VideoClip | None = None,
        fail_times: dict[str, int] | None = None,
        host: str = "127.0.0.1",
        port: int = 0,
    ) -> None:
        self.host = host
        self.port = port
        self.chat_replies = list(chat_replies)
        self.embed_dim = embed_dim
        self.detections = list(
            detections
            if detections is not None
            else [{"bbox": [0, 0, 8, 8], "score": 1.0}]
        )
        self.generate_clip = generate_clip
        self.fail_times = dict(fail_times or {})
        self.requests: list[tuple[str, dict]] = []
        self._lock = threading.Lock()
        self._chat_i = 0
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    # -- lifecycle -----------------------------------------------------------

    def __enter__(self) -> "StubServer":
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args) -> None:  # keep tests quiet
                pass

            def do_POST(self) -> None:
                length = int(self.headers.get("Content-Length", "0"))
                try:
                    body = json.loads(self.rfile.read(length) or b"{}")
                except json.JSONDecodeError:
                    body = {}
                status, reply = stub._handle(self.path, body)
                data = json.dumps(reply).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        self._server = ThreadingHTTPServer((self.host, self.port), Handler)
        self._thread = threading.Thread(
            target=self._server.serve_forever, daemon=True
        )
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    @property
    def base_url(self) -> str:
        assert self._server is not None, "server not started"
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def url(self, path: str) -> str:
        return self.base_url + path

    # -- request handling ------------------------------------------------------

    def _handle(self, path: str, body: dict) -> tuple[int, dict]:
        with self._lock:
            self.requests.append((path, body))
            remaining = self.fail_times.get(path, 0)
            if remaining > 0:
                self.fail_times[path] = remaining - 1
                return 500, {"error": "injected failure"}
            if path == "/chat":
                reply = self.chat_replies[self._chat_i % len(self.chat_replies)]
                self._chat_i += 1
                return 200, {
                    "choices": [{"message": {"role": "assistant", "content": reply}}]
                }
            if path == "/embed":
                rng = np.random.default_rng(abs(hash(body.get("image", ""))) % 2**32)
                vec = rng.random(self.embed_dim).tolist()
                return 200, {"embedding": vec}
            if path == "/ground":
                return 200, {"detections": self.detections}
            if path == "/generate":
                if self.generate_clip is not None:
                    frames = [_b64_frame(f) for f in self.generate_clip.frames]
                    return 200, {"frames": frames, "fps": self.generate_clip.fps}
                n = int(body.get("n_frames", 16))
                return 200, {"frames": [body["image"]] * n, "fps": 8.0}
            return 404, {"error": f"unknown path {path}"}
