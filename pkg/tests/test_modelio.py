"""Model clients: built-in substitutes, HTTP wire formats, retry policy."""

import os

import numpy as np
import pytest

from vireo import taskgen
from vireo.core import (
    ConfigError,
    Dataset,
    DatasetError,
    Difficulty,
    Frame,
    MetricError,
    SCHEMA_VERSION,
    Task,
    VideoClip,
)
from vireo.modelio import (
    ColorGrounder,
    HttpEmbedder,
    HttpGenerator,
    HttpGrounder,
    HttpJudge,
    OracleGenerator,
    PatchHistogramEmbedder,
    ScriptedJudge,
    StubServer,
)


def _solid(rgb, w=64, h=64) -> Frame:
    px = np.zeros((h, w, 3), dtype=np.uint8)
    px[:, :] = rgb
    return Frame(px)


@pytest.fixture(autouse=True)
def _api_keys(monkeypatch):
    monkeypatch.setenv("TIVI_JUDGE_API_KEY", "test-key")
    monkeypatch.setenv("TIVI_GEN_API_KEY", "test-key")


# --- built-in embedder ----------------------------------------------------------


def test_embedder_dim_and_self_similarity():
    emb = PatchHistogramEmbedder()
    assert emb.dim == 192
    v = emb.embed(_solid((220, 40, 40)))
    assert v.shape == (192,)
    assert np.isclose(np.linalg.norm(v), 1.0)
    same = emb.embed(_solid((220, 40, 40)))
    cos = float(v @ same) / (np.linalg.norm(v) * np.linalg.norm(same))
    assert np.isclose(cos, 1.0)


def test_embedder_separates_colors():
    emb = PatchHistogramEmbedder()
    red = emb.embed(_solid((220, 40, 40)))
    blue = emb.embed(_solid((50, 80, 225)))
    cos = float(red @ blue) / (np.linalg.norm(red) * np.linalg.norm(blue))
    assert cos < 0.5


def test_embedder_rejects_tiny_crops():
    emb = PatchHistogramEmbedder()
    with pytest.raises(MetricError):
        emb.embed(Frame(np.zeros((2, 2, 3), dtype=np.uint8)))


# --- color grounder ---------------------------------------------------------------


def test_color_grounder_finds_colored_regions():
    px = np.full((64, 64, 3), 255, dtype=np.uint8)
    px[10:30, 10:30] = (220, 40, 40)   # red square
    px[40:60, 40:60] = (50, 80, 225)   # blue square
    g = ColorGrounder()
    red = g.ground(Frame(px), "red circle")
    assert len(red) == 1 and red[0].bbox.x == 10
    blue = g.ground(Frame(px), "blue circle")
    assert len(blue) == 1 and blue[0].bbox.x == 40


def test_color_grounder_unknown_label():
    g = ColorGrounder()
    with pytest.raises(MetricError):
        g.ground(_solid((255, 255, 255)), "plaid zeppelin")


# --- scripted judge -----------------------------------------------------------------


def test_scripted_judge_replays_and_records():
    judge = ScriptedJudge(["yes", "no"])
    assert judge.chat([_solid((0, 0, 0))], "first?") == "yes"
    assert judge.chat([], "second?") == "no"
    assert judge.transcript == [("first?", 1), ("second?", 0)]
    with pytest.raises(MetricError):
        judge.chat([], "third?")


# --- oracle generator ----------------------------------------------------------------


def _tiny_dataset():
    samples = [
        taskgen.generate(Task.SUDOKU_COMPLETION, Difficulty.EASY, seed=11),
        taskgen.generate(Task.MAZE_SOLVING, Difficulty.EASY, seed=11),
    ]
    return Dataset(root=None, schema_version=SCHEMA_VERSION, samples=samples,
                   gt_video_dirs={})


def test_oracle_generator_replays_ground_truth():
    ds = _tiny_dataset()
    gen = OracleGenerator(ds)
    s = ds.samples[0]
    clip = gen.generate(s.initial, "whatever prompt", seed=0)
    gt = taskgen.render_gt_video(s)
    assert np.array_equal(clip.frames[-1].pixels, gt.frames[-1].pixels)


def test_oracle_generator_unknown_frame():
    gen = OracleGenerator(_tiny_dataset())
    with pytest.raises(DatasetError):
        gen.generate(_solid((1, 2, 3)), "p", seed=0)


def test_oracle_generator_auto_noise_corrupts():
    ds = _tiny_dataset()
    gen = OracleGenerator(ds, noise="auto")
    s = ds.samples[0]
    clip = gen.generate(s.initial, "p", seed=0)
    gt = taskgen.render_gt_video(s)
    assert not np.array_equal(clip.frames[-1].pixels, gt.frames[-1].pixels)


# --- HTTP clients against the stub ------------------------------------------------------


def test_http_judge_round_trip():
    with StubServer(chat_replies=["looks plausible"]) as stub:
        judge = HttpJudge(endpoint=stub.url("/chat"))
        reply = judge.chat([_solid((9, 9, 9)), _solid((7, 7, 7))], "rate this")
        assert reply == "looks plausible"
        assert len(stub.requests) == 1
        path, payload = stub.requests[0]
        assert path == "/chat"
        content = payload["messages"][0]["content"]
        assert content[0] == {"type": "text", "text": "rate this"}
        assert sum(1 for part in content if part["type"] == "image") == 2


def test_http_generator_round_trips_frames():
    initial = _solid((120, 30, 200), w=48, h=32)
    with StubServer() as stub:
        gen = HttpGenerator(endpoint=stub.url("/generate"), n_frames=4)
        clip = gen.generate(initial, "do the thing", seed=3)
    assert len(clip) == 4
    for frame in clip.frames:
        assert np.array_equal(frame.pixels, initial.pixels)


def test_http_embedder_dim_locking():
    with StubServer(embed_dim=16) as stub:
        emb = HttpEmbedder(endpoint=stub.url("/embed"))
        with pytest.raises(MetricError):
            _ = emb.dim  # unknown before the first call
        v = emb.embed(_solid((1, 2, 3)))
        assert v.shape == (16,) and emb.dim == 16
    with StubServer(embed_dim=16) as stub:
        emb = HttpEmbedder(endpoint=stub.url("/embed"), expected_dim=8)
        with pytest.raises(MetricError):
            emb.embed(_solid((1, 2, 3)))  # drift from the declared dim


def test_http_grounder_parses_detections():
    canned = [{"bbox": [4, 5, 6, 7], "score": 0.5}]
    with StubServer(detections=canned) as stub:
        g = HttpGrounder(endpoint=stub.url("/ground"))
        dets = g.ground(_solid((0, 0, 0)), "blue circle")
    assert len(dets) == 1
    assert (dets[0].bbox.x, dets[0].bbox.y, dets[0].bbox.w, dets[0].bbox.h) == (4, 5, 6, 7)
    assert dets[0].score == 0.5


def test_retry_two_failures_then_success():
    with StubServer(chat_replies=["finally"], fail_times={"/chat": 2}) as stub:
        judge = HttpJudge(endpoint=stub.url("/chat"), retry_base_delay=0.01)
        assert judge.chat([], "hello") == "finally"
        assert len(stub.requests) == 3  # two 500s, one success


def test_retry_exhaustion_is_metric_error():
    with StubServer(chat_replies=["never"], fail_times={"/chat": 99}) as stub:
        judge = HttpJudge(
            endpoint=stub.url("/chat"), max_retries=3, retry_base_delay=0.01
        )
        with pytest.raises(MetricError):
            judge.chat([], "hello")
        assert len(stub.requests) == 4  # initial try + 3 retries


def test_missing_api_key_is_config_error(monkeypatch):
    monkeypatch.delenv("TIVI_JUDGE_API_KEY", raising=False)
    with pytest.raises(ConfigError):
        HttpJudge(endpoint="http://127.0.0.1:1/chat")


def test_stub_generate_with_canned_clip():
    clip = VideoClip(frames=[_solid((5, 5, 5), w=8, h=8)] * 3, fps=8.0)
    with StubServer(generate_clip=clip) as stub:
        gen = HttpGenerator(endpoint=stub.url("/generate"))
        out = gen.generate(_solid((0, 0, 0)), "p", seed=1)
    assert len(out) == 3 and out.frames[0].pixels[0, 0, 0] == 5
