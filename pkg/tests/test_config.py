"""INI config parsing and backend builders."""

import pytest

from vireo import taskgen
from vireo.config import (
    AppConfig,
    build_embedder,
    build_generator,
    build_grounder,
    build_judge,
    load_config,
)
from vireo.core import ConfigError, Dataset, Difficulty, SCHEMA_VERSION, Task
from vireo.harness import Strategy
from vireo.modelio import (
    ColorGrounder,
    HttpEmbedder,
    HttpGenerator,
    HttpGrounder,
    HttpJudge,
    OracleGenerator,
    PatchHistogramEmbedder,
)


@pytest.fixture(autouse=True)
def _api_keys(monkeypatch):
    monkeypatch.setenv("TIVI_JUDGE_API_KEY", "test-key")
    monkeypatch.setenv("TIVI_GEN_API_KEY", "test-key")


def _write(tmp_path, text):
    path = tmp_path / "app.ini"
    path.write_text(text, encoding="utf-8")
    return path


# --- parsing ----------------------------------------------------------------------


def test_no_path_gives_defaults():
    cfg = load_config(None)
    assert cfg == AppConfig()
    assert cfg.eval.k == 5
    assert cfg.judge == {}


def test_full_file_round_trip(tmp_path):
    cfg = load_config(_write(tmp_path, """
[verify]
ncc_threshold = 0.75
ssim_threshold = 0.9
red_hue_bands = 0-12, 348-360
min_marker_area = 50

[track]
n_samples = 8
agent_label = green circle

[eval]
k = 3
base_seed = 7
strategy = pre_rewrite
model = wan
resolution_policy = wan=832x480, sora=1280x720
workers = 2

[tpo]
n_steps = 1
n_candidates = 2
seeds = 11, 12

[judge]
endpoint = http://127.0.0.1:9/chat
model = judge-1
timeout = 5
max_retries = 1

[generator]
endpoint = http://127.0.0.1:9/generate
n_frames = 8

[embedder]
endpoint = http://127.0.0.1:9/embed
expected_dim = 64

[grounder]
min_area = 10
min_saturation = 0.5
"""))
    assert cfg.verify.ncc_threshold == 0.75
    assert cfg.verify.ssim_threshold == 0.9
    assert cfg.verify.red_hue_bands == ((0.0, 12.0), (348.0, 360.0))
    assert cfg.verify.min_marker_area == 50
    assert cfg.track.n_samples == 8
    assert cfg.track.agent_label == "green circle"
    assert cfg.eval.k == 3
    assert cfg.eval.base_seed == 7
    assert cfg.eval.strategy is Strategy.PRE_REWRITE
    assert cfg.eval.resolution_policy == {
        "wan": (832, 480), "sora": (1280, 720)
    }
    assert cfg.eval.input_size == (832, 480)
    assert cfg.eval.workers == 2
    assert cfg.tpo.n_steps == 1
    assert cfg.tpo.seeds == (11, 12)
    assert cfg.judge == {
        "endpoint": "http://127.0.0.1:9/chat",
        "model": "judge-1",
        "timeout": 5.0,
        "max_retries": 1,
    }
    assert cfg.generator["n_frames"] == 8
    assert cfg.embedder["expected_dim"] == 64
    assert cfg.grounder == {"min_area": 10, "min_saturation": 0.5}


def test_empty_sections_are_fine(tmp_path):
    cfg = load_config(_write(tmp_path, "[eval]\n[judge]\n"))
    assert cfg == AppConfig()


def test_unknown_section_rejected(tmp_path):
    with pytest.raises(ConfigError, match=r"\[metrics\]"):
        load_config(_write(tmp_path, "[metrics]\nk = 1\n"))


@pytest.mark.parametrize("section", ["eval", "judge", "verify"])
def test_unknown_key_rejected(tmp_path, section):
    with pytest.raises(ConfigError, match="mystery"):
        load_config(_write(tmp_path, f"[{section}]\nmystery = 1\n"))


def test_bad_int_names_section_and_key(tmp_path):
    with pytest.raises(ConfigError, match=r"\[eval\] k"):
        load_config(_write(tmp_path, "[eval]\nk = three\n"))


def test_bad_strategy_rejected(tmp_path):
    with pytest.raises(ConfigError, match="strategy"):
        load_config(_write(tmp_path, "[eval]\nstrategy = warp\n"))


def test_bad_hue_band_rejected(tmp_path):
    with pytest.raises(ConfigError, match="band"):
        load_config(_write(tmp_path, "[verify]\nred_hue_bands = wide\n"))


def test_bad_resolution_policy_rejected(tmp_path):
    with pytest.raises(ConfigError, match="model=WxH"):
        load_config(_write(tmp_path, "[eval]\nresolution_policy = wanx832\n"))


def test_out_of_range_value_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "[verify]\nncc_threshold = 1.5\n"))


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.ini")


def test_malformed_ini_rejected(tmp_path):
    with pytest.raises(ConfigError, match="cannot parse"):
        load_config(_write(tmp_path, "k = 1\nno section header"))


# --- builders -------------------------------------------------------------------


def test_build_judge_none_without_endpoint():
    assert build_judge({}) is None


def test_build_judge_http():
    judge = build_judge({"endpoint": "http://127.0.0.1:9/chat", "timeout": 2.0})
    assert isinstance(judge, HttpJudge)
    assert judge.endpoint == "http://127.0.0.1:9/chat"
    assert judge.timeout == 2.0


@pytest.fixture(scope="module")
def tiny_dataset():
    sample = taskgen.generate(Task.COUNTING_OBJECTS, Difficulty.EASY, seed=9)
    return Dataset(None, SCHEMA_VERSION, [sample], {})


def test_build_generator_http():
    gen = build_generator(
        {"endpoint": "http://127.0.0.1:9/generate", "n_frames": 4}
    )
    assert isinstance(gen, HttpGenerator)
    assert gen.n_frames == 4


def test_build_generator_replay(tiny_dataset):
    gen = build_generator({}, tiny_dataset)
    assert isinstance(gen, OracleGenerator)
    assert gen.noise is None


def test_build_generator_replay_noise_string(tiny_dataset):
    gen = build_generator({"noise": "static_video"}, tiny_dataset)
    assert gen.noise is taskgen.CorruptionMode.STATIC_VIDEO
    clip = gen.generate(tiny_dataset.samples[0].initial, "p", 0)
    assert all(
        (f.pixels == tiny_dataset.samples[0].initial.pixels).all()
        for f in clip.frames
    )


def test_build_generator_bad_noise_string(tiny_dataset):
    with pytest.raises(ConfigError, match="noise"):
        build_generator({"noise": "sparkle"}, tiny_dataset)


def test_build_generator_needs_dataset_or_endpoint():
    with pytest.raises(ConfigError, match="endpoint"):
        build_generator({})


def test_build_embedder_builtin():
    assert isinstance(build_embedder({}), PatchHistogramEmbedder)


def test_build_embedder_options_need_endpoint():
    with pytest.raises(ConfigError, match="endpoint"):
        build_embedder({"expected_dim": 8})


def test_build_embedder_http():
    emb = build_embedder(
        {"endpoint": "http://127.0.0.1:9/embed", "expected_dim": 8}
    )
    assert isinstance(emb, HttpEmbedder)
    assert emb.expected_dim == 8


def test_build_grounder_builtin_takes_tuning():
    grounder = build_grounder({"min_area": 10, "min_saturation": 0.5})
    assert isinstance(grounder, ColorGrounder)
    assert grounder.min_area == 10
    assert grounder.min_saturation == 0.5


def test_build_grounder_http_drops_builtin_keys():
    grounder = build_grounder(
        {"endpoint": "http://127.0.0.1:9/ground", "min_area": 10}
    )
    assert isinstance(grounder, HttpGrounder)
