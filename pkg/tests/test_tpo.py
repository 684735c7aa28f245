"""Prompt optimization: the loss/gradient/update loop, rewrites, ranking."""

import numpy as np
import pytest

from vireo import taskgen
from vireo.core import (
    ConfigError,
    Difficulty,
    Dimension,
    Frame,
    MetricError,
    SCHEMA_VERSION,
    Dataset,
    Task,
    VideoClip,
)
from vireo.modelio import OracleGenerator, PatchHistogramEmbedder, ScriptedJudge
from vireo.tpo import (
    PromptTemplateSet,
    RewardDeps,
    RewardScorer,
    TpoConfig,
    TpoTrace,
    author_prompt,
    default_templates,
    load_templates,
    load_trace,
    post_rewrite,
    pre_rewrite,
    rank_by_reward,
    run_tpo,
    save_trace,
    stitch_vertical,
    textual_gradient,
    textual_loss,
    update_prompt,
)


def _frame(value, w=8, h=6) -> Frame:
    px = np.full((h, w, 3), value, dtype=np.uint8)
    return Frame(px)


def _clip(values, w=8, h=6) -> VideoClip:
    return VideoClip(frames=[_frame(v, w, h) for v in values], fps=8.0)


@pytest.fixture(scope="module")
def sample():
    return taskgen.generate(Task.MAZE_SOLVING, Difficulty.EASY, seed=13)


@pytest.fixture(scope="module")
def dataset(sample):
    return Dataset(root=None, schema_version=SCHEMA_VERSION,
                   samples=[sample], gt_video_dirs={})


# --- templates -------------------------------------------------------------------


def test_default_templates_have_placeholders():
    t = default_templates()
    assert "{current_prompt}" in t.loss and "{input_videos}" in t.loss
    assert "{task_definition}" in t.loss
    assert "{loss}" in t.gradient and "{current_prompt}" in t.gradient
    assert "{gradient}" in t.update
    for dim in Dimension:
        assert "{task}" in t.offline[dim]
        assert "{initial_image}" in t.author[dim]
        assert "{target_image}" in t.author[dim]
    assert "{prompt}" in t.pre_rewrite and "{prompt}" in t.post_rewrite
    assert "{prompt}" in t.rate


def test_missing_placeholder_is_config_error():
    t = default_templates()
    with pytest.raises(ConfigError):
        PromptTemplateSet(
            loss="no placeholders here",
            gradient=t.gradient,
            update=t.update,
            author=t.author,
            offline=t.offline,
            pre_rewrite=t.pre_rewrite,
            post_rewrite=t.post_rewrite,
            rate=t.rate,
        )


def test_load_templates_round_trips(tmp_path):
    # copy the packaged templates to a directory and load them back
    import importlib.resources as resources

    src = resources.files("vireo") / "templates"
    for item in src.iterdir():
        (tmp_path / item.name).write_text(item.read_text(encoding="utf-8"))
    t = load_templates(tmp_path)
    assert t == default_templates()


# --- stitching ---------------------------------------------------------------------


def test_stitch_vertical_preserves_pixels():
    a = _clip([10, 20])
    b = _clip([30, 40])
    stacked = stitch_vertical([a, b])
    assert len(stacked) == 2
    assert stacked.frames[0].height == 12
    assert (stacked.frames[0].pixels[:6] == 10).all()
    assert (stacked.frames[0].pixels[6:] == 30).all()
    assert (stacked.frames[1].pixels[:6] == 20).all()
    assert (stacked.frames[1].pixels[6:] == 40).all()


def test_stitch_vertical_pads_shorter_clips():
    a = _clip([10, 20, 25])
    b = _clip([30])
    stacked = stitch_vertical([a, b])
    assert len(stacked) == 3
    assert (stacked.frames[2].pixels[:6] == 25).all()
    assert (stacked.frames[2].pixels[6:] == 30).all()  # last frame repeats


def test_stitch_vertical_centers_unequal_widths():
    a = _clip([10], w=8)
    b = _clip([30], w=4)
    with pytest.warns(UserWarning):
        stacked = stitch_vertical([a, b])
    row = stacked.frames[0].pixels[6 + 3]
    assert (row[:2] == 0).all() and (row[2:6] == 30).all() and (row[6:] == 0).all()


def test_stitch_vertical_rejects_empty():
    with pytest.raises(ValueError):
        stitch_vertical([])


# --- loss / gradient / update ----------------------------------------------------------


def test_textual_loss_passes_through_judge_reply():
    judge = ScriptedJudge(["the box never moves"])
    reply = textual_loss([_clip([1, 2, 3])], "push the box", "box-pushing", judge)
    assert reply == "the box never moves"
    text, n_images = judge.transcript[0]
    assert "push the box" in text and "box-pushing" in text
    assert n_images == 3  # 8 requested, clip only has 3 distinct frames


def test_textual_loss_samples_frames_of_stitched_clip():
    judge = ScriptedJudge(["ok"])
    clips = [_clip(list(range(20))), _clip(list(range(20)))]
    textual_loss(clips, "p", "t", judge, n_frames=8)
    _text, n_images = judge.transcript[0]
    assert n_images == 8


def test_textual_gradient_mentions_loss():
    judge = ScriptedJudge(["add a hint about the goal"])
    reply = textual_gradient("push the box", "the box never moves", judge)
    assert reply == "add a hint about the goal"
    text, n_images = judge.transcript[0]
    assert "the box never moves" in text and n_images == 0


def test_update_prompt_strips_fences_and_quotes():
    judge = ScriptedJudge(['```\n"Push the box to the star."\n```'])
    out = update_prompt("push", "be specific", judge)
    assert out == "Push the box to the star."


def test_update_prompt_rejects_empty_result():
    judge = ScriptedJudge(["``` ```"])
    with pytest.raises(MetricError):
        update_prompt("push", "be specific", judge)


def test_empty_inputs_are_value_errors():
    judge = ScriptedJudge(["x"])
    with pytest.raises(ValueError):
        textual_loss([], "p", "t", judge)
    with pytest.raises(ValueError):
        textual_gradient("p", "", judge)
    with pytest.raises(ValueError):
        update_prompt("p", "", judge)


# --- run_tpo ---------------------------------------------------------------------------


def _scripted_for_steps(n_steps):
    replies = []
    for i in range(1, n_steps + 1):
        replies += [f"loss {i}", f"gradient {i}", f"prompt v{i}"]
    return ScriptedJudge(replies)


@pytest.mark.parametrize("n_steps", [1, 2, 4])
@pytest.mark.parametrize("n_candidates", [2, 4])
def test_trace_shape_and_judge_budget(sample, dataset, n_steps, n_candidates):
    generator = OracleGenerator(dataset)
    calls = []
    real = generator.generate
    generator.generate = lambda *a, **kw: (calls.append(a), real(*a, **kw))[1]
    judge = _scripted_for_steps(n_steps)
    cfg = TpoConfig(n_candidates=n_candidates, n_steps=n_steps, base_seed=0)
    trace = run_tpo(sample, generator, judge, cfg)
    assert not trace.partial
    assert len(trace.prompts) == n_steps + 1
    assert len(trace.losses) == n_steps
    assert len(trace.gradients) == n_steps
    assert len(trace.candidates) == n_steps
    assert all(len(step) == n_candidates for step in trace.candidates)
    assert len(judge.transcript) == 3 * n_steps
    assert len(calls) == n_candidates * n_steps
    assert trace.final_prompt == f"prompt v{n_steps}"


def test_gradient_marker_propagation(sample, dataset):
    # what the judge says at each stage must reach the next stage's request
    generator = OracleGenerator(dataset)
    judge = ScriptedJudge(["LOSS-MARKER-77", "GRAD-MARKER-88", "updated prompt"])
    trace = run_tpo(sample, generator, judge, TpoConfig(n_steps=1))
    loss_req, grad_req, update_req = [t for t, _n in judge.transcript]
    assert sample.prompt in loss_req
    assert "LOSS-MARKER-77" in grad_req
    assert "GRAD-MARKER-88" in update_req
    assert trace.final_prompt == "updated prompt"


def test_candidate_seeds_are_deterministic(sample, dataset):
    generator = OracleGenerator(dataset)
    seeds = []
    real = generator.generate
    generator.generate = lambda f, p, seed: (seeds.append(seed), real(f, p, seed))[1]
    run_tpo(sample, generator, _scripted_for_steps(2), TpoConfig(n_steps=2))
    assert seeds == [100, 101, 200, 201]


def test_explicit_seed_table(sample, dataset):
    generator = OracleGenerator(dataset)
    seeds = []
    real = generator.generate
    generator.generate = lambda f, p, seed: (seeds.append(seed), real(f, p, seed))[1]
    cfg = TpoConfig(n_steps=2, n_candidates=2, seeds=(11, 12, 13, 14))
    run_tpo(sample, generator, _scripted_for_steps(2), cfg)
    assert seeds == [11, 12, 13, 14]
    with pytest.raises(ConfigError):
        TpoConfig(n_steps=2, n_candidates=2, seeds=(1, 2, 3))  # wrong length


def test_judge_exhaustion_yields_partial_trace(sample, dataset):
    generator = OracleGenerator(dataset)
    judge = ScriptedJudge(["loss 1", "gradient 1", "prompt v1", "loss 2"])
    trace = run_tpo(sample, generator, judge, TpoConfig(n_steps=3))
    assert trace.partial and trace.error and "step 2" in trace.error
    assert list(trace.prompts) == [sample.prompt, "prompt v1"]
    assert trace.final_prompt == "prompt v1"


def test_run_tpo_determinism(sample, dataset):
    def go():
        return run_tpo(
            sample, OracleGenerator(dataset), _scripted_for_steps(2), TpoConfig()
        )

    assert go().to_dict() == go().to_dict()


def test_trace_round_trips_through_json(tmp_path, sample, dataset):
    trace = run_tpo(
        sample, OracleGenerator(dataset), _scripted_for_steps(1),
        TpoConfig(n_steps=1),
    )
    path = tmp_path / "trace.json"
    save_trace(trace, path)
    assert load_trace(path) == trace


def test_tpo_config_validation():
    with pytest.raises(ConfigError):
        TpoConfig(n_candidates=1)
    with pytest.raises(ConfigError):
        TpoConfig(n_steps=0)
    with pytest.raises(ConfigError):
        TpoConfig(n_loss_frames=0)


# --- rewrites ----------------------------------------------------------------------------


def test_pre_rewrite_caps_length():
    long_reply = " ".join(["word"] * 50)
    judge = ScriptedJudge([long_reply])
    result = pre_rewrite("short prompt here", _frame(0), judge)
    assert result.truncated
    assert len(result.text.split()) == 2 * 3
    _text, n_images = judge.transcript[0]
    assert n_images == 1


def test_pre_rewrite_passthrough_when_short():
    judge = ScriptedJudge(["tight prompt"])
    result = pre_rewrite("a reasonably long original prompt", _frame(0), judge)
    assert not result.truncated and result.text == "tight prompt"


def test_post_rewrite_sends_clip_frames():
    judge = ScriptedJudge(["rewritten"])
    out = post_rewrite("p", _clip([1, 2, 3, 4]), judge, n_frames=4)
    assert out == "rewritten"
    assert judge.transcript[0][1] == 4


# --- reward ranking ----------------------------------------------------------------------


def test_rank_by_judge_score():
    judge = ScriptedJudge(["3", "7"])
    deps = RewardDeps(judge=judge)
    best, worst, scores = rank_by_reward(
        [_clip([1]), _clip([2])], "p", RewardScorer.JUDGE_SCORE, deps
    )
    assert (best, worst) == (1, 0) and scores == [3.0, 7.0]


def test_rank_tie_goes_to_lower_index():
    judge = ScriptedJudge(["5", "5"])
    deps = RewardDeps(judge=judge)
    best, worst, _ = rank_by_reward(
        [_clip([1]), _clip([2])], "p", RewardScorer.JUDGE_SCORE, deps
    )
    assert (best, worst) == (0, 0)


def test_rank_unparseable_rating_is_metric_error():
    judge = ScriptedJudge(["great"])
    with pytest.raises(MetricError):
        rank_by_reward([_clip([1])], "p", RewardScorer.JUDGE_SCORE,
                       RewardDeps(judge=judge))


def test_rank_by_embedder_similarity():
    target = _frame(200, w=32, h=32)
    deps = RewardDeps(embedder=PatchHistogramEmbedder(), target=target)
    close = _clip([210], w=32, h=32)  # same histogram bin as the target
    far = _clip([10], w=32, h=32)
    best, worst, scores = rank_by_reward(
        [far, close], "p", RewardScorer.EMBEDDER_SIM, deps
    )
    assert best == 1 and worst == 0
    assert scores[1] > scores[0]


def test_rank_embedder_requires_target():
    deps = RewardDeps(embedder=PatchHistogramEmbedder())
    with pytest.raises(MetricError):
        rank_by_reward([_clip([1], w=32, h=32)], "p",
                       RewardScorer.EMBEDDER_SIM, deps)


# --- authoring ----------------------------------------------------------------------------


def test_author_offline_is_deterministic_and_descriptive():
    a = author_prompt(_frame(1), _frame(2), "move the red token home",
                      Dimension.PLANNING_EXECUTION)
    b = author_prompt(_frame(1), _frame(2), "move the red token home",
                      Dimension.PLANNING_EXECUTION)
    assert a == b
    assert "move the red token home" in a
    assert a.startswith("Starting from the first frame exactly as shown")


def test_author_judge_mode_sends_both_images():
    judge = ScriptedJudge(["authored prompt"])
    out = author_prompt(_frame(1), _frame(2), "task text",
                        Dimension.STRUCTURAL, judge=judge)
    assert out == "authored prompt"
    assert judge.transcript[0][1] == 2


def test_author_offline_maze_mentions_goal_color(dataset):
    sample = dataset.samples[0]
    scene = taskgen.scene_for(sample.task, sample.difficulty, sample.seed)
    prompt = author_prompt(sample.initial, sample.target, scene.task_text(),
                           sample.dimension)
    assert "red" in prompt  # the goal square's color name
