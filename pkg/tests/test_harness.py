"""Evaluation orchestration: Pass@k math, aggregation, rendering, run_eval."""

import json
from pathlib import Path

import numpy as np
import pytest

from vireo import taskgen
from vireo.core import (
    ConfigError,
    Dataset,
    DatasetError,
    Difficulty,
    Dimension,
    DIMENSION_OF_TASK,
    Frame,
    QAItem,
    QASet,
    SCHEMA_VERSION,
    Task,
    TaskSample,
    Verdict,
    write_verdicts,
)
from vireo.draw import new_canvas
from vireo.harness import (
    EvalConfig,
    Strategy,
    aggregate_report,
    pass_at_k,
    pass_at_k_detail,
    render_csv,
    render_json,
    render_markdown,
    run_eval,
)
from vireo.modelio import OracleGenerator, ScriptedJudge

F, T = False, True
FIXTURE = [[F, F, T, F, F], [F, F, F, F, F], [T, F, F, F, F], [F, T, F, F, F]]


# --- pass@k --------------------------------------------------------------------


def test_pass_at_k_fixture():
    assert pass_at_k(FIXTURE, 1) == 0.25
    assert pass_at_k(FIXTURE, 5) == 0.75


def test_pass_at_k_all_first_pass():
    assert pass_at_k([[T, F], [T, T], [T, F]], 1) == 1.0


def test_pass_at_k_monotone_in_k():
    rng = np.random.default_rng(7)
    for _ in range(50):
        matrix = rng.random((6, 8)) < 0.3
        rows = [list(map(bool, row)) for row in matrix]
        accs = [pass_at_k(rows, k) for k in range(1, 9)]
        assert accs == sorted(accs)


def test_pass_at_k_matches_enumeration():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n, m = int(rng.integers(1, 8)), int(rng.integers(1, 7))
        rows = [list(map(bool, rng.random(m) < 0.4)) for _ in range(n)]
        for k in range(1, m + 1):
            expected = sum(any(r[:k]) for r in rows) / n
            assert pass_at_k(rows, k) == expected


def test_pass_at_k_rejects_nonpositive_k():
    with pytest.raises(ValueError):
        pass_at_k(FIXTURE, 0)


def test_pass_at_k_excludes_short_samples():
    acc, excluded = pass_at_k_detail([[T], [F, T], [F]], 2)
    assert acc == 1.0 and excluded == 2


def test_pass_at_k_skips_metric_errors():
    verdicts = [
        Verdict("s", 0, False, "m", error="backend down"),
        Verdict("s", 1, True, "m"),
    ]
    # the error verdict is not usable: pass@1 sees the passing one first
    assert pass_at_k([verdicts], 1) == 1.0


def test_pass_at_k_no_eligible_sample():
    with pytest.raises(ValueError):
        pass_at_k([[T]], 2)


# --- synthetic verdict/report fixtures --------------------------------------------


def _flat_samples(n) -> list[TaskSample]:
    """n cheap samples spread across dimensions (tiny frames, QA truths)."""
    tasks = [
        Task.ROBOT_NAVIGATION,      # planning_execution
        Task.SHAPE_FITTING,         # spatial_pattern
        Task.SYMBOLIC_REASONING,    # symbolic_logical
    ]
    truth = QASet(items=(
        QAItem(question="done?", answer=True),
        QAItem(question="clean?", answer=True),
    ))
    frame = Frame(new_canvas(4, 4))
    samples = []
    for i in range(n):
        task = tasks[i % len(tasks)]
        samples.append(TaskSample(
            id=f"fixture_{i:04d}",
            dimension=DIMENSION_OF_TASK[task],
            task=task,
            difficulty=list(Difficulty)[i % 3],
            initial=frame,
            target=frame,
            prompt="p",
            truth=truth,
            seed=i,
        ))
    return samples


def _dataset(samples) -> Dataset:
    return Dataset(root=None, schema_version=SCHEMA_VERSION,
                   samples=samples, gt_video_dirs={})


def _verdicts(samples, n_pass, k=1):
    """First n_pass samples pass every generation; the rest fail."""
    out = []
    for i, s in enumerate(samples):
        for g in range(k):
            out.append(Verdict(s.id, g, i < n_pass, "fixture"))
    return out


def test_report_formats_published_rates():
    # 50/595 -> 8.40, 166/595 -> 27.90 at k=1; 98/595 -> 16.47 at k=5
    samples = _flat_samples(595)
    ds = _dataset(samples)

    r1 = aggregate_report(_verdicts(samples, 50), ds, [1])[1]
    assert f"{r1.overall:.2f}" == "8.40"
    assert "overall,pass,1,8.40" in render_csv({1: r1})
    assert "**8.40**" in render_markdown({1: r1})

    r2 = aggregate_report(_verdicts(samples, 166), ds, [1])[1]
    assert f"{r2.overall:.2f}" == "27.90"

    r5 = aggregate_report(_verdicts(samples, 98, k=5), ds, [5])[5]
    assert f"{r5.overall:.2f}" == "16.47"
    assert "overall,pass,5,16.47" in render_csv({5: r5})


def test_report_dimension_overall_is_sample_weighted():
    samples = _flat_samples(30)
    ds = _dataset(samples)
    rng = np.random.default_rng(3)
    verdicts = [Verdict(s.id, 0, bool(rng.random() < 0.5), "m") for s in samples]
    report = aggregate_report(verdicts, ds, [1])[1]
    outcome = {v.sample_id: v.passed for v in verdicts}
    for dim, cells in report.dimensions.items():
        members = [s for s in samples if s.dimension.value == dim]
        if not members:
            assert cells["overall"] is None
            continue
        expected = 100.0 * sum(outcome[s.id] for s in members) / len(members)
        assert cells["overall"] == pytest.approx(expected)
        # and it equals the difficulty cells weighted by their sample counts
        total = 0.0
        n = 0
        for diff in Difficulty:
            group = [s for s in members if s.difficulty == diff]
            if group:
                total += cells[diff.value] * len(group)
                n += len(group)
        assert cells["overall"] == pytest.approx(total / n)


def test_report_task_slots_cover_all_24():
    samples = _flat_samples(6)
    ds = _dataset(samples)
    report = aggregate_report(_verdicts(samples, 6), ds, [1])[1]
    assert set(report.tasks) == {t.value for t in Task}
    populated = {t for t, v in report.tasks.items() if v is not None}
    assert populated == {s.task.value for s in samples}


def test_orphan_verdict_is_dataset_error():
    samples = _flat_samples(2)
    ds = _dataset(samples)
    with pytest.raises(DatasetError):
        aggregate_report([Verdict("who_is_this", 0, True, "m")], ds, [1])


def test_render_csv_header_and_counts():
    samples = _flat_samples(4)
    ds = _dataset(samples)
    text = render_csv(aggregate_report(_verdicts(samples, 2), ds, [1]))
    lines = text.splitlines()
    assert lines[0] == "group,metric,k,accuracy"
    assert any(line.startswith("metric_errors,count,1,") for line in lines)


def test_render_json_is_parseable_and_ordered():
    samples = _flat_samples(4)
    ds = _dataset(samples)
    reports = aggregate_report(_verdicts(samples, 2, k=2), ds, [2, 1])
    data = json.loads(render_json(reports))
    assert [entry["k"] for entry in data] == [1, 2]
    assert set(data[0]["dimensions"]) == {d.value for d in Dimension}


def test_reports_are_pure_functions_of_inputs():
    samples = _flat_samples(10)
    ds = _dataset(samples)
    verdicts = _verdicts(samples, 4, k=3)
    a = aggregate_report(verdicts, ds, [1, 3])
    b = aggregate_report(verdicts, ds, [1, 3])
    assert render_json(a) == render_json(b)


# --- run_eval ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def real_dataset():
    samples = [
        taskgen.generate(Task.MAZE_SOLVING, Difficulty.EASY, seed=31),
        taskgen.generate(Task.SUDOKU_COMPLETION, Difficulty.EASY, seed=31),
    ]
    return _dataset(samples)


def test_run_eval_oracle_is_perfect(real_dataset):
    verdicts, reports, traces = run_eval(
        real_dataset, OracleGenerator(real_dataset), cfg=EvalConfig(k=2)
    )
    assert len(verdicts) == 4
    assert all(v.passed for v in verdicts)
    assert reports[1].overall == 100.0 and reports[2].overall == 100.0
    assert traces == {}


def test_run_eval_uses_sequential_seeds(real_dataset):
    seeds = []
    oracle = OracleGenerator(real_dataset)

    class Recorder:
        def generate(self, initial, prompt, seed):
            seeds.append(seed)
            return oracle.generate(initial, prompt, seed)

    run_eval(real_dataset, Recorder(), cfg=EvalConfig(k=3, base_seed=40))
    assert sorted(set(seeds)) == [40, 41, 42]


def test_run_eval_corrupted_oracle_fails_cleanly(real_dataset):
    verdicts, reports, _ = run_eval(
        real_dataset, OracleGenerator(real_dataset, noise="auto"),
        cfg=EvalConfig(k=1),
    )
    assert all(not v.passed and not v.is_error for v in verdicts)
    assert reports[1].overall == 0.0


def test_run_eval_generator_crash_becomes_metric_errors(real_dataset):
    class Boom:
        def generate(self, initial, prompt, seed):
            raise RuntimeError("no backend")

    verdicts, reports, _ = run_eval(real_dataset, Boom(), cfg=EvalConfig(k=2))
    assert all(v.is_error for v in verdicts)
    assert reports[1].overall is None
    assert reports[1].n_metric_errors == 4
    assert reports[1].n_excluded == 2


def test_run_eval_resume_reruns_only_errors(real_dataset):
    class Boom:
        def generate(self, initial, prompt, seed):
            raise RuntimeError("no backend")

    errors, _, _ = run_eval(real_dataset, Boom(), cfg=EvalConfig(k=1))
    fixed, _, _ = run_eval(
        real_dataset, OracleGenerator(real_dataset), cfg=EvalConfig(k=1),
        resume=errors,
    )
    assert all(v.passed for v in fixed)
    # completed verdicts survive a later broken run untouched
    kept, _, _ = run_eval(real_dataset, Boom(), cfg=EvalConfig(k=1), resume=fixed)
    assert [v.to_json_dict() for v in kept] == [v.to_json_dict() for v in fixed]


def test_run_eval_parallel_equals_serial(real_dataset):
    serial, _, _ = run_eval(
        real_dataset, OracleGenerator(real_dataset), cfg=EvalConfig(k=2)
    )
    parallel, _, _ = run_eval(
        real_dataset, OracleGenerator(real_dataset),
        cfg=EvalConfig(k=2, workers=4),
    )
    assert [v.to_json_dict() for v in serial] == [v.to_json_dict() for v in parallel]


def test_run_eval_verdict_jsonl_is_byte_identical(tmp_path, real_dataset):
    paths = []
    for name in ("a.jsonl", "b.jsonl"):
        verdicts, _, _ = run_eval(
            real_dataset, OracleGenerator(real_dataset), cfg=EvalConfig(k=2)
        )
        path = tmp_path / name
        write_verdicts(verdicts, path)
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_run_eval_resolution_policy_resizes_input(real_dataset):
    sizes = []

    class Recorder:
        def generate(self, initial, prompt, seed):
            sizes.append(initial.size)
            raise RuntimeError("size recorded")

    cfg = EvalConfig(k=1, model="tiny", resolution_policy={"tiny": (64, 48)})
    run_eval(real_dataset, Recorder(), cfg=cfg)
    assert set(sizes) == {(64, 48)}


def test_run_eval_empty_dataset_rejected():
    class Never:
        def generate(self, initial, prompt, seed):
            raise AssertionError("should not be called")

    with pytest.raises(DatasetError):
        run_eval(_dataset([]), Never())


# --- strategies -------------------------------------------------------------------------


def test_strategy_pre_rewrite_uses_judge_reply(real_dataset):
    prompts = []
    oracle = OracleGenerator(real_dataset)

    class Recorder:
        def generate(self, initial, prompt, seed):
            prompts.append(prompt)
            return oracle.generate(initial, prompt, seed)

    judge = ScriptedJudge(["rewritten one", "rewritten two"])
    verdicts, _, _ = run_eval(
        real_dataset, Recorder(),
        cfg=EvalConfig(k=2, strategy=Strategy.PRE_REWRITE), judge=judge,
    )
    assert len(judge.transcript) == 2  # one rewrite call per sample
    assert set(prompts) == {"rewritten one", "rewritten two"}
    assert all(v.passed for v in verdicts)


def test_strategy_post_rewrite_probes_then_rewrites(real_dataset):
    calls = []
    oracle = OracleGenerator(real_dataset)

    class Recorder:
        def generate(self, initial, prompt, seed):
            calls.append((prompt, seed))
            return oracle.generate(initial, prompt, seed)

    judge = ScriptedJudge(["better prompt a", "better prompt b"])
    run_eval(
        real_dataset, Recorder(),
        cfg=EvalConfig(k=2, strategy=Strategy.POST_REWRITE), judge=judge,
    )
    # per sample: 1 probe with the original prompt + 2 scored generations
    assert len(calls) == 2 * 3
    rewritten = [p for p, _ in calls if p.startswith("better prompt")]
    assert len(rewritten) == 4


def test_strategy_video_tpo_returns_traces(real_dataset):
    from vireo.tpo import TpoConfig

    oracle = OracleGenerator(real_dataset)
    judge = ScriptedJudge(
        ["loss a", "grad a", "tpo prompt a", "loss b", "grad b", "tpo prompt b"]
    )
    verdicts, _, traces = run_eval(
        real_dataset, oracle,
        cfg=EvalConfig(k=1, strategy=Strategy.VIDEO_TPO), judge=judge,
        tpo_cfg=TpoConfig(n_steps=1, n_candidates=2),
    )
    assert set(traces) == {s.id for s in real_dataset.samples}
    assert all(t.final_prompt.startswith("tpo prompt") for t in traces.values())
    assert all(v.passed for v in verdicts)


def test_strategy_needs_judge(real_dataset):
    with pytest.raises(ConfigError):
        run_eval(
            real_dataset, OracleGenerator(real_dataset),
            cfg=EvalConfig(k=1, strategy=Strategy.PRE_REWRITE),
        )


def test_strategy_judge_crash_marks_all_k(real_dataset):
    judge = ScriptedJudge([])  # exhausted -> every chat raises
    verdicts, reports, _ = run_eval(
        real_dataset, OracleGenerator(real_dataset),
        cfg=EvalConfig(k=3, strategy=Strategy.PRE_REWRITE), judge=judge,
    )
    assert len(verdicts) == 6
    assert all(v.is_error and "strategy failed" in v.error for v in verdicts)
    assert reports[1].n_metric_errors == 6
