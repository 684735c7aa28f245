"""Evaluation orchestration: k seeded generations per sample, Pass@k, reports.

``run_eval`` drives a generator over a dataset under one of four prompting
strategies, verifies every clip, and aggregates accuracies per dimension,
difficulty, and task.  Metric errors (infrastructure faults) are excluded
from Pass@k denominators and surfaced separately, so a flaky endpoint can
never masquerade as model skill or model failure.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .core import (
    ConfigError,
    Dataset,
    DatasetError,
    Difficulty,
    Dimension,
    DIMENSION_OF_TASK,
    Frame,
    Task,
    TaskSample,
    Verdict,
    VideoClip,
)
from .imgproc import resize_nearest
from .modelio import GeneratorClient, JudgeClient
from .tpo import PromptTemplateSet, TpoConfig, TpoTrace, post_rewrite, pre_rewrite, run_tpo
from .verify import VerifierDeps, VerifyConfig, verify_final

__all__ = [
    "EvalConfig",
    "Report",
    "Strategy",
    "aggregate_report",
    "pass_at_k",
    "pass_at_k_detail",
    "render_csv",
    "render_json",
    "render_markdown",
    "run_eval",
]


class Strategy(str, Enum):
    PLAIN = "plain"
    PRE_REWRITE = "pre_rewrite"
    POST_REWRITE = "post_rewrite"
    VIDEO_TPO = "video_tpo"


@dataclass(frozen=True)
class EvalConfig:
    """How many predictions per sample, seeded how, prompted how."""

    k: int = 5
    base_seed: int = 0
    strategy: Strategy = Strategy.PLAIN
    model: str = "default"
    resolution_policy: Mapping[str, tuple[int, int]] = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        object.__setattr__(
            self, "resolution_policy", dict(self.resolution_policy)
        )

    @property
    def input_size(self) -> tuple[int, int] | None:
        """The model's preferred input resolution, or None for passthrough."""
        size = self.resolution_policy.get(self.model)
        return (int(size[0]), int(size[1])) if size else None


# ---------------------------------------------------------------------------
# Pass@k
# ---------------------------------------------------------------------------


def _usable(verdicts: Sequence) -> list[bool]:
    """Pass flags of the non-metric-error verdicts, in order."""
    out = []
    for v in verdicts:
        if isinstance(v, Verdict):
            if not v.is_error:
                out.append(v.passed)
        else:
            out.append(bool(v))
    return out


def pass_at_k_detail(
    verdicts_per_sample: Sequence[Sequence], k: int
) -> tuple[float | None, int]:
    """(accuracy, excluded): excluded samples lack k usable verdicts.

    Accuracy is the mean over eligible samples of "any of the first k usable
    verdicts passed"; None when no sample is eligible.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    outcomes = []
    excluded = 0
    for verdicts in verdicts_per_sample:
        usable = _usable(verdicts)
        if len(usable) < k:
            excluded += 1
            continue
        outcomes.append(any(usable[:k]))
    if not outcomes:
        return None, excluded
    return sum(outcomes) / len(outcomes), excluded


def pass_at_k(verdicts_per_sample: Sequence[Sequence], k: int) -> float:
    """Fraction of samples with a passing verdict among their first k."""
    accuracy, _excluded = pass_at_k_detail(verdicts_per_sample, k)
    if accuracy is None:
        raise ValueError(f"no sample has {k} usable verdicts")
    return accuracy


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Report:
    """Accuracy percentages at one k, grouped the way results tables are.

    ``dimensions`` maps dimension value -> {difficulty value or "overall" ->
    percentage}; ``tasks`` has one slot per task enum member, None where the
    dataset holds no such samples.  All percentages lie in [0, 100].
    """

    k: int
    overall: float | None
    dimensions: Mapping[str, Mapping[str, float | None]]
    tasks: Mapping[str, float | None]
    n_samples: int
    n_excluded: int
    n_metric_errors: int

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "overall": self.overall,
            "dimensions": {
                dim: dict(cells) for dim, cells in self.dimensions.items()
            },
            "tasks": dict(self.tasks),
            "n_samples": self.n_samples,
            "n_excluded": self.n_excluded,
            "n_metric_errors": self.n_metric_errors,
        }


def _percent(outcomes: Sequence[bool]) -> float | None:
    if not outcomes:
        return None
    return 100.0 * sum(outcomes) / len(outcomes)


def aggregate_report(
    verdicts: Iterable[Verdict],
    dataset: Dataset,
    k_values: Sequence[int] = (1, 5),
) -> dict[int, Report]:
    """Group verdicts by sample and compute Pass@k tables for each k.

    Every verdict must reference a dataset sample.  Samples without k usable
    verdicts are excluded from that k's accuracies and counted.
    """
    meta = {s.id: s.meta for s in dataset.samples}
    by_sample: dict[str, list[Verdict]] = {s.id: [] for s in dataset.samples}
    n_errors = 0
    for verdict in verdicts:
        if verdict.sample_id not in by_sample:
            raise DatasetError(
                f"verdict references unknown sample {verdict.sample_id!r}"
            )
        by_sample[verdict.sample_id].append(verdict)
        if verdict.is_error:
            n_errors += 1
    for sample_verdicts in by_sample.values():
        sample_verdicts.sort(key=lambda v: v.generation_index)

    reports: dict[int, Report] = {}
    for k in sorted(set(int(k) for k in k_values)):
        if k < 1:
            raise ValueError("k values must be positive")
        outcome: dict[str, bool] = {}
        excluded = 0
        for sample_id, sample_verdicts in by_sample.items():
            usable = _usable(sample_verdicts)
            if len(usable) < k:
                excluded += 1
                continue
            outcome[sample_id] = any(usable[:k])

        def select(pred) -> list[bool]:
            return [
                outcome[sid]
                for sid in outcome
                if pred(meta[sid])
            ]

        dimensions = {}
        for dim in Dimension:
            cells: dict[str, float | None] = {}
            for diff in Difficulty:
                cells[diff.value] = _percent(
                    select(lambda m, d=dim, f=diff: m.dimension == d and m.difficulty == f)
                )
            cells["overall"] = _percent(select(lambda m, d=dim: m.dimension == d))
            dimensions[dim.value] = cells
        tasks = {
            task.value: _percent(select(lambda m, t=task: m.task == t))
            for task in Task
        }
        reports[k] = Report(
            k=k,
            overall=_percent(list(outcome.values())),
            dimensions=dimensions,
            tasks=tasks,
            n_samples=len(by_sample),
            n_excluded=excluded,
            n_metric_errors=n_errors,
        )
    return reports


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def render_json(reports: Mapping[int, Report]) -> str:
    return json.dumps(
        [reports[k].to_json_dict() for k in sorted(reports)],
        indent=2,
        sort_keys=False,
    ) + "\n"


def render_csv(reports: Mapping[int, Report]) -> str:
    lines = ["group,metric,k,accuracy"]
    for k in sorted(reports):
        report = reports[k]
        rows: list[tuple[str, float | None]] = [("overall", report.overall)]
        for dim, cells in report.dimensions.items():
            rows.append((dim, cells["overall"]))
            rows.extend(
                (f"{dim}/{diff.value}", cells[diff.value]) for diff in Difficulty
            )
        rows.extend(
            (f"task/{task}", value)
            for task, value in report.tasks.items()
            if value is not None
        )
        for group, value in rows:
            if value is not None:
                lines.append(f"{group},pass,{k},{value:.2f}")
        lines.append(f"metric_errors,count,{k},{report.n_metric_errors}")
        lines.append(f"excluded_samples,count,{k},{report.n_excluded}")
    return "\n".join(lines) + "\n"


_DIFFICULTY_LABEL = {"easy": "Easy", "medium": "Med.", "hard": "Hard"}


def render_markdown(reports: Mapping[int, Report]) -> str:
    blocks = []
    for k in sorted(reports):
        report = reports[k]
        head = (
            ["Dimension"]
            + [_DIFFICULTY_LABEL[d.value] for d in Difficulty]
            + ["Over."]
        )
        lines = [
            f"## Pass@{k}",
            "",
            "| " + " | ".join(head) + " |",
            "|" + "---|" * len(head),
        ]
        for dim, cells in report.dimensions.items():
            row = [dim] + [_fmt(cells[d.value]) for d in Difficulty]
            row.append(_fmt(cells["overall"]))
            lines.append("| " + " | ".join(row) + " |")
        lines.append(
            "| **Overall** | | | | **" + _fmt(report.overall) + "** |"
        )
        lines.append("")
        lines.append(
            f"samples: {report.n_samples}, excluded (insufficient usable "
            f"verdicts): {report.n_excluded}, metric errors: "
            f"{report.n_metric_errors}"
        )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# ---------------------------------------------------------------------------
# evaluation loop
# ---------------------------------------------------------------------------


def _resize_frame(frame: Frame, size: tuple[int, int] | None) -> Frame:
    if size is None or frame.size == size:
        return frame
    return Frame(resize_nearest(frame.pixels, size))


def _strategy_prompt(
    sample: TaskSample,
    initial: Frame,
    generator: GeneratorClient,
    judge: JudgeClient | None,
    cfg: EvalConfig,
    tpo_cfg: TpoConfig,
    templates: PromptTemplateSet | None,
) -> tuple[str, TpoTrace | None]:
    """The prompt the k predictions are generated from, per strategy."""
    if cfg.strategy == Strategy.PLAIN:
        return sample.prompt, None
    if judge is None:
        raise ConfigError(
            f"strategy {cfg.strategy.value} needs a judge client"
        )
    if cfg.strategy == Strategy.PRE_REWRITE:
        return pre_rewrite(sample.prompt, initial, judge, templates).text, None
    if cfg.strategy == Strategy.POST_REWRITE:
        probe = generator.generate(initial, sample.prompt, cfg.base_seed)
        return post_rewrite(sample.prompt, probe, judge, templates), None
    if cfg.strategy == Strategy.VIDEO_TPO:
        trace = run_tpo(sample, generator, judge, tpo_cfg, templates)
        return trace.final_prompt, trace
    raise ConfigError(f"unknown strategy {cfg.strategy!r}")


def _eval_sample(
    sample: TaskSample,
    generator: GeneratorClient,
    deps: VerifierDeps,
    cfg: EvalConfig,
    verify_cfg: VerifyConfig,
    tpo_cfg: TpoConfig,
    judge: JudgeClient | None,
    templates: PromptTemplateSet | None,
    done: Mapping[tuple[str, int], Verdict],
) -> tuple[list[Verdict], TpoTrace | None]:
    initial = _resize_frame(sample.initial, cfg.input_size)
    try:
        prompt, trace = _strategy_prompt(
            sample, initial, generator, judge, cfg, tpo_cfg, templates
        )
    except ConfigError:
        raise
    except Exception as exc:
        verdicts = [
            done.get((sample.id, i))
            or Verdict(
                sample_id=sample.id,
                generation_index=i,
                passed=False,
                metric="strategy",
                evidence={"strategy": cfg.strategy.value},
                error=f"strategy failed: {exc}",
            )
            for i in range(cfg.k)
        ]
        return verdicts, None

    verdicts = []
    for i in range(cfg.k):
        previous = done.get((sample.id, i))
        if previous is not None and not previous.is_error:
            verdicts.append(previous)
            continue
        seed = cfg.base_seed + i
        try:
            clip = generator.generate(initial, prompt, seed)
        except Exception as exc:
            verdicts.append(
                Verdict(
                    sample_id=sample.id,
                    generation_index=i,
                    passed=False,
                    metric="generation",
                    evidence={"seed": seed},
                    error=f"generation failed: {exc}",
                )
            )
            continue
        verdicts.append(
            verify_final(sample, clip, deps, verify_cfg, generation_index=i)
        )
    return verdicts, trace


def run_eval(
    dataset: Dataset,
    generator: GeneratorClient,
    deps: VerifierDeps | None = None,
    cfg: EvalConfig | None = None,
    verify_cfg: VerifyConfig | None = None,
    tpo_cfg: TpoConfig | None = None,
    judge: JudgeClient | None = None,
    templates: PromptTemplateSet | None = None,
    resume: Iterable[Verdict] | None = None,
    k_values: Sequence[int] | None = None,
) -> tuple[list[Verdict], dict[int, Report], dict[str, TpoTrace]]:
    """Generate, verify, and aggregate over the whole dataset.

    Returns (verdicts sorted by (sample_id, generation_index), reports per
    k, TPO traces per sample for the VideoTPO strategy).  Client failures
    become metric-error verdicts and the run continues.  ``resume`` replays
    prior verdicts: completed (sample, generation) pairs are kept, only
    metric errors are re-run.
    """
    if len(dataset) == 0:
        raise DatasetError("dataset is empty")
    deps = deps or VerifierDeps()
    cfg = cfg or EvalConfig()
    verify_cfg = verify_cfg or VerifyConfig()
    tpo_cfg = tpo_cfg or TpoConfig(base_seed=cfg.base_seed)
    judge = judge or deps.judge
    done: dict[tuple[str, int], Verdict] = {}
    for verdict in resume or ():
        done[(verdict.sample_id, verdict.generation_index)] = verdict

    samples = sorted(dataset.samples, key=lambda s: s.id)
    traces: dict[str, TpoTrace] = {}

    def work(sample: TaskSample) -> tuple[str, list[Verdict], TpoTrace | None]:
        sample_verdicts, trace = _eval_sample(
            sample, generator, deps, cfg, verify_cfg, tpo_cfg, judge,
            templates, done,
        )
        return sample.id, sample_verdicts, trace

    results: list[tuple[str, list[Verdict], TpoTrace | None]] = []
    if cfg.workers == 1:
        results = [work(s) for s in samples]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(work, samples))

    verdicts: list[Verdict] = []
    for sample_id, sample_verdicts, trace in results:
        verdicts.extend(sample_verdicts)
        if trace is not None:
            traces[sample_id] = trace
    verdicts.sort(key=lambda v: (v.sample_id, v.generation_index))
    reports = aggregate_report(
        verdicts, dataset, k_values if k_values is not None else sorted({1, cfg.k})
    )
    return verdicts, reports, traces
