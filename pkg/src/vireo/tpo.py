"""Test-time prompt optimization for image-to-video generation.

The optimizer treats the prompt as the only trainable object.  Each step
generates a small batch of candidate clips from the current prompt, asks a
vision judge to critique them (a *textual loss*), asks it how the prompt
should change (a *textual gradient*), and asks it to apply that change
(the update).  No model weights move; all state lives in the returned
:class:`TpoTrace`.

The module also houses the one-shot baselines that bracket the optimizer:
pre-generation prompt rewriting, post-generation rewriting from sampled
frames, reward-based candidate ranking, and the prompt author used when
datasets are built.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .core import (
    ConfigError,
    Dimension,
    Frame,
    MetricError,
    TaskSample,
    VideoClip,
)
from .draw import BLACK
from .modelio import Embedder, GeneratorClient, JudgeClient

__all__ = [
    "CandidateRef",
    "PromptTemplateSet",
    "RewardDeps",
    "RewardScorer",
    "RewriteResult",
    "TpoConfig",
    "TpoTrace",
    "author_prompt",
    "default_templates",
    "load_templates",
    "load_trace",
    "post_rewrite",
    "pre_rewrite",
    "rank_by_reward",
    "run_tpo",
    "save_trace",
    "stitch_vertical",
    "textual_gradient",
    "textual_loss",
    "update_prompt",
]


# ---------------------------------------------------------------------------
# templates
# ---------------------------------------------------------------------------

_REQUIRED: dict[str, tuple[str, ...]] = {
    "loss": ("{current_prompt}", "{task_definition}", "{input_videos}"),
    "gradient": ("{current_prompt}", "{loss}"),
    "update": ("{current_prompt}", "{gradient}"),
    "pre_rewrite": ("{prompt}",),
    "post_rewrite": ("{prompt}",),
    "rate": ("{prompt}",),
}
_AUTHOR_REQUIRED = ("{initial_image}", "{target_image}", "{task}")
_OFFLINE_REQUIRED = ("{task}",)


def _fill(template: str, **values: str) -> str:
    """Replace ``{name}`` markers literally; substituted text is never
    re-scanned, so braces inside prompts or judge replies are safe."""
    out = template
    for name, value in values.items():
        out = out.replace("{" + name + "}", value)
    return out


@dataclass(frozen=True)
class PromptTemplateSet:
    """The full set of judge-facing prompt templates, validated up front."""

    loss: str
    gradient: str
    update: str
    author: Mapping[Dimension, str]
    offline: Mapping[Dimension, str]
    pre_rewrite: str
    post_rewrite: str
    rate: str

    def __post_init__(self) -> None:
        for name in _REQUIRED:
            text = getattr(self, name)
            for marker in _REQUIRED[name]:
                if marker not in text:
                    raise ConfigError(
                        f"{name} template is missing the {marker} placeholder"
                    )
        for dim in Dimension:
            if dim not in self.author:
                raise ConfigError(f"no authoring template for {dim.value}")
            if dim not in self.offline:
                raise ConfigError(f"no offline template for {dim.value}")
            for marker in _AUTHOR_REQUIRED:
                if marker not in self.author[dim]:
                    raise ConfigError(
                        f"author template for {dim.value} is missing {marker}"
                    )
            for marker in _OFFLINE_REQUIRED:
                if marker not in self.offline[dim]:
                    raise ConfigError(
                        f"offline template for {dim.value} is missing {marker}"
                    )


def load_templates(directory: str | Path) -> PromptTemplateSet:
    """Load ``*.txt`` templates from a directory (editable asset layout)."""
    directory = Path(directory)

    def read(stem: str) -> str:
        path = directory / f"{stem}.txt"
        if not path.is_file():
            raise ConfigError(f"missing template file: {path}")
        return path.read_text(encoding="utf-8")

    return PromptTemplateSet(
        loss=read("loss"),
        gradient=read("gradient"),
        update=read("update"),
        author={d: read(f"author_{d.value}") for d in Dimension},
        offline={d: read(f"offline_{d.value}") for d in Dimension},
        pre_rewrite=read("pre_rewrite"),
        post_rewrite=read("post_rewrite"),
        rate=read("rate"),
    )


@lru_cache(maxsize=1)
def default_templates() -> PromptTemplateSet:
    """The template set shipped as package data."""
    root = resources.files("vireo") / "templates"
    with resources.as_file(root) as path:
        return load_templates(path)


# ---------------------------------------------------------------------------
# video plumbing
# ---------------------------------------------------------------------------


def stitch_vertical(clips: Sequence[VideoClip]) -> VideoClip:
    """Stack clips top-to-bottom into one clip for side-by-side judging.

    Shorter clips are padded by repeating their last frame; narrower clips
    are centered on black borders (reported via ``warnings``, since border
    pixels dilute comparisons).
    """
    if not clips:
        raise ValueError("cannot stitch an empty clip list")
    n_frames = max(len(c) for c in clips)
    width = max(c.frames[0].width for c in clips)
    if any(c.frames[0].width != width for c in clips):
        import warnings

        warnings.warn(
            "stitching clips of unequal width; narrower clips get "
            "black borders",
            stacklevel=2,
        )
    out_frames = []
    for i in range(n_frames):
        rows = []
        for clip in clips:
            frame = clip.frames[min(i, len(clip) - 1)]
            px = frame.pixels
            if frame.width != width:
                padded = np.zeros((frame.height, width, 3), dtype=np.uint8)
                padded[:, :, :] = BLACK
                x0 = (width - frame.width) // 2
                padded[:, x0: x0 + frame.width] = px
                px = padded
            rows.append(px)
        out_frames.append(Frame(np.concatenate(rows, axis=0)))
    return VideoClip(frames=tuple(out_frames), fps=clips[0].fps)


def _sample_frames(clip: VideoClip, n: int) -> list[Frame]:
    """Up to n frames at uniform temporal positions (endpoints included).

    Clips shorter than n yield each frame once rather than duplicates.
    """
    if n < 1:
        raise ValueError("must sample at least one frame")
    last = len(clip) - 1
    if n == 1:
        return [clip.frames[0]]
    indices = []
    for i in range(n):
        index = round(i * last / (n - 1))
        if not indices or index != indices[-1]:
            indices.append(index)
    return [clip.frames[i] for i in indices]


def _clip_digest(clip: VideoClip) -> str:
    h = hashlib.sha256()
    for frame in clip.frames:
        h.update(frame.digest().encode("ascii"))
    return h.hexdigest()


# ---------------------------------------------------------------------------
# loss / gradient / update
# ---------------------------------------------------------------------------


def textual_loss(
    clips: Sequence[VideoClip],
    prompt: str,
    task_definition: str,
    judge: JudgeClient,
    templates: PromptTemplateSet | None = None,
    n_frames: int = 8,
) -> str:
    """Judge critique of the candidate clips under the current prompt.

    The clips are stitched top-to-bottom and ``n_frames`` uniformly sampled
    frames of the stitch are attached; the judge's analysis is returned
    verbatim.
    """
    if not clips:
        raise ValueError("textual loss needs at least one candidate clip")
    templates = templates or default_templates()
    stitched = stitch_vertical(clips)
    text = _fill(
        templates.loss,
        current_prompt=prompt,
        task_definition=task_definition,
        input_videos=(
            f"[{len(clips)} candidate videos stacked top-to-bottom; "
            f"{n_frames} frames sampled uniformly in time]"
        ),
    )
    return judge.chat(_sample_frames(stitched, n_frames), text)


def textual_gradient(
    prompt: str,
    loss: str,
    judge: JudgeClient,
    templates: PromptTemplateSet | None = None,
) -> str:
    """Judge suggestions for how the prompt should change, given the loss."""
    if not loss.strip():
        raise ValueError("textual gradient needs a non-empty loss")
    templates = templates or default_templates()
    text = _fill(templates.gradient, current_prompt=prompt, loss=loss)
    return judge.chat([], text)


_FENCE = re.compile(r"\A```[^\n]*\n(.*?)\n?```\Z", re.DOTALL)


def _strip_wrapping(text: str) -> str:
    """Remove markdown fences and symmetric quote wrapping."""
    out = text.strip()
    match = _FENCE.match(out)
    if match:
        out = match.group(1).strip()
    while (
        len(out) >= 2
        and out[0] == out[-1]
        and out[0] in "\"'`"
    ):
        out = out[1:-1].strip()
    return out


def update_prompt(
    prompt: str,
    gradient: str,
    judge: JudgeClient,
    templates: PromptTemplateSet | None = None,
) -> str:
    """Judge applies the gradient to the prompt; reply is unwrapped."""
    if not gradient.strip():
        raise ValueError("prompt update needs a non-empty gradient")
    templates = templates or default_templates()
    text = _fill(templates.update, current_prompt=prompt, gradient=gradient)
    reply = _strip_wrapping(judge.chat([], text))
    if not reply:
        raise MetricError("judge returned an empty updated prompt")
    return reply


# ---------------------------------------------------------------------------
# the optimization loop
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TpoConfig:
    """Optimizer settings: batch width, step count, and seeding."""

    n_candidates: int = 2
    n_steps: int = 2
    base_seed: int = 0
    seeds: tuple[int, ...] = ()
    n_loss_frames: int = 8

    def __post_init__(self) -> None:
        if self.n_candidates < 2:
            raise ConfigError("need at least 2 candidates per step")
        if self.n_steps < 1:
            raise ConfigError("need at least 1 optimization step")
        if self.seeds and len(self.seeds) != self.n_candidates * self.n_steps:
            raise ConfigError(
                f"explicit seeds must cover every (step, candidate) pair: "
                f"expected {self.n_candidates * self.n_steps}, "
                f"got {len(self.seeds)}"
            )
        if self.n_loss_frames < 1:
            raise ConfigError("need at least 1 frame for the loss call")

    def seed_for(self, step: int, candidate: int) -> int:
        """Seed for candidate ``candidate`` of 1-indexed ``step``."""
        if self.seeds:
            return self.seeds[(step - 1) * self.n_candidates + candidate]
        return self.base_seed + step * 100 + candidate


@dataclass(frozen=True)
class CandidateRef:
    """Identity of one generated candidate, without storing its pixels."""

    seed: int
    n_frames: int
    digest: str


@dataclass
class TpoTrace:
    """Everything a run produced: the prompt lineage and its evidence.

    After a completed run ``len(prompts) == n_steps + 1`` and losses,
    gradients, and candidates all have length ``n_steps``.  A run aborted by
    a model failure keeps whatever had been computed and sets ``partial``.
    """

    sample_id: str
    prompts: list[str]
    losses: list[str] = field(default_factory=list)
    gradients: list[str] = field(default_factory=list)
    candidates: list[list[CandidateRef]] = field(default_factory=list)
    partial: bool = False
    error: str | None = None

    @property
    def final_prompt(self) -> str:
        return self.prompts[-1]

    def to_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "prompts": list(self.prompts),
            "losses": list(self.losses),
            "gradients": list(self.gradients),
            "candidates": [
                [
                    {"seed": r.seed, "n_frames": r.n_frames, "digest": r.digest}
                    for r in step
                ]
                for step in self.candidates
            ],
            "partial": self.partial,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TpoTrace":
        return cls(
            sample_id=data["sample_id"],
            prompts=list(data["prompts"]),
            losses=list(data["losses"]),
            gradients=list(data["gradients"]),
            candidates=[
                [CandidateRef(r["seed"], r["n_frames"], r["digest"]) for r in step]
                for step in data["candidates"]
            ],
            partial=bool(data["partial"]),
            error=data.get("error"),
        )


def save_trace(trace: TpoTrace, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(trace.to_dict(), indent=2) + "\n", encoding="utf-8"
    )


def load_trace(path: str | Path) -> TpoTrace:
    return TpoTrace.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _task_definition(sample: TaskSample) -> str:
    """The fixed task description shown to the judge alongside the prompt.

    Samples built by the generators re-derive their scene's task text; for
    any other sample the authored prompt doubles as the definition.
    """
    from . import taskgen  # deferred: avoid a module cycle

    if sample.task in taskgen.SUPPORTED_TASKS:
        scene = taskgen.scene_for(sample.task, sample.difficulty, sample.seed)
        return scene.task_text()
    return sample.prompt


def run_tpo(
    sample: TaskSample,
    generator: GeneratorClient,
    judge: JudgeClient,
    cfg: TpoConfig | None = None,
    templates: PromptTemplateSet | None = None,
    task_definition: str | None = None,
) -> TpoTrace:
    """Optimize the sample's prompt for ``cfg.n_steps`` steps.

    Each step makes ``cfg.n_candidates`` generator calls and exactly three
    judge calls (loss, gradient, update).  Generator or judge failures abort
    the remaining steps and mark the trace partial; configuration errors
    propagate.
    """
    cfg = cfg or TpoConfig()
    templates = templates or default_templates()
    if task_definition is None:
        task_definition = _task_definition(sample)
    trace = TpoTrace(sample_id=sample.id, prompts=[sample.prompt])
    for step in range(1, cfg.n_steps + 1):
        try:
            clips = []
            refs = []
            for i in range(cfg.n_candidates):
                seed = cfg.seed_for(step, i)
                clip = generator.generate(sample.initial, trace.prompts[-1], seed)
                clips.append(clip)
                refs.append(CandidateRef(seed, len(clip), _clip_digest(clip)))
            trace.candidates.append(refs)
            loss = textual_loss(
                clips,
                trace.prompts[-1],
                task_definition,
                judge,
                templates,
                cfg.n_loss_frames,
            )
            trace.losses.append(loss)
            gradient = textual_gradient(trace.prompts[-1], loss, judge, templates)
            trace.gradients.append(gradient)
            trace.prompts.append(
                update_prompt(trace.prompts[-1], gradient, judge, templates)
            )
        except ConfigError:
            raise
        except Exception as exc:  # model-side failure: keep what we have
            trace.partial = True
            trace.error = f"step {step}: {exc}"
            break
    return trace


# ---------------------------------------------------------------------------
# one-shot baselines
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RewriteResult:
    """A rewritten prompt plus whether the length cap truncated it."""

    text: str
    truncated: bool = False


def pre_rewrite(
    prompt: str,
    initial: Frame,
    judge: JudgeClient,
    templates: PromptTemplateSet | None = None,
) -> RewriteResult:
    """One judge call that clarifies the prompt before any generation.

    The reply is capped at twice the input's whitespace-token count; longer
    replies are truncated and flagged.
    """
    templates = templates or default_templates()
    text = _fill(templates.pre_rewrite, prompt=prompt)
    reply = judge.chat([initial], text)
    limit = 2 * max(1, len(prompt.split()))
    tokens = reply.split()
    if len(tokens) > limit:
        return RewriteResult(" ".join(tokens[:limit]), truncated=True)
    return RewriteResult(reply, truncated=False)


def post_rewrite(
    prompt: str,
    clip: VideoClip,
    judge: JudgeClient,
    templates: PromptTemplateSet | None = None,
    n_frames: int = 8,
) -> str:
    """One judge call that revises the prompt from a finished generation."""
    if len(clip) == 0:
        raise ValueError("post rewrite needs a non-empty clip")
    templates = templates or default_templates()
    text = _fill(templates.post_rewrite, prompt=prompt)
    return judge.chat(_sample_frames(clip, n_frames), text)


# ---------------------------------------------------------------------------
# reward ranking
# ---------------------------------------------------------------------------


class RewardScorer:
    """How candidate clips are scored for best/worst selection."""

    EMBEDDER_SIM = "embedder_sim"
    JUDGE_SCORE = "judge_score"


@dataclass
class RewardDeps:
    """Model handles the reward scorers draw on."""

    embedder: Embedder | None = None
    judge: JudgeClient | None = None
    target: Frame | None = None
    templates: PromptTemplateSet | None = None
    n_frames: int = 8


_RATING = re.compile(r"\A(10|[0-9])\Z")


def rank_by_reward(
    clips: Sequence[VideoClip],
    prompt: str,
    scorer: str,
    deps: RewardDeps,
) -> tuple[int, int, list[float]]:
    """Score every clip and return (best index, worst index, scores).

    ``EMBEDDER_SIM`` scores cosine similarity between each clip's last-frame
    embedding and the target frame's; ``JUDGE_SCORE`` asks the judge for a
    strict 0-10 integer rating per clip.  Ties resolve to the lower index.
    """
    if not clips:
        raise ValueError("nothing to rank")
    scores: list[float] = []
    if scorer == RewardScorer.EMBEDDER_SIM:
        if deps.embedder is None:
            raise ConfigError("embedder similarity needs an embedder")
        if deps.target is None:
            raise MetricError("embedder similarity needs a target frame")
        ref = deps.embedder.embed(deps.target)
        ref = ref / np.linalg.norm(ref)
        for clip in clips:
            vec = deps.embedder.embed(clip.frames[-1])
            vec = vec / np.linalg.norm(vec)
            scores.append(float(vec @ ref))
    elif scorer == RewardScorer.JUDGE_SCORE:
        if deps.judge is None:
            raise ConfigError("judge scoring needs a judge")
        templates = deps.templates or default_templates()
        text = _fill(templates.rate, prompt=prompt)
        for clip in clips:
            reply = deps.judge.chat(_sample_frames(clip, deps.n_frames), text)
            match = _RATING.match(reply.strip())
            if not match:
                raise MetricError(f"unparseable rating: {reply!r}")
            scores.append(float(match.group(0)))
    else:
        raise ConfigError(f"unknown reward scorer {scorer!r}")
    best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    worst = min(range(len(scores)), key=lambda i: (scores[i], i))
    return best, worst, scores


# ---------------------------------------------------------------------------
# prompt authoring
# ---------------------------------------------------------------------------


def author_prompt(
    initial: Frame,
    target: Frame,
    task: str,
    dimension: Dimension,
    judge: JudgeClient | None = None,
    templates: PromptTemplateSet | None = None,
) -> str:
    """Write the generation prompt for a sample.

    With a judge, the dimension-specific authoring template is sent along
    with both endpoint frames and the reply is returned verbatim.  Without
    one (offline mode), the deterministic per-dimension template is filled
    with the task text directly.
    """
    templates = templates or default_templates()
    if judge is None:
        return _fill(templates.offline[dimension], task=task).strip()
    text = _fill(
        templates.author[dimension],
        initial_image="[attached image 1: the initial frame]",
        target_image="[attached image 2: the goal frame]",
        task=task,
    )
    return judge.chat([initial, target], text)
