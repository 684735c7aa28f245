"""Deterministic synthetic task generation.

Ten task types are generated procedurally; each knows how to render its
initial/target frames, a ground-truth clip, and targeted negative-control
corruptions of that clip.  Everything is a pure function of
(task, difficulty, seed, config), so samples can be rebuilt bit-identically
from their stored metadata.
"""

from __future__ import annotations

import json

from ..core import (
    DatasetError,
    Difficulty,
    Frame,
    Task,
    TaskSample,
    VideoClip,
    derive_seed,
    truth_to_json,
)
from ._scene import CorruptionMode, GenConfig, Scene, UnsupportedCorruption
from .arithmetic import ArithmeticScene
from .bars import BarsScene
from .counting import CountingScene
from .elimination import EliminationScene
from .graph import GraphScene
from .match3 import Match3Scene
from .maze import MazeScene
from .multichoice import MultichoiceScene
from .sequence import SequenceScene
from .sudoku import SudokuScene

__all__ = [
    "CORRUPTIONS_FOR",
    "CorruptionMode",
    "GenConfig",
    "SUPPORTED_TASKS",
    "UnsupportedCorruption",
    "corrupt",
    "generate",
    "generate_batch",
    "render_gt_video",
    "scene_for",
]

_SCENES: dict[Task, type[Scene]] = {
    cls.task: cls
    for cls in (
        ArithmeticScene,
        BarsScene,
        CountingScene,
        EliminationScene,
        GraphScene,
        Match3Scene,
        MazeScene,
        MultichoiceScene,
        SequenceScene,
        SudokuScene,
    )
}

SUPPORTED_TASKS: tuple[Task, ...] = tuple(sorted(_SCENES, key=lambda t: t.value))

CORRUPTIONS_FOR: dict[Task, tuple[CorruptionMode, ...]] = {
    task: cls.corruptions + (CorruptionMode.STATIC_VIDEO,)
    for task, cls in _SCENES.items()
}

# tasks whose truths can repeat across seeds by pigeonhole (a four-way
# letter, or the identity rank vector); batch distinctness for these also
# keys on the target frame
_DIGEST_KEYED = {Task.VISUAL_DEDUCTION, Task.SORTING_NUMBERS}


def scene_for(
    task: Task,
    difficulty: Difficulty,
    seed: int,
    cfg: GenConfig | None = None,
) -> Scene:
    if task not in _SCENES:
        raise DatasetError(f"no generator for task {task.value!r}")
    return _SCENES[task](difficulty, seed, cfg or GenConfig())


def generate(
    task: Task,
    difficulty: Difficulty,
    seed: int,
    cfg: GenConfig | None = None,
) -> TaskSample:
    """Build one sample; the prompt comes from the offline prompt author."""
    from ..tpo import author_prompt  # deferred: tpo pulls in client machinery

    scene = scene_for(task, difficulty, seed, cfg)
    initial = scene.initial_array()
    target = scene.target_array()
    prompt = author_prompt(
        Frame(initial), Frame(target), scene.task_text(), scene.dimension
    )
    return scene.sample(prompt)


def render_gt_video(sample: TaskSample, cfg: GenConfig | None = None) -> VideoClip:
    """Rebuild the sample's scene and render its ground-truth clip."""
    scene = _rebuild(sample, cfg)
    return scene.gt_video()


def corrupt(
    sample: TaskSample,
    mode: CorruptionMode,
    seed: int,
    cfg: GenConfig | None = None,
) -> VideoClip:
    """A plausible clip violating exactly the property ``mode`` targets."""
    scene = _rebuild(sample, cfg)
    return scene.corrupt_video(mode, seed)


def _rebuild(sample: TaskSample, cfg: GenConfig | None) -> Scene:
    if cfg is None:
        h, w = sample.initial.pixels.shape[:2]
        cfg = GenConfig(canvas=(w, h))
    scene = scene_for(sample.task, sample.difficulty, sample.seed, cfg)
    if scene.truth() != sample.truth:
        raise DatasetError(
            f"sample {sample.id!r} does not match its regenerated scene; "
            "was it produced by this generator version?"
        )
    return scene


def _distinctness_key(sample: TaskSample) -> str:
    key = json.dumps(truth_to_json(sample.truth), sort_keys=True)
    if sample.task in _DIGEST_KEYED:
        key += ":" + sample.target.digest()
    return key


def generate_batch(
    task: Task,
    difficulty: Difficulty,
    count: int,
    base_seed: int,
    cfg: GenConfig | None = None,
    max_attempts_per_sample: int = 50,
) -> list[TaskSample]:
    """Generate ``count`` samples with pairwise-distinct ground truths."""
    samples: list[TaskSample] = []
    seen: set[str] = set()
    for i in range(count):
        for attempt in range(max_attempts_per_sample):
            seed = derive_seed(base_seed, "batch", task.value, difficulty.value, i, attempt)
            sample = generate(task, difficulty, seed, cfg)
            key = _distinctness_key(sample)
            if key not in seen:
                seen.add(key)
                samples.append(sample)
                break
        else:
            raise DatasetError(
                f"could not generate a distinct {task.value} sample "
                f"(index {i}) in {max_attempts_per_sample} attempts"
            )
    return samples
