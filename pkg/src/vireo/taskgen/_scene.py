"""Shared machinery for the synthetic task generators.

Every task is built as a `Scene`: a deterministic function of
(difficulty, seed, config) that can render its initial/target frames, the
ground-truth video, and targeted corruptions of it.  All randomness flows
from one seeded generator per scene, with child streams derived by hashing
labelled paths (`core.derive_seed`), so rebuilding a scene from a sample's
(task, difficulty, seed) reproduces it bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import ClassVar

import numpy as np

from ..core import (
    DIMENSION_OF_TASK,
    Difficulty,
    Dimension,
    Frame,
    GroundTruth,
    Task,
    TaskSample,
    VideoClip,
    derive_seed,
)

__all__ = ["CorruptionMode", "GenConfig", "Scene", "UnsupportedCorruption"]


class CorruptionMode(str, Enum):
    """Targeted defects for negative-control clips."""

    WRONG_DIGIT = "wrong_digit"
    WRONG_LETTER = "wrong_letter"
    WALL_CROSS = "wall_cross"
    WRONG_ELIMINATION_ORDER = "wrong_elimination_order"
    SHUFFLED_BARS = "shuffled_bars"
    WRONG_COUNT = "wrong_count"
    OFF_TARGET_REGION = "off_target_region"
    STATIC_VIDEO = "static_video"


class UnsupportedCorruption(ValueError):
    """The corruption mode does not apply to the sample's task."""


@dataclass(frozen=True)
class GenConfig:
    """Generation knobs shared by all tasks.

    The canvas may be square (default 720x720) or wide; layouts key off the
    largest centered square, so wide canvases simply gain margins.
    """

    canvas: tuple[int, int] = (720, 720)
    fps: float = 8.0
    min_frames: int = 16

    def __post_init__(self) -> None:
        w, h = self.canvas
        if w < 256 or h < 256:
            raise ValueError(f"canvas must be at least 256x256, got {w}x{h}")
        if self.min_frames < 2:
            raise ValueError("min_frames must be >= 2")


class Scene:
    """Base class: deterministic build + frame assembly helpers."""

    task: ClassVar[Task]
    corruptions: ClassVar[tuple[CorruptionMode, ...]] = ()

    def __init__(self, difficulty: Difficulty, seed: int, cfg: GenConfig) -> None:
        self.difficulty = difficulty
        self.seed = int(seed)
        self.cfg = cfg
        self.width, self.height = cfg.canvas
        # largest centered square drives all layout
        self.square = min(self.width, self.height)
        self.ox = (self.width - self.square) // 2
        self.oy = (self.height - self.square) // 2
        self._build(self._rng("build"))

    # -- subclass hooks ----------------------------------------------------

    def _build(self, rng: np.random.Generator) -> None:
        raise NotImplementedError

    def initial_array(self) -> np.ndarray:
        raise NotImplementedError

    def target_array(self) -> np.ndarray:
        raise NotImplementedError

    def truth(self) -> GroundTruth:
        raise NotImplementedError

    def task_text(self) -> str:
        """One- or two-sentence definition of what the video must do."""
        raise NotImplementedError

    def gt_arrays(self) -> list[np.ndarray]:
        """Ground-truth frames; first must render the initial state and the
        last the target state through the same code paths."""
        raise NotImplementedError

    def _corrupt(self, mode: CorruptionMode, rng: np.random.Generator) -> list[np.ndarray]:
        raise UnsupportedCorruption(
            f"{mode.value} does not apply to {self.task.value}"
        )

    # -- shared helpers ----------------------------------------------------

    def _rng(self, *labels: object) -> np.random.Generator:
        return np.random.default_rng(
            derive_seed(self.seed, self.task.value, self.difficulty.value, *labels)
        )

    @property
    def dimension(self) -> Dimension:
        return DIMENSION_OF_TASK[self.task]

    def sample_id(self) -> str:
        return f"{self.task.value}_{self.difficulty.value}_{self.seed:016x}"

    def _pad(self, frames: list[np.ndarray]) -> list[np.ndarray]:
        """Repeat the final frame until the clip meets the minimum length."""
        while len(frames) < self.cfg.min_frames:
            frames.append(frames[-1].copy())
        return frames

    def _clip(self, arrays: list[np.ndarray]) -> VideoClip:
        return VideoClip(
            frames=tuple(Frame(a) for a in arrays), fps=self.cfg.fps
        )

    def gt_video(self) -> VideoClip:
        frames = self.gt_arrays()
        initial = self.initial_array()
        target = self.target_array()
        # first/last frame equality is structural; fail loudly if a renderer
        # drifts out of sync with the state builders
        if not np.array_equal(frames[0], initial):
            raise AssertionError(
                f"{self.task.value}: first GT frame differs from initial state"
            )
        if not np.array_equal(frames[-1], target):
            raise AssertionError(
                f"{self.task.value}: last GT frame differs from target state"
            )
        if len(frames) < self.cfg.min_frames:
            raise AssertionError(
                f"{self.task.value}: GT clip shorter than {self.cfg.min_frames}"
            )
        return self._clip(frames)

    def corrupt_video(self, mode: CorruptionMode, seed: int) -> VideoClip:
        rng = np.random.default_rng(
            derive_seed(seed, "corrupt", self.task.value, mode.value)
        )
        if mode is CorruptionMode.STATIC_VIDEO:
            first = self.initial_array()
            frames = [first.copy() for _ in range(self.cfg.min_frames)]
            return self._clip(frames)
        if mode not in self.corruptions:
            raise UnsupportedCorruption(
                f"{mode.value} does not apply to {self.task.value}"
            )
        frames = self._corrupt(mode, rng)
        return self._clip(self._pad(frames))

    def sample(self, prompt: str) -> TaskSample:
        return TaskSample(
            id=self.sample_id(),
            dimension=self.dimension,
            task=self.task,
            difficulty=self.difficulty,
            initial=Frame(self.initial_array()),
            target=Frame(self.target_array()),
            prompt=prompt,
            truth=self.truth(),
            seed=self.seed,
        )
