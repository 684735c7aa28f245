"""Process-level checks: did the video do the right thing *over time*?

Final-frame verifiers cannot tell a legal maze walk from a teleport, or an
ordered elimination from a mass vanish.  This module samples frames
uniformly, grounds the moving subject in each, and judges the resulting
trajectory or presence timeline against the typed ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import (
    ConfigError,
    EliminationOrder,
    MazeTruth,
    MetricError,
    Verdict,
    VideoClip,
)
from .modelio import Grounder

__all__ = [
    "TrackConfig",
    "TrajPoint",
    "Trajectory",
    "extract_trajectory",
    "sample_indices",
    "verify_elimination",
    "verify_maze_trajectory",
]


@dataclass(frozen=True)
class TrackConfig:
    """Sampling density and tolerance for process verification."""

    n_samples: int = 16
    max_missed: int = 2
    agent_label: str = "blue circle"

    def __post_init__(self) -> None:
        if self.n_samples < 2:
            raise ConfigError("need at least 2 samples for a trajectory")
        if self.max_missed < 0:
            raise ConfigError("max_missed must be >= 0")


def sample_indices(n_total: int, n_samples: int) -> tuple[int, ...]:
    """Uniform frame indices round(i*(N-1)/(n-1)), deduplicated, increasing."""
    if n_total < 1:
        raise ValueError("cannot sample an empty clip")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if n_samples == 1:
        return (0,)
    out: list[int] = []
    for i in range(n_samples):
        idx = round(i * (n_total - 1) / (n_samples - 1))
        if not out or idx != out[-1]:
            out.append(idx)
    return tuple(out)


@dataclass(frozen=True)
class TrajPoint:
    """Where the subject was in one sampled frame (center of its box)."""

    frame_index: int
    x: float
    y: float
    detected: bool


@dataclass(frozen=True)
class Trajectory:
    points: tuple[TrajPoint, ...]

    def __post_init__(self) -> None:
        points = tuple(self.points)
        for a, b in zip(points, points[1:]):
            if b.frame_index <= a.frame_index:
                raise ValueError("trajectory frame indices must increase")
        object.__setattr__(self, "points", points)

    def detected_points(self) -> tuple[TrajPoint, ...]:
        return tuple(p for p in self.points if p.detected)


def _best_detection(dets):
    return max(
        dets, key=lambda d: (d.score, d.bbox.w * d.bbox.h, -d.bbox.x, -d.bbox.y)
    )


def extract_trajectory(
    clip: VideoClip,
    grounder: Grounder,
    label: str,
    n_samples: int = 16,
) -> Trajectory:
    """Ground ``label`` in uniformly sampled frames and record its centers.

    Frames where the grounder finds nothing become undetected points; a
    grounder exception is an infrastructure failure and raises MetricError.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples for a trajectory")
    points = []
    for idx in sample_indices(len(clip), n_samples):
        try:
            dets = grounder.ground(clip.frames[idx], label)
        except MetricError:
            raise
        except Exception as exc:
            raise MetricError(f"grounder failed on frame {idx}: {exc}") from exc
        if dets:
            best = _best_detection(dets)
            points.append(
                TrajPoint(
                    frame_index=idx,
                    x=best.bbox.x + best.bbox.w / 2.0,
                    y=best.bbox.y + best.bbox.h / 2.0,
                    detected=True,
                )
            )
        else:
            points.append(
                TrajPoint(frame_index=idx, x=math.nan, y=math.nan, detected=False)
            )
    return Trajectory(points=tuple(points))


def _max_missed_run(points: Sequence[TrajPoint]) -> int:
    worst = run = 0
    for p in points:
        run = 0 if p.detected else run + 1
        worst = max(worst, run)
    return worst


def verify_maze_trajectory(
    traj: Trajectory,
    truth: MazeTruth,
    max_missed: int = 2,
) -> Verdict:
    """Judge a maze walk: free cells only, no wall jumps, start to goal.

    Passes iff every detected point lies in a free cell, consecutive detected
    points sit in identical or 4-adjacent cells, the walk starts in the start
    cell and ends in the goal cell, and no more than ``max_missed``
    consecutive samples lost the agent.
    """
    detected = traj.detected_points()
    if len(detected) < 2:
        return Verdict(
            sample_id="",
            generation_index=0,
            passed=False,
            metric="maze_trajectory",
            evidence={"n_detected": len(detected)},
            error="fewer than 2 detected trajectory points",
        )
    cells = [truth.cell_of_point(p.x, p.y) for p in detected]
    evidence: dict = {
        "cells": [list(c) if c else None for c in cells],
        "n_detected": len(detected),
        "max_missed_run": _max_missed_run(traj.points),
    }

    def fail(reason: str, **extra) -> Verdict:
        evidence.update(extra, reason=reason)
        return Verdict(
            sample_id="",
            generation_index=0,
            passed=False,
            metric="maze_trajectory",
            evidence=evidence,
        )

    for i, cell in enumerate(cells):
        if cell is None or not truth.grid[cell[0]][cell[1]]:
            return fail(
                "point outside free cells",
                offending_index=i,
                offending_frame=detected[i].frame_index,
            )
    for i, (a, b) in enumerate(zip(cells, cells[1:])):
        if abs(a[0] - b[0]) + abs(a[1] - b[1]) > 1:
            return fail(
                "non-adjacent cell jump",
                offending_index=i + 1,
                offending_frame=detected[i + 1].frame_index,
                jump=[list(a), list(b)],
            )
    if cells[0] != truth.start:
        return fail("walk does not begin in the start cell", first_cell=list(cells[0]))
    if cells[-1] != truth.goal:
        return fail("walk does not end in the goal cell", last_cell=list(cells[-1]))
    if evidence["max_missed_run"] > max_missed:
        return fail("agent lost for too many consecutive samples")
    return Verdict(
        sample_id="",
        generation_index=0,
        passed=True,
        metric="maze_trajectory",
        evidence=evidence,
    )


def verify_elimination(
    clip: VideoClip,
    truth: EliminationOrder,
    grounder: Grounder,
    n_samples: int = 16,
) -> Verdict:
    """Judge an elimination video: everything present, vanishing in order.

    Passes iff every item is present in the first sampled frame, presence
    sets only ever shrink, items disappear in exactly the truth order (two
    items vanishing in the same sampling gap cannot be ordered and fail),
    and the final sampled frame shows nothing.
    """
    labels = [item.label for item in truth.items]
    indices = sample_indices(len(clip), n_samples)
    presence: list[set[str]] = []
    for idx in indices:
        frame = clip.frames[idx]
        seen = set()
        for label in labels:
            try:
                dets = grounder.ground(frame, label)
            except MetricError as exc:
                return Verdict(
                    sample_id="",
                    generation_index=0,
                    passed=False,
                    metric="elimination_order",
                    evidence={"frame_index": idx, "label": label},
                    error=str(exc),
                )
            except Exception as exc:
                return Verdict(
                    sample_id="",
                    generation_index=0,
                    passed=False,
                    metric="elimination_order",
                    evidence={"frame_index": idx, "label": label},
                    error=f"grounder failed: {exc}",
                )
            if dets:
                seen.add(label)
        presence.append(seen)

    last_seen = {
        label: max(
            (i for i, seen in enumerate(presence) if label in seen), default=-1
        )
        for label in labels
    }
    observed = sorted(labels, key=lambda lb: (last_seen[lb], labels.index(lb)))
    evidence: dict = {
        "expected_order": labels,
        "observed_order": observed,
        "final_presence": sorted(presence[-1]),
        "first_presence": sorted(presence[0]),
    }

    def fail(reason: str) -> Verdict:
        evidence["reason"] = reason
        return Verdict(
            sample_id="",
            generation_index=0,
            passed=False,
            metric="elimination_order",
            evidence=evidence,
        )

    if set(labels) - presence[0]:
        return fail("not every object is present at the start")
    for earlier, later in zip(presence, presence[1:]):
        if not later.issubset(earlier):
            return fail("an object reappeared after vanishing")
    vanish = [last_seen[label] for label in labels]
    if any(b <= a for a, b in zip(vanish, vanish[1:])):
        return fail("objects disappear out of order")
    if presence[-1]:
        return fail("objects remain in the final frame")
    return Verdict(
        sample_id="",
        generation_index=0,
        passed=True,
        metric="elimination_order",
        evidence=evidence,
    )
