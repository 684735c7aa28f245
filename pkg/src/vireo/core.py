"""Core domain types and persistence for the vireo benchmark.

Everything downstream (generation, verification, evaluation) speaks in the
types defined here: frames, clips, task samples with typed ground truths,
verdicts, and the on-disk dataset layout (PNG frames + manifest.json).
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import struct
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np
from PIL import Image

SCHEMA_VERSION = 1

__all__ = [
    "SCHEMA_VERSION",
    "VireoError",
    "ConfigError",
    "DatasetError",
    "MetricError",
    "Dimension",
    "Task",
    "Difficulty",
    "DIMENSION_OF_TASK",
    "TASKS_OF_DIMENSION",
    "BBox",
    "Frame",
    "VideoClip",
    "SudokuGrid",
    "ExprResult",
    "ChoiceLetter",
    "DigitSequence",
    "BarOrder",
    "TargetRegion",
    "ObjectRef",
    "ObjectSet",
    "MazeTruth",
    "ElimItem",
    "EliminationOrder",
    "QAItem",
    "QASet",
    "PixelTarget",
    "GroundTruth",
    "truth_to_json",
    "truth_from_json",
    "TaskSample",
    "SampleMeta",
    "Verdict",
    "write_verdicts",
    "read_verdicts",
    "Dataset",
    "load_dataset",
    "save_dataset",
    "save_frame_png",
    "load_frame_png",
    "frame_to_png_bytes",
    "frame_from_png_bytes",
    "save_clip",
    "load_clip",
    "derive_seed",
]


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------

class VireoError(Exception):
    """Base class for all vireo-specific errors."""


class ConfigError(VireoError):
    """Bad configuration: unknown keys, missing credentials, invalid values."""


class DatasetError(VireoError):
    """Dataset on disk is missing files or violates the manifest schema."""


class MetricError(VireoError):
    """A metric could not be computed (infrastructure failure, not a fail)."""


# ---------------------------------------------------------------------------
# enums
# ---------------------------------------------------------------------------

class Dimension(str, Enum):
    STRUCTURAL = "structural"
    SPATIAL_PATTERN = "spatial_pattern"
    SYMBOLIC_LOGICAL = "symbolic_logical"
    PLANNING_EXECUTION = "planning_execution"


class Task(str, Enum):
    # structured search / stepwise state-space tasks
    GRAPH_TRAVERSAL = "graph_traversal"
    MAZE_SOLVING = "maze_solving"
    SORTING_NUMBERS = "sorting_numbers"
    TEMPORAL_ORDERING = "temporal_ordering"
    RULE_EXTRAPOLATION = "rule_extrapolation"
    GAME_MOVE = "game_move"
    # spatial / visual-pattern tasks
    SHAPE_FITTING = "shape_fitting"
    CONNECTING_COLORS = "connecting_colors"
    PATTERN_RECOGNITION = "pattern_recognition"
    ODD_ONE_OUT = "odd_one_out"
    COUNTING_OBJECTS = "counting_objects"
    VISUAL_ANALOGY = "visual_analogy"
    # symbolic / logical tasks
    SUDOKU_COMPLETION = "sudoku_completion"
    ARITHMETIC_OPERATIONS = "arithmetic_operations"
    SYMBOLIC_REASONING = "symbolic_reasoning"
    VISUAL_DEDUCTION = "visual_deduction"
    TRANSITIVE_REASONING = "transitive_reasoning"
    GAME_RULE = "game_rule"
    # planning / execution tasks
    TOOL_USE = "tool_use"
    ROBOT_NAVIGATION = "robot_navigation"
    GOAL_DIRECTED_PLANNING = "goal_directed_planning"
    MULTI_STEP_MANIPULATION = "multi_step_manipulation"
    INSTRUCTION_FOLLOWING = "instruction_following"
    GAME_STRATEGY = "game_strategy"


class Difficulty(str, Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"


TASKS_OF_DIMENSION: dict[Dimension, tuple[Task, ...]] = {
    Dimension.STRUCTURAL: (
        Task.GRAPH_TRAVERSAL,
        Task.MAZE_SOLVING,
        Task.SORTING_NUMBERS,
        Task.TEMPORAL_ORDERING,
        Task.RULE_EXTRAPOLATION,
        Task.GAME_MOVE,
    ),
    Dimension.SPATIAL_PATTERN: (
        Task.SHAPE_FITTING,
        Task.CONNECTING_COLORS,
        Task.PATTERN_RECOGNITION,
        Task.ODD_ONE_OUT,
        Task.COUNTING_OBJECTS,
        Task.VISUAL_ANALOGY,
    ),
    Dimension.SYMBOLIC_LOGICAL: (
        Task.SUDOKU_COMPLETION,
        Task.ARITHMETIC_OPERATIONS,
        Task.SYMBOLIC_REASONING,
        Task.VISUAL_DEDUCTION,
        Task.TRANSITIVE_REASONING,
        Task.GAME_RULE,
    ),
    Dimension.PLANNING_EXECUTION: (
        Task.TOOL_USE,
        Task.ROBOT_NAVIGATION,
        Task.GOAL_DIRECTED_PLANNING,
        Task.MULTI_STEP_MANIPULATION,
        Task.INSTRUCTION_FOLLOWING,
        Task.GAME_STRATEGY,
    ),
}

DIMENSION_OF_TASK: dict[Task, Dimension] = {
    task: dim for dim, tasks in TASKS_OF_DIMENSION.items() for task in tasks
}


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in pixel coordinates: top-left corner plus size."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"BBox needs positive size, got {self.w}x{self.h}")

    @property
    def x2(self) -> int:
        return self.x + self.w

    @property
    def y2(self) -> int:
        return self.y + self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    def contains_point(self, x: float, y: float) -> bool:
        return self.x <= x < self.x2 and self.y <= y < self.y2

    def to_json(self) -> list[int]:
        return [self.x, self.y, self.w, self.h]

    @classmethod
    def from_json(cls, data: Sequence[int]) -> "BBox":
        x, y, w, h = (int(v) for v in data)
        return cls(x, y, w, h)


# ---------------------------------------------------------------------------
# frames and clips
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Frame:
    """An immutable RGB image (uint8, shape H x W x 3)."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.dtype != np.uint8:
            raise ValueError(f"Frame pixels must be uint8, got {px.dtype}")
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"Frame pixels must be HxWx3, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("Frame must be at least 1x1")
        px = np.ascontiguousarray(px)
        if px.flags.writeable:
            px = px.copy()
            px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def size(self) -> tuple[int, int]:
        """(width, height)."""
        return (self.width, self.height)

    def digest(self) -> str:
        """sha256 over dimensions + raw pixel bytes; stable content key."""
        h = hashlib.sha256()
        h.update(struct.pack("<II", self.width, self.height))
        h.update(self.pixels.tobytes())
        return h.hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return (
            self.pixels.shape == other.pixels.shape
            and np.array_equal(self.pixels, other.pixels)
        )

    def __repr__(self) -> str:  # keep reprs short; frames are big
        return f"Frame({self.width}x{self.height}, {self.digest()[:8]})"


@dataclass(frozen=True, eq=False)
class VideoClip:
    """An ordered sequence of equally sized frames with a nominal fps."""

    frames: tuple[Frame, ...]
    fps: float = 8.0

    def __post_init__(self) -> None:
        frames = tuple(self.frames)
        if not frames:
            raise ValueError("VideoClip needs at least one frame")
        w, h = frames[0].size
        for i, f in enumerate(frames):
            if f.size != (w, h):
                raise ValueError(
                    f"frame {i} is {f.size}, expected {(w, h)}; clips are uniform"
                )
        if not (self.fps > 0):
            raise ValueError(f"fps must be positive, got {self.fps}")
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def size(self) -> tuple[int, int]:
        return self.frames[0].size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VideoClip):
            return NotImplemented
        return (
            self.fps == other.fps
            and len(self.frames) == len(other.frames)
            and all(a == b for a, b in zip(self.frames, other.frames))
        )

    def __repr__(self) -> str:
        w, h = self.size
        return f"VideoClip({len(self.frames)} frames, {w}x{h}, {self.fps} fps)"


# ---------------------------------------------------------------------------
# ground truths (tagged union, JSON discriminated by "kind")
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SudokuGrid:
    """Completed grid plus the givens (0 marks a cell blank in the initial)."""

    solution: tuple[tuple[int, ...], ...]
    givens: tuple[tuple[int, ...], ...]

    kind = "sudoku_grid"

    def __post_init__(self) -> None:
        sol = tuple(tuple(int(v) for v in row) for row in self.solution)
        giv = tuple(tuple(int(v) for v in row) for row in self.givens)
        n = len(sol)
        if n == 0 or any(len(r) != n for r in sol):
            raise ValueError("solution must be a square matrix")
        if len(giv) != n or any(len(r) != n for r in giv):
            raise ValueError("givens must match solution shape")
        for r in range(n):
            for c in range(n):
                if not (1 <= sol[r][c] <= n):
                    raise ValueError(f"solution[{r}][{c}]={sol[r][c]} out of 1..{n}")
                if giv[r][c] not in (0, sol[r][c]):
                    raise ValueError("givens must be 0 or agree with solution")
        object.__setattr__(self, "solution", sol)
        object.__setattr__(self, "givens", giv)

    @property
    def side(self) -> int:
        return len(self.solution)

    def payload(self) -> dict[str, Any]:
        return {
            "solution": [list(r) for r in self.solution],
            "givens": [list(r) for r in self.givens],
        }

    @classmethod
    def from_payload(cls, data: Mapping[str, Any]) -> "SudokuGrid":
        return cls(
            solution=tuple(tuple(r) for r in data["solution"]),
            givens=tuple(tuple(r) for r in data["givens"]),
        )


@dataclass(frozen=True)
class ExprResult:
    """Arithmetic problem: left-hand expression text and its exact value."""

    text: str
    value: Fraction

    kind = "expr_result"

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("expression text must be non-empty")
        object.__setattr__(self, "value", Fraction(self.value))

    def payload(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "numerator": self.value.numerator,
            "denominator": self.value.denominator,
        }

    @classmethod
    def from_payload(cls, data: Mapping[str, Any]) -> "ExprResult":
        return cls(
            text=data["text"],
            value=Fraction(int(data["numerator"]), int(data["denominator"])),
        )


@dataclass(frozen=True)
class ChoiceLetter:
    """Correct option letter of a multiple-choice panel."""

    letter: str

    kind = "choice_letter"

    def __post_init__(self) -> None:
        if self.letter not in ("A", "B", "C", "D"):
            raise ValueError(f"letter must be one of A-D, got {self.letter!r}")

    def payload(self) -> dict[str, Any]:
        return {"letter": self.letter}

    @classmethod
    def from_payload(cls, data: Mapping[str, Any]) -> "ChoiceLetter":
        return cls(letter=data["letter"])


@dataclass(frozen=True)
class DigitSequence:
    """Expected digits of the completed sequence, left to right."""

    digits: tuple[int, ...]

    kind = "digit_sequence"

    def __post_init__(self) -> None:
        digs = tuple(int(d) for d in self.digits)
        if not digs:
            raise ValueError("digit sequence must be non-empty")
        if any(not (0 <= d <= 9) for d in digs):
            raise ValueError("digits must be 0..9")
        object.__setattr__(self, "digits", digs)

    def payload(self) -> dict[str, Any]:
        return {"digits": list(self.digits)}

    @classmethod
    def from_payload(cls, data: Mapping[str, Any]) -> "DigitSequence":
        return cls(digits=tuple(data["digits"]))


@dataclass(frozen=True)
class BarOrder:
    """Expected left-to-right height ranks of the target bars.

    ranks[i] is the rank of bar i when bars are sorted ascending by
    (height, x); a correctly sorted arrangement is (0, 1, ..., n-1).
    """

    ranks: tuple[int, ...]
    count: int

    kind = "bar_order"

    def __post_init__(self) -> None:
        ranks = tuple(int(r) for r in self.ranks)
        if len(ranks) != self.count or self.count < 1:
            raise ValueError("ranks length must equal count >= 1")
        if sorted(ranks) != list(range(self.count)):
            raise ValueError("ranks must be a permutation of 0..count-1")
        object.__setattr__(self, "ranks", ranks)

    def payload(self) -> dict[str, Any]:
        return {"ranks": list(self.ranks), "count": self.count}

    @classmethod
    def from_payload(cls, data: Mapping[str, Any]) -> "BarOrder":
        return cls(ranks=tuple(data["ranks"]), count=int(data["count"]))


@dataclass(frozen=True)
class TargetRegion:
    """A region of the target frame plus its reference embedding."""

    bbox: BBox
    embedding: tuple[float, ...]

    kind = "target_region"

    def __post_init__(self) -> None:
        emb = tuple(float(v) for v in self.embedding)
        if not emb:
            raise ValueError("embedding must be non-empty")
        object.__setattr__(self, "embedding", emb)

    def payload(self) -> dict[str, Any]:
        return {"bbox": self.bbox.to_json(), "embedding": list(self.embedding)}

    @classmethod
    def from_payload(cls, data: Mapping[str, Any]) -> "TargetRegion":
        return cls(
            bbox=BBox.from_json(data["bbox"]),
            embedding=tuple(data["embedding"]),
        )


@dataclass(frozen=True)
class ObjectRef:
    label: str
    bbox: BBox

    def to_json(self) -> dict[str, Any]:
        return {"label": self.label, "bbox": self.bbox.to_json()}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ObjectRef":
        return cls(label=data["label"], bbox=BBox.from_json(data["bbox"]))


@dataclass(frozen=True)
class ObjectSet:
    """Labelled objects expected in the target frame.

    For odd-one-out style tasks the first entry is the odd object.
    """

    objects: tuple[ObjectRef, ...]

    kind = "object_set"

    def __post_init__(self) -> None:
        object.__setattr__(self, "objects", tuple(self.objects))

    def counts_by_label(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for obj in self.objects:
            counts[obj.label] = counts.get(obj.label, 0) + 1
        return counts

    def payload(self) -> dict[str, Any]:
        return {"objects": [o.to_json() for o in self.objects]}

    @classmethod
    def from_payload(cls, data: Mapping[str, Any]) -> "ObjectSet":
        return cls(objects=tuple(ObjectRef.from_json(o) for o in data["objects"]))


@dataclass(frozen=True)
class MazeTruth:
    """Maze wall grid plus start/goal cells and the pixel geometry.

    ``grid[r][c]`` is True for free cells, False for walls (odd indices are
    rooms, even indices are wall slots).  ``origin`` and ``cell_px`` map grid
    cells onto canvas pixels: cell (r, c) covers
    ``origin + (c*cell_px, r*cell_px)`` to ``origin + ((c+1)*cell_px, ...)``.
    """

    grid: tuple[tuple[bool, ...], ...]
    start: tuple[int, int]
    goal: tuple[int, int]
    origin: tuple[int, int]
    cell_px: int

    kind = "maze_truth"

    def __post_init__(self) -> None:
        grid = tuple(tuple(bool(v) for v in row) for row in self.grid)
        rows = len(grid)
        if rows == 0 or any(len(r) != len(grid[0]) for r in grid):
            raise ValueError("maze grid must be rectangular and non-empty")
        for name, (r, c) in (("start", self.start), ("goal", self.goal)):
            if not (0 <= r < rows and 0 <= c < len(grid[0])):
                raise ValueError(f"{name} cell {r},{c} outside grid")
            if not grid[r][c]:
                raise ValueError(f"{name} cell {r},{c} is a wall")
        if self.cell_px < 1:
            raise ValueError("cell_px must be >= 1")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "start", (int(self.start[0]), int(self.start[1])))
        object.__setattr__(self, "goal", (int(self.goal[0]), int(self.goal[1])))
        object.__setattr__(self, "origin", (int(self.origin[0]), int(self.origin[1])))

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.grid), len(self.grid[0]))

    def cell_of_point(self, x: float, y: float) -> tuple[int, int] | None:
        """Grid cell containing pixel (x, y), or None when outside the maze."""
        col = int((x - self.origin[0]) // self.cell_px)
        row = int((y - self.origin[1]) // self.cell_px)
        rows, cols = self.shape
        if 0 <= row < rows and 0 <= col < cols:
            return (row, col)
        return None

    def payload(self) -> dict[str, Any]:
        return {
            "grid": [[1 if v else 0 for v in row] for row in self.grid],
            "start": list(self.start),
            "goal": list(self.goal),
            "origin": list(self.origin),
            "cell_px": self.cell_px,
        }

    @classmethod
    def from_payload(cls, data: Mapping[str, Any]) -> "MazeTruth":
        return cls(
            grid=tuple(tuple(bool(v) for v in row) for row in data["grid"]),
            start=tuple(data["start"]),
            goal=tuple(data["goal"]),
            origin=tuple(data["origin"]),
            cell_px=int(data["cell_px"]),
        )


@dataclass(frozen=True)
class ElimItem:
    label: str
    color: str

    def to_json(self) -> dict[str, str]:
        return {"label": self.label, "color": self.color}

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> "ElimItem":
        return cls(label=data["label"], color=data["color"])


@dataclass(frozen=True)
class EliminationOrder:
    """Objects in the order they must disappear."""

    items: tuple[ElimItem, ...]

    kind = "elimination_order"

    def __post_init__(self) -> None:
        items = tuple(self.items)
        if len(items) < 2:
            raise ValueError("elimination needs at least two objects")
        labels = [it.label for it in items]
        if len(set(labels)) != len(labels):
            raise ValueError("elimination labels must be distinct")
        object.__setattr__(self, "items", items)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(it.label for it in self.items)

    def payload(self) -> dict[str, Any]:
        return {"items": [it.to_json() for it in self.items]}

    @classmethod
    def from_payload(cls, data: Mapping[str, Any]) -> "EliminationOrder":
        return cls(items=tuple(ElimItem.from_json(it) for it in data["items"]))


@dataclass(frozen=True)
class QAItem:
    question: str
    answer: bool

    def to_json(self) -> dict[str, Any]:
        return {"question": self.question, "answer": self.answer}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "QAItem":
        return cls(question=data["question"], answer=bool(data["answer"]))


@dataclass(frozen=True)
class QASet:
    """Two or three binary questions a judge answers about the clip."""

    items: tuple[QAItem, ...]

    kind = "qa_set"

    def __post_init__(self) -> None:
        items = tuple(self.items)
        if not (2 <= len(items) <= 3):
            raise ValueError("QASet holds two or three questions")
        object.__setattr__(self, "items", items)

    def payload(self) -> dict[str, Any]:
        return {"items": [it.to_json() for it in self.items]}

    @classmethod
    def from_payload(cls, data: Mapping[str, Any]) -> "QASet":
        return cls(items=tuple(QAItem.from_json(it) for it in data["items"]))


@dataclass(frozen=True)
class PixelTarget:
    """Reference final frame compared structurally against the model output."""

    frame: Frame

    kind = "pixel_target"

    def payload(self) -> dict[str, Any]:
        return {"png": _b64_png(self.frame)}

    @classmethod
    def from_payload(cls, data: Mapping[str, Any]) -> "PixelTarget":
        return cls(frame=_frame_from_b64_png(data["png"]))


GroundTruth = (
    SudokuGrid
    | ExprResult
    | ChoiceLetter
    | DigitSequence
    | BarOrder
    | TargetRegion
    | ObjectSet
    | MazeTruth
    | EliminationOrder
    | QASet
    | PixelTarget
)

_TRUTH_CLASSES: dict[str, type] = {
    cls.kind: cls
    for cls in (
        SudokuGrid,
        ExprResult,
        ChoiceLetter,
        DigitSequence,
        BarOrder,
        TargetRegion,
        ObjectSet,
        MazeTruth,
        EliminationOrder,
        QASet,
        PixelTarget,
    )
}


def truth_to_json(truth: GroundTruth) -> dict[str, Any]:
    data = {"kind": truth.kind}
    data.update(truth.payload())
    return data


def truth_from_json(data: Mapping[str, Any]) -> GroundTruth:
    kind = data.get("kind")
    cls = _TRUTH_CLASSES.get(kind)
    if cls is None:
        raise DatasetError(f"unknown ground-truth kind {kind!r}")
    return cls.from_payload(data)


# Which truth kinds a task may carry.  The ten generated tasks are exact;
# the remaining scenarios accept any truth the generic verifiers understand.
_GENERIC_KINDS = frozenset(
    {"target_region", "object_set", "qa_set", "pixel_target"}
)

ALLOWED_TRUTH_KINDS: dict[Task, frozenset[str]] = {
    Task.MAZE_SOLVING: frozenset({"maze_truth"}),
    Task.SUDOKU_COMPLETION: frozenset({"sudoku_grid"}),
    Task.SORTING_NUMBERS: frozenset({"bar_order"}),
    Task.ARITHMETIC_OPERATIONS: frozenset({"expr_result"}),
    Task.COUNTING_OBJECTS: frozenset({"object_set"}),
    Task.VISUAL_DEDUCTION: frozenset({"choice_letter"}),
    Task.RULE_EXTRAPOLATION: frozenset({"digit_sequence"}),
    Task.GAME_MOVE: frozenset({"pixel_target"}),
    Task.TEMPORAL_ORDERING: frozenset({"elimination_order"}),
    Task.GRAPH_TRAVERSAL: frozenset({"object_set"}),
}
for _task in Task:
    ALLOWED_TRUTH_KINDS.setdefault(_task, _GENERIC_KINDS)


# ---------------------------------------------------------------------------
# samples and verdicts
# ---------------------------------------------------------------------------

_MAX_SEED = 2**64


@dataclass(frozen=True)
class TaskSample:
    """One benchmark item: frames, prompt, and a typed ground truth."""

    id: str
    dimension: Dimension
    task: Task
    difficulty: Difficulty
    initial: Frame
    target: Frame
    prompt: str
    truth: GroundTruth
    seed: int

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("sample id must be non-empty")
        if DIMENSION_OF_TASK[self.task] != self.dimension:
            raise ValueError(
                f"task {self.task.value} belongs to "
                f"{DIMENSION_OF_TASK[self.task].value}, not {self.dimension.value}"
            )
        if not self.prompt.strip():
            raise ValueError("prompt must be non-empty")
        if not (0 <= self.seed < _MAX_SEED):
            raise ValueError("seed must fit in 64 bits")
        allowed = ALLOWED_TRUTH_KINDS[self.task]
        if self.truth.kind not in allowed:
            raise ValueError(
                f"truth kind {self.truth.kind!r} not valid for task "
                f"{self.task.value!r} (allowed: {sorted(allowed)})"
            )

    @property
    def meta(self) -> "SampleMeta":
        return SampleMeta(self.id, self.dimension, self.task, self.difficulty)


@dataclass(frozen=True)
class SampleMeta:
    """Grouping labels of a sample; enough for report aggregation."""

    id: str
    dimension: Dimension
    task: Task
    difficulty: Difficulty


@dataclass(frozen=True)
class Verdict:
    """Outcome of verifying one generated clip against one sample.

    ``error`` marks a metric error (infrastructure failure): the clip was
    neither passed nor failed and is excluded from Pass@k denominators.
    """

    sample_id: str
    generation_index: int
    passed: bool
    metric: str
    evidence: Mapping[str, Any] = field(default_factory=dict)
    error: str | None = None

    def __post_init__(self) -> None:
        if self.generation_index < 0:
            raise ValueError("generation_index must be >= 0")
        if self.error is not None and self.passed:
            raise ValueError("a metric-error verdict cannot be a pass")
        object.__setattr__(self, "evidence", dict(self.evidence))

    @property
    def is_error(self) -> bool:
        return self.error is not None

    def to_json_dict(self) -> dict[str, Any]:
        # Stable field order; JSONL lines must be byte-reproducible.
        return {
            "sample_id": self.sample_id,
            "generation_index": self.generation_index,
            "metric": self.metric,
            "pass": self.passed,
            "error": self.error,
            "evidence": _plain(self.evidence),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> "Verdict":
        return cls(
            sample_id=data["sample_id"],
            generation_index=int(data["generation_index"]),
            passed=bool(data["pass"]),
            metric=data["metric"],
            evidence=data.get("evidence", {}),
            error=data.get("error"),
        )


def _plain(value: Any) -> Any:
    """Recursively convert numpy scalars/arrays so json.dumps stays happy."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def write_verdicts(verdicts: Iterable[Verdict], path: str | Path) -> None:
    """Write verdicts as JSONL, one object per line, stable field order."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for v in verdicts:
            fh.write(json.dumps(v.to_json_dict(), separators=(",", ":")))
            fh.write("\n")


def read_verdicts(path: str | Path) -> list[Verdict]:
    path = Path(path)
    out: list[Verdict] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(Verdict.from_json_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise DatasetError(f"{path}:{lineno}: bad verdict line: {exc}")
    return out


# ---------------------------------------------------------------------------
# PNG / clip persistence
# ---------------------------------------------------------------------------

def frame_to_png_bytes(frame: Frame) -> bytes:
    img = Image.fromarray(np.asarray(frame.pixels), mode="RGB")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def frame_from_png_bytes(data: bytes) -> Frame:
    img = Image.open(io.BytesIO(data))
    return Frame(np.asarray(img.convert("RGB"), dtype=np.uint8))


def _b64_png(frame: Frame) -> str:
    import base64

    return base64.b64encode(frame_to_png_bytes(frame)).decode("ascii")


def _frame_from_b64_png(data: str) -> Frame:
    import base64

    return frame_from_png_bytes(base64.b64decode(data))


def save_frame_png(frame: Frame, path: str | Path) -> None:
    Path(path).write_bytes(frame_to_png_bytes(frame))


def load_frame_png(path: str | Path) -> Frame:
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"missing frame file {path}")
    return frame_from_png_bytes(path.read_bytes())


def save_clip(clip: VideoClip, directory: str | Path) -> None:
    """Persist a clip as frame_%04d.png files plus a clip.json descriptor."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(clip.frames):
        save_frame_png(frame, directory / f"frame_{i:04d}.png")
    meta = {"fps": clip.fps, "frames": len(clip.frames)}
    (directory / "clip.json").write_text(
        json.dumps(meta, separators=(",", ":")), encoding="utf-8"
    )


def load_clip(directory: str | Path) -> VideoClip:
    directory = Path(directory)
    meta_path = directory / "clip.json"
    if not meta_path.is_file():
        raise DatasetError(f"missing clip descriptor {meta_path}")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    count = int(meta["frames"])
    frames = [
        load_frame_png(directory / f"frame_{i:04d}.png") for i in range(count)
    ]
    return VideoClip(frames=tuple(frames), fps=float(meta["fps"]))


# ---------------------------------------------------------------------------
# dataset manifest
# ---------------------------------------------------------------------------

@dataclass
class Dataset:
    """A loaded dataset: fully materialized samples plus GT video locations."""

    root: Path
    schema_version: int
    samples: list[TaskSample]
    gt_video_dirs: dict[str, Path]

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[TaskSample]:
        return iter(self.samples)

    def sample(self, sample_id: str) -> TaskSample:
        for s in self.samples:
            if s.id == sample_id:
                return s
        raise KeyError(sample_id)

    def gt_video(self, sample_id: str) -> VideoClip:
        return load_clip(self.gt_video_dirs[sample_id])

    def metas(self) -> list[SampleMeta]:
        return [s.meta for s in self.samples]


def save_dataset(
    root: str | Path,
    samples: Sequence[TaskSample],
    gt_videos: Mapping[str, VideoClip],
) -> Path:
    """Write manifest.json plus per-sample frame PNGs and GT video directories.

    Ground-truth clips are optional per sample; samples without one get
    ``"gt_video": null`` in the manifest and no ``gt/`` directory.

    Layout::

        root/manifest.json
        root/<sample_id>/initial.png
        root/<sample_id>/target.png
        root/<sample_id>/gt/frame_0000.png ... clip.json
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    ids = [s.id for s in samples]
    if len(set(ids)) != len(ids):
        raise DatasetError("sample ids must be unique within a dataset")
    entries = []
    for sample in samples:
        sdir = root / sample.id
        sdir.mkdir(parents=True, exist_ok=True)
        save_frame_png(sample.initial, sdir / "initial.png")
        save_frame_png(sample.target, sdir / "target.png")
        has_gt = sample.id in gt_videos
        if has_gt:
            save_clip(gt_videos[sample.id], sdir / "gt")
        entries.append(
            {
                "id": sample.id,
                "dimension": sample.dimension.value,
                "task": sample.task.value,
                "difficulty": sample.difficulty.value,
                "initial": f"{sample.id}/initial.png",
                "target": f"{sample.id}/target.png",
                "prompt": sample.prompt,
                "seed": sample.seed,
                "truth": truth_to_json(sample.truth),
                "gt_video": f"{sample.id}/gt" if has_gt else None,
            }
        )
    manifest = {"schema_version": SCHEMA_VERSION, "samples": entries}
    (root / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=False), encoding="utf-8"
    )
    return root


def load_dataset(root: str | Path) -> Dataset:
    """Load and validate a dataset; every referenced file must exist."""
    root = Path(root)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise DatasetError(f"no manifest.json under {root}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{manifest_path}: not valid JSON: {exc}")
    version = manifest.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DatasetError(
            f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})"
        )
    raw_samples = manifest.get("samples")
    if not isinstance(raw_samples, list):
        raise DatasetError("manifest must contain a list under 'samples'")

    samples: list[TaskSample] = []
    gt_dirs: dict[str, Path] = {}
    seen: set[str] = set()
    for entry in raw_samples:
        sid = entry.get("id", "<missing id>")
        try:
            if sid in seen:
                raise DatasetError("duplicate sample id")
            seen.add(sid)
            sample = TaskSample(
                id=entry["id"],
                dimension=Dimension(entry["dimension"]),
                task=Task(entry["task"]),
                difficulty=Difficulty(entry["difficulty"]),
                initial=load_frame_png(root / entry["initial"]),
                target=load_frame_png(root / entry["target"]),
                prompt=entry["prompt"],
                truth=truth_from_json(entry["truth"]),
                seed=int(entry["seed"]),
            )
            gt_dir = None
            if entry.get("gt_video") is not None:
                gt_dir = root / entry["gt_video"]
                if not (gt_dir / "clip.json").is_file():
                    raise DatasetError(f"missing ground-truth clip under {gt_dir}")
                # eagerly check all referenced frame files exist
                clip_meta = json.loads((gt_dir / "clip.json").read_text("utf-8"))
                for i in range(int(clip_meta["frames"])):
                    fpath = gt_dir / f"frame_{i:04d}.png"
                    if not fpath.is_file():
                        raise DatasetError(f"missing video frame {fpath}")
        except DatasetError:
            raise
        except (KeyError, ValueError, TypeError) as exc:
            raise DatasetError(f"sample {sid!r}: {exc}")
        samples.append(sample)
        if gt_dir is not None:
            gt_dirs[sample.id] = gt_dir
    return Dataset(
        root=root,
        schema_version=version,
        samples=samples,
        gt_video_dirs=gt_dirs,
    )


# ---------------------------------------------------------------------------
# deterministic seed derivation
# ---------------------------------------------------------------------------

def derive_seed(base: int, *parts: object) -> int:
    """Derive a child seed from a base seed and a label path.

    Hash-based stream splitting: deterministic across platforms and runs,
    and distinct labels give statistically independent child streams.
    """
    h = hashlib.sha256()
    h.update(struct.pack("<Q", base % _MAX_SEED))
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "little")
