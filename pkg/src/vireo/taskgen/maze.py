"""Maze task: a blue token walks the unique corridor path to the red goal.

The maze lives on a (2n+1)-cell grid where odd/odd cells are rooms, cells
between two rooms are corridor slots, and even/even cells are permanent wall
pillars.  Carving uses a depth-first backtracker, so the room graph is a tree
and the start-to-goal path is unique.
"""

from __future__ import annotations

import numpy as np

from ..core import Difficulty, MazeTruth, Task
from ..draw import BLACK, color_rgb, fill_disk, fill_rect, new_canvas
from ._scene import CorruptionMode, Scene

_ROOMS = {Difficulty.EASY: 5, Difficulty.MEDIUM: 7, Difficulty.HARD: 9}

GOAL_COLOR = "red"
AGENT_COLOR = "blue"


def _carve(rooms: int, rng: np.random.Generator) -> np.ndarray:
    """Boolean grid of side 2*rooms+1; True marks free cells."""
    g = 2 * rooms + 1
    free = np.zeros((g, g), dtype=bool)
    free[1::2, 1::2] = True
    visited = np.zeros((rooms, rooms), dtype=bool)
    stack = [(0, 0)]
    visited[0, 0] = True
    while stack:
        r, c = stack[-1]
        options = []
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = r + dr, c + dc
            if 0 <= nr < rooms and 0 <= nc < rooms and not visited[nr, nc]:
                options.append((nr, nc))
        if not options:
            stack.pop()
            continue
        nr, nc = options[rng.integers(len(options))]
        # open the corridor slot between the two rooms
        free[r + nr + 1, c + nc + 1] = True
        visited[nr, nc] = True
        stack.append((nr, nc))
    return free


def _grid_path(
    free: np.ndarray, start: tuple[int, int], goal: tuple[int, int]
) -> list[tuple[int, int]]:
    """Breadth-first path over free cells, inclusive of both endpoints."""
    g = free.shape[0]
    prev: dict[tuple[int, int], tuple[int, int]] = {}
    seen = {start}
    queue = [start]
    while queue:
        cell = queue.pop(0)
        if cell == goal:
            break
        r, c = cell
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nxt = (r + dr, c + dc)
            if (
                0 <= nxt[0] < g
                and 0 <= nxt[1] < g
                and free[nxt]
                and nxt not in seen
            ):
                seen.add(nxt)
                prev[nxt] = cell
                queue.append(nxt)
    if goal not in seen:
        raise AssertionError("carved maze must connect start and goal")
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    path.reverse()
    return path


class MazeScene(Scene):
    task = Task.MAZE_SOLVING
    corruptions = (CorruptionMode.WALL_CROSS,)

    def _build(self, rng: np.random.Generator) -> None:
        rooms = _ROOMS[self.difficulty]
        self.free = _carve(rooms, rng)
        g = self.free.shape[0]
        self.start = (1, 1)
        self.goal = (g - 2, g - 2)
        self.cell_px = (self.square - 2 * (self.square // 12)) // g
        side_px = g * self.cell_px
        self.origin = (
            (self.width - side_px) // 2,
            (self.height - side_px) // 2,
        )
        self.path = _grid_path(self.free, self.start, self.goal)
        self._base = self._render_base()

    # -- rendering ---------------------------------------------------------

    def _cell_rect(self, cell: tuple[int, int]) -> tuple[int, int, int, int]:
        r, c = cell
        return (
            self.origin[0] + c * self.cell_px,
            self.origin[1] + r * self.cell_px,
            self.cell_px,
            self.cell_px,
        )

    def _cell_center(self, cell: tuple[int, int]) -> tuple[float, float]:
        x, y, w, h = self._cell_rect(cell)
        return (x + w / 2.0, y + h / 2.0)

    def _render_base(self) -> np.ndarray:
        canvas = new_canvas(self.width, self.height)
        g = self.free.shape[0]
        for r in range(g):
            for c in range(g):
                if not self.free[r, c]:
                    fill_rect(canvas, *self._cell_rect((r, c)), BLACK)
        fill_rect(canvas, *self._cell_rect(self.goal), color_rgb(GOAL_COLOR))
        return canvas

    def _render(self, agent: tuple[int, int]) -> np.ndarray:
        canvas = self._base.copy()
        cx, cy = self._cell_center(agent)
        fill_disk(canvas, cx, cy, self.cell_px * 0.33, color_rgb(AGENT_COLOR))
        return canvas

    # -- scene interface -----------------------------------------------------

    def initial_array(self) -> np.ndarray:
        return self._render(self.start)

    def target_array(self) -> np.ndarray:
        return self._render(self.goal)

    def truth(self) -> MazeTruth:
        return MazeTruth(
            grid=tuple(tuple(bool(v) for v in row) for row in self.free),
            start=self.start,
            goal=self.goal,
            origin=self.origin,
            cell_px=self.cell_px,
        )

    def task_text(self) -> str:
        return (
            f"A {AGENT_COLOR} circle token starts in the top-left corner of the "
            "maze and glides through the white corridors one cell at a time, "
            "never crossing the black walls, until it comes to rest on the "
            f"{GOAL_COLOR} goal square in the bottom-right corner."
        )

    def gt_arrays(self) -> list[np.ndarray]:
        frames = [self._render(cell) for cell in self.path]
        return self._pad(frames)

    def _corrupt(
        self, mode: CorruptionMode, rng: np.random.Generator
    ) -> list[np.ndarray]:
        # straight dash from start to goal: the segment pierces wall pillars,
        # so intermediate detections land in non-free cells
        n = len(self.path)
        x0, y0 = self._cell_center(self.start)
        x1, y1 = self._cell_center(self.goal)
        frames = []
        for i in range(n):
            t = i / (n - 1)
            x = x0 + (x1 - x0) * t
            y = y0 + (y1 - y0) * t
            canvas = self._base.copy()
            fill_disk(canvas, x, y, self.cell_px * 0.33, color_rgb(AGENT_COLOR))
            frames.append(canvas)
        return frames
