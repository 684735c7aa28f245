"""Sudoku task: blanks of a uniquely solvable grid fill in one per frame.

Sizes are 4x4 (2x2 boxes), 6x6 (2x3 boxes) and 9x9 (3x3 boxes).  A full
solution is built by randomized backtracking; givens are then removed one at
a time, keeping only removals that leave the puzzle with a single solution.
"""

from __future__ import annotations

import numpy as np

from ..core import Difficulty, SudokuGrid, Task
from ..draw import BLACK, color_rgb, draw_text, fill_rect, new_canvas, text_width
from ._scene import CorruptionMode, Scene

_SIDE = {Difficulty.EASY: 4, Difficulty.MEDIUM: 6, Difficulty.HARD: 9}
_BOX = {4: (2, 2), 6: (2, 3), 9: (3, 3)}
_BLANKS = {4: 6, 6: 14, 9: 30}

FILL_COLOR = "blue"  # digits added during the video; givens stay black


def _box_index(r: int, c: int, box: tuple[int, int]) -> int:
    br, bc = box
    return (r // br) * br + (c // bc)


def _fill_solution(side: int, box: tuple[int, int], rng: np.random.Generator):
    grid = [[0] * side for _ in range(side)]
    rows = [set() for _ in range(side)]
    cols = [set() for _ in range(side)]
    boxes = [set() for _ in range(side)]

    def place(idx: int) -> bool:
        if idx == side * side:
            return True
        r, c = divmod(idx, side)
        b = _box_index(r, c, box)
        for v in rng.permutation(side) + 1:
            v = int(v)
            if v in rows[r] or v in cols[c] or v in boxes[b]:
                continue
            grid[r][c] = v
            rows[r].add(v)
            cols[c].add(v)
            boxes[b].add(v)
            if place(idx + 1):
                return True
            grid[r][c] = 0
            rows[r].remove(v)
            cols[c].remove(v)
            boxes[b].remove(v)
        return False

    if not place(0):
        raise AssertionError("backtracking fill cannot fail on an empty grid")
    return grid


def _count_solutions(
    grid: list[list[int]], side: int, box: tuple[int, int], limit: int = 2
) -> int:
    rows = [set() for _ in range(side)]
    cols = [set() for _ in range(side)]
    boxes = [set() for _ in range(side)]
    blanks = []
    for r in range(side):
        for c in range(side):
            v = grid[r][c]
            if v:
                rows[r].add(v)
                cols[c].add(v)
                boxes[_box_index(r, c, box)].add(v)
            else:
                blanks.append((r, c))

    count = 0

    def search(remaining: list[tuple[int, int]]) -> None:
        nonlocal count
        if count >= limit:
            return
        if not remaining:
            count += 1
            return
        # most-constrained blank first keeps the search shallow
        best_i, best_opts = 0, None
        for i, (r, c) in enumerate(remaining):
            b = _box_index(r, c, box)
            opts = [
                v
                for v in range(1, side + 1)
                if v not in rows[r] and v not in cols[c] and v not in boxes[b]
            ]
            if best_opts is None or len(opts) < len(best_opts):
                best_i, best_opts = i, opts
                if not opts:
                    return
                if len(opts) == 1:
                    break
        rest = remaining[:best_i] + remaining[best_i + 1:]
        r, c = remaining[best_i]
        b = _box_index(r, c, box)
        for v in best_opts:
            rows[r].add(v)
            cols[c].add(v)
            boxes[b].add(v)
            search(rest)
            rows[r].remove(v)
            cols[c].remove(v)
            boxes[b].remove(v)
            if count >= limit:
                return

    search(blanks)
    return count


class SudokuScene(Scene):
    task = Task.SUDOKU_COMPLETION
    corruptions = (CorruptionMode.WRONG_DIGIT,)

    def _build(self, rng: np.random.Generator) -> None:
        side = _SIDE[self.difficulty]
        box = _BOX[side]
        self.side, self.box = side, box
        self.solution = _fill_solution(side, box, rng)
        givens = [row[:] for row in self.solution]
        blanks = 0
        for idx in rng.permutation(side * side):
            if blanks == _BLANKS[side]:
                break
            r, c = divmod(int(idx), side)
            kept = givens[r][c]
            givens[r][c] = 0
            if _count_solutions(givens, side, box, limit=2) == 1:
                blanks += 1
            else:
                givens[r][c] = kept
        self.givens = givens
        self.blank_cells = [
            (r, c)
            for r in range(side)
            for c in range(side)
            if givens[r][c] == 0
        ]
        # grid geometry
        self.cell = (self.square - 2 * (self.square // 6)) // side
        grid_px = side * self.cell
        self.gx = (self.width - grid_px) // 2
        self.gy = (self.height - grid_px) // 2
        self.grid_px = grid_px

    # -- rendering ---------------------------------------------------------

    def _render(self, values: list[list[int]]) -> np.ndarray:
        canvas = new_canvas(self.width, self.height)
        side, (br, bc) = self.side, self.box
        digit_h = round(self.cell * 0.58)
        fill_rgb = color_rgb(FILL_COLOR)
        for r in range(side):
            for c in range(side):
                v = values[r][c]
                if not v:
                    continue
                text = str(v)
                tw = text_width(text, digit_h, gap=0)
                x = self.gx + c * self.cell + (self.cell - tw) // 2
                y = self.gy + r * self.cell + (self.cell - digit_h) // 2
                color = BLACK if self.givens[r][c] else fill_rgb
                draw_text(canvas, text, x, y, digit_h, color, gap=0)
        # lattice drawn after digits so lines stay crisp
        for i in range(side + 1):
            if i in (0, side):
                t = 6
            elif i % bc == 0:
                t = 4
            else:
                t = 2
            x = self.gx + i * self.cell
            fill_rect(canvas, x - t // 2, self.gy - 3, t, self.grid_px + 6, BLACK)
        for i in range(side + 1):
            if i in (0, side):
                t = 6
            elif i % br == 0:
                t = 4
            else:
                t = 2
            y = self.gy + i * self.cell
            fill_rect(canvas, self.gx - 3, y - t // 2, self.grid_px + 6, t, BLACK)
        return canvas

    def _fill_frames(self, final: list[list[int]]) -> list[np.ndarray]:
        values = [row[:] for row in self.givens]
        frames = [self._render(values)]
        for r, c in self.blank_cells:
            values[r][c] = final[r][c]
            frames.append(self._render(values))
        return self._pad(frames)

    # -- scene interface -----------------------------------------------------

    def initial_array(self) -> np.ndarray:
        return self._render(self.givens)

    def target_array(self) -> np.ndarray:
        return self._render(self.solution)

    def truth(self) -> SudokuGrid:
        return SudokuGrid(
            solution=tuple(tuple(row) for row in self.solution),
            givens=tuple(tuple(row) for row in self.givens),
        )

    def task_text(self) -> str:
        br, bc = self.box
        return (
            f"The empty cells of the {self.side}x{self.side} grid fill in one "
            f"digit at a time until every row, every column and every "
            f"{br}x{bc} box contains each digit from 1 to {self.side} exactly "
            "once."
        )

    def gt_arrays(self) -> list[np.ndarray]:
        return self._fill_frames(self.solution)

    def _corrupt(
        self, mode: CorruptionMode, rng: np.random.Generator
    ) -> list[np.ndarray]:
        r, c = self.blank_cells[rng.integers(len(self.blank_cells))]
        correct = self.solution[r][c]
        wrong = int(rng.integers(1, self.side))
        if wrong >= correct:
            wrong += 1
        final = [row[:] for row in self.solution]
        final[r][c] = wrong
        return self._fill_frames(final)
