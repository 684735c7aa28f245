"""Counting task: balls roll out of a closed container and line up in rows.

The initial frame shows only the closed container, so a static clip leaves
nothing to count; the target shows every ball parked in a well-separated
grid slot, grouped so same-colored balls sit together.
"""

from __future__ import annotations

import numpy as np

from ..core import BBox, Difficulty, ObjectRef, ObjectSet, Task
from ..draw import BLACK, DARK_GRAY, GRAY, PALETTE, color_rgb, fill_disk, fill_rect, new_canvas, outline_rect
from ._scene import CorruptionMode, Scene

_TOTALS = {
    Difficulty.EASY: (3, 5, 1),
    Difficulty.MEDIUM: (6, 9, 2),
    Difficulty.HARD: (10, 15, 3),
}
_FLY_STEPS = 3


class CountingScene(Scene):
    task = Task.COUNTING_OBJECTS
    corruptions = (CorruptionMode.WRONG_COUNT,)

    def _build(self, rng: np.random.Generator) -> None:
        lo, hi, max_labels = _TOTALS[self.difficulty]
        total = int(rng.integers(lo, hi + 1))
        n_labels = max_labels if max_labels <= 2 else int(rng.integers(2, 4))
        n_labels = min(n_labels, total)
        names = sorted(PALETTE)
        picked = rng.choice(len(names), size=n_labels, replace=False)
        self.colors = [names[int(i)] for i in picked]
        if n_labels == 1:
            counts = [total]
        else:
            cuts = np.sort(rng.choice(total - 1, size=n_labels - 1, replace=False)) + 1
            counts = np.diff([0, *cuts.tolist(), total]).tolist()
        self.counts = [int(c) for c in counts]
        self.total = total
        # per-ball color index, grouped by label
        self.ball_colors = [
            k for k, c in enumerate(self.counts) for _ in range(c)
        ]
        # slot grid near the top
        self.radius = round(self.square * 0.030)
        per_row = 8
        sx = round(self.square * 0.078)
        sy = round(self.square * 0.085)
        grid_x0 = self.ox + (self.square - sx * (per_row - 1)) // 2
        grid_y0 = self.oy + round(self.square * 0.16)
        self.slots = [
            (grid_x0 + (i % per_row) * sx, grid_y0 + (i // per_row) * sy)
            for i in range(total)
        ]
        # container geometry
        cw = round(self.square * 0.30)
        chh = round(self.square * 0.20)
        self.box_rect = (
            self.ox + (self.square - cw) // 2,
            self.oy + round(self.square * 0.92) - chh,
            cw,
            chh,
        )
        self.mouth = (
            self.box_rect[0] + cw // 2,
            self.box_rect[1],
        )

    def _render(self, n_out: int, lid_open: bool) -> np.ndarray:
        return self._render_positions(
            [(self.slots[i], self.ball_colors[i]) for i in range(n_out)], lid_open
        )

    def _render_positions(
        self,
        balls: list[tuple[tuple[float, float], int]],
        lid_open: bool,
    ) -> np.ndarray:
        canvas = new_canvas(self.width, self.height)
        bx, by, bw, bh = self.box_rect
        lid_h = max(6, round(self.square * 0.02))
        fill_rect(canvas, bx, by, bw, bh, DARK_GRAY)
        outline_rect(canvas, bx, by, bw, bh, BLACK, 3)
        if lid_open:
            # lid set down on the right of the container
            fill_rect(canvas, bx + bw + lid_h, by + bh - bw // 2, lid_h, bw // 2, GRAY)
        else:
            fill_rect(canvas, bx - 6, by - lid_h, bw + 12, lid_h, GRAY)
        for (cx, cy), color_idx in balls:
            fill_disk(canvas, cx, cy, self.radius, color_rgb(self.colors[color_idx]))
        return canvas

    def _fly_frames(self, n_balls: int) -> list[np.ndarray]:
        frames = [self._render(0, lid_open=False) for _ in range(3)]
        frames.append(self._render(0, lid_open=True))
        for i in range(n_balls):
            placed = [(self.slots[k], self.ball_colors[k]) for k in range(i)]
            x1, y1 = self.slots[i]
            x0, y0 = self.mouth
            for step in range(1, _FLY_STEPS + 1):
                t = step / _FLY_STEPS
                moving = ((x0 + (x1 - x0) * t, y0 + (y1 - y0) * t), self.ball_colors[i])
                frames.append(self._render_positions(placed + [moving], lid_open=True))
        frames.append(self._render(n_balls, lid_open=True))
        return self._pad(frames)

    # -- scene interface -----------------------------------------------------

    def initial_array(self) -> np.ndarray:
        return self._render(0, lid_open=False)

    def target_array(self) -> np.ndarray:
        return self._render(self.total, lid_open=True)

    def truth(self) -> ObjectSet:
        r = self.radius
        return ObjectSet(
            objects=tuple(
                ObjectRef(
                    label=f"{self.colors[self.ball_colors[i]]} ball",
                    bbox=BBox(self.slots[i][0] - r, self.slots[i][1] - r, 2 * r, 2 * r),
                )
                for i in range(self.total)
            )
        )

    def task_text(self) -> str:
        parts = []
        for color, count in zip(self.colors, self.counts):
            noun = "ball" if count == 1 else "balls"
            parts.append(f"{count} {color} {noun}")
        tally = " and ".join(parts) if len(parts) <= 2 else (
            ", ".join(parts[:-1]) + f" and {parts[-1]}"
        )
        return (
            f"The lid comes off the dark container and exactly {tally} roll "
            "out one at a time, parking in neat rows near the top so every "
            "ball can be counted."
        )

    def gt_arrays(self) -> list[np.ndarray]:
        return self._fly_frames(self.total)

    def _corrupt(
        self, mode: CorruptionMode, rng: np.random.Generator
    ) -> list[np.ndarray]:
        return self._fly_frames(self.total - 1)
