"""Sorting task: labelled blue bars swap places until heights ascend.

The ground-truth animation runs a selection sort, sliding the two swapped
bars past each other; each bar keeps its printed value while moving.
"""

from __future__ import annotations

import numpy as np

from ..core import BarOrder, Difficulty, Task
from ..draw import WHITE, color_rgb, draw_text, fill_rect, new_canvas, text_width
from ._scene import CorruptionMode, Scene

_N = {Difficulty.EASY: 4, Difficulty.MEDIUM: 6, Difficulty.HARD: 8}

BAR_COLOR = "blue"
_SWAP_STEPS = 4


class BarsScene(Scene):
    task = Task.SORTING_NUMBERS
    corruptions = (CorruptionMode.SHUFFLED_BARS,)

    def _build(self, rng: np.random.Generator) -> None:
        n = _N[self.difficulty]
        self.n = n
        values = rng.choice(90, size=n, replace=False) + 10
        while np.all(values[:-1] < values[1:]):
            values = rng.choice(90, size=n, replace=False) + 10
        self.values = [int(v) for v in values]
        # geometry
        margin = self.square // 9
        region = self.square - 2 * margin
        self.slot = region // n
        self.bar_w = int(self.slot * 0.64)
        self.x0 = self.ox + margin + (region - self.slot * n) // 2
        self.baseline = self.oy + round(self.square * 0.89)

    def _slot_center(self, i: int) -> float:
        return self.x0 + self.slot * i + self.slot / 2.0

    def _bar_height(self, value: int) -> int:
        return round(self.square * 0.12) + round(value * self.square * 0.0055)

    def _render(self, placed: list[tuple[float, int]]) -> np.ndarray:
        """Draw bars given (x_center, value) pairs."""
        canvas = new_canvas(self.width, self.height)
        bar_rgb = color_rgb(BAR_COLOR)
        label_h = max(10, round(self.square * 0.028))
        for cx, value in placed:
            h = self._bar_height(value)
            x = round(cx - self.bar_w / 2.0)
            fill_rect(canvas, x, self.baseline - h, self.bar_w, h, bar_rgb)
            text = str(value)
            tw = text_width(text, label_h, gap=max(2, label_h // 4))
            draw_text(
                canvas,
                text,
                round(cx - tw / 2.0),
                self.baseline - label_h - max(4, label_h // 3),
                label_h,
                WHITE,
            )
        return canvas

    def _render_order(self, values: list[int]) -> np.ndarray:
        return self._render(
            [(self._slot_center(i), v) for i, v in enumerate(values)]
        )

    # -- scene interface -----------------------------------------------------

    def initial_array(self) -> np.ndarray:
        return self._render_order(self.values)

    def target_array(self) -> np.ndarray:
        return self._render_order(sorted(self.values))

    def truth(self) -> BarOrder:
        return BarOrder(ranks=tuple(range(self.n)), count=self.n)

    def task_text(self) -> str:
        return (
            f"The {self.n} numbered {BAR_COLOR} bars trade places along the "
            "baseline until they stand in ascending order of height, the "
            "shortest bar on the left and the tallest on the right."
        )

    def gt_arrays(self) -> list[np.ndarray]:
        arrangement = self.values[:]
        frames = [self._render_order(arrangement) for _ in range(3)]
        for i in range(self.n):
            j = min(range(i, self.n), key=lambda k: arrangement[k])
            if j == i:
                continue
            for step in range(1, _SWAP_STEPS + 1):
                t = step / _SWAP_STEPS
                placed = [
                    (self._slot_center(k), v)
                    for k, v in enumerate(arrangement)
                    if k not in (i, j)
                ]
                xi, xj = self._slot_center(i), self._slot_center(j)
                placed.append((xi + (xj - xi) * t, arrangement[i]))
                placed.append((xj + (xi - xj) * t, arrangement[j]))
                frames.append(self._render(placed))
            arrangement[i], arrangement[j] = arrangement[j], arrangement[i]
            frames[-1] = self._render_order(arrangement)
        frames.append(self._render_order(sorted(self.values)))
        return self._pad(frames)

    def _corrupt(
        self, mode: CorruptionMode, rng: np.random.Generator
    ) -> list[np.ndarray]:
        wrong = self.values[:]
        while True:
            rng.shuffle(wrong)
            if any(wrong[k] > wrong[k + 1] for k in range(self.n - 1)):
                break
        frames = [self.initial_array() for _ in range(4)]
        final = self._render_order(wrong)
        frames.extend(final.copy() for _ in range(self.cfg.min_frames - 4))
        return frames
