"""Visual-deduction task: a red frame appears around the correct option.

The panel shows a row of gray shapes growing by a fixed increment with the
final slot empty, and a row of lettered option boxes below.  The target
highlights one option with a thick red ring; the ring is the only red in the
scene, so the verifier can segment it uniquely.
"""

from __future__ import annotations

import numpy as np

from ..core import ChoiceLetter, Difficulty, Task
from ..draw import (
    BLACK,
    DARK_GRAY,
    GRAY,
    LIGHT_GRAY,
    color_rgb,
    draw_text,
    fill_disk,
    fill_rect,
    new_canvas,
    outline_rect,
    text_width,
)
from ._scene import CorruptionMode, Scene

_N_OPTIONS = {Difficulty.EASY: 3, Difficulty.MEDIUM: 4, Difficulty.HARD: 4}
_LETTERS = "ABCD"

RING_COLOR = "red"


class MultichoiceScene(Scene):
    task = Task.VISUAL_DEDUCTION
    corruptions = (CorruptionMode.WRONG_LETTER,)

    def _build(self, rng: np.random.Generator) -> None:
        self.n_options = _N_OPTIONS[self.difficulty]
        self.correct = int(rng.integers(self.n_options))
        self.letter = _LETTERS[self.correct]
        self.shape_kind = int(rng.integers(2))  # 0 squares, 1 disks
        self.pattern_len = 4
        self.base_size = round(self.square * (0.035 + 0.01 * rng.integers(3)))
        self.step = round(self.square * 0.018)
        # option-box geometry
        self.box = round(self.square * 0.18)
        self.box_y = self.oy + round(self.square * 0.60)
        self.ring_pad = round(self.square * 0.024)
        self.ring_thickness = max(4, round(self.square * 0.011))
        self._base = self._render_base()

    def _option_x(self, i: int) -> int:
        cx = self.ox + round(self.square * (i + 1) / (self.n_options + 1))
        return cx - self.box // 2

    def _render_base(self) -> np.ndarray:
        canvas = new_canvas(self.width, self.height)
        # pattern row: shapes growing by a fixed step, last slot empty
        cy = self.oy + round(self.square * 0.26)
        for k in range(self.pattern_len):
            cx = self.ox + round(self.square * (k + 1) / (self.pattern_len + 1))
            size = self.base_size + self.step * k
            if k == self.pattern_len - 1:
                outline_rect(
                    canvas,
                    cx - size,
                    cy - size,
                    2 * size,
                    2 * size,
                    LIGHT_GRAY,
                    thickness=3,
                )
            elif self.shape_kind == 0:
                fill_rect(canvas, cx - size, cy - size, 2 * size, 2 * size, GRAY)
            else:
                fill_disk(canvas, cx, cy, size, GRAY)
        # option boxes with letters
        letter_h = round(self.box * 0.6)
        for i in range(self.n_options):
            x = self._option_x(i)
            outline_rect(canvas, x, self.box_y, self.box, self.box, DARK_GRAY, 3)
            ch = _LETTERS[i]
            w = text_width(ch, letter_h, gap=0)
            draw_text(
                canvas,
                ch,
                x + (self.box - w) // 2,
                self.box_y + (self.box - letter_h) // 2,
                letter_h,
                BLACK,
                gap=0,
            )
        return canvas

    def _render(self, ring_at: int | None, thickness: int | None = None) -> np.ndarray:
        canvas = self._base.copy()
        if ring_at is not None:
            t = self.ring_thickness if thickness is None else thickness
            pad = self.ring_pad
            x = self._option_x(ring_at) - pad
            y = self.box_y - pad
            side = self.box + 2 * pad
            outline_rect(canvas, x, y, side, side, color_rgb(RING_COLOR), t)
        return canvas

    def _ring_frames(self, ring_at: int) -> list[np.ndarray]:
        frames = [self._render(None) for _ in range(6)]
        for t in range(2, self.ring_thickness, 2):
            frames.append(self._render(ring_at, thickness=t))
        frames.append(self._render(ring_at))
        return self._pad(frames)

    # -- scene interface -----------------------------------------------------

    def initial_array(self) -> np.ndarray:
        return self._render(None)

    def target_array(self) -> np.ndarray:
        return self._render(self.correct)

    def truth(self) -> ChoiceLetter:
        return ChoiceLetter(letter=self.letter)

    def task_text(self) -> str:
        letters = ", ".join(_LETTERS[: self.n_options])
        return (
            "A row of shapes grows by the same amount from one to the next, "
            "and its final slot is empty. Below sit option boxes labelled "
            f"{letters}, one of which completes the pattern. A bold "
            f"{RING_COLOR} frame draws itself around the correct option."
        )

    def gt_arrays(self) -> list[np.ndarray]:
        return self._ring_frames(self.correct)

    def _corrupt(
        self, mode: CorruptionMode, rng: np.random.Generator
    ) -> list[np.ndarray]:
        wrong = int(rng.integers(self.n_options - 1))
        if wrong >= self.correct:
            wrong += 1
        return self._ring_frames(wrong)
