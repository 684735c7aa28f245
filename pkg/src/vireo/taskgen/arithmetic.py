"""Arithmetic task: the answer to an equation appears digit by digit.

Operands are single digits 1-9; expressions are rejected until they evaluate
to an integer in [0, 999], so division problems always come out exact.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..core import Difficulty, ExprResult, Task
from ..draw import BLACK, color_rgb, draw_text, new_canvas, text_width
from ..expr import ExprError, parse_expression
from ._scene import CorruptionMode, Scene

_N_OPS = {Difficulty.EASY: 1, Difficulty.MEDIUM: 2, Difficulty.HARD: 3}
_OPS = "+-×÷"

ANSWER_COLOR = "blue"


class ArithmeticScene(Scene):
    task = Task.ARITHMETIC_OPERATIONS
    corruptions = (CorruptionMode.WRONG_DIGIT,)

    def _build(self, rng: np.random.Generator) -> None:
        n_ops = _N_OPS[self.difficulty]
        while True:
            nums = rng.integers(1, 10, size=n_ops + 1)
            ops = rng.integers(0, len(_OPS), size=n_ops)
            text = str(int(nums[0]))
            for k in range(n_ops):
                text += _OPS[int(ops[k])] + str(int(nums[k + 1]))
            try:
                value = parse_expression(text)
            except ExprError:
                continue
            if value.denominator == 1 and 0 <= value <= 999:
                break
        self.expr_text = text
        self.value = value
        self.answer = str(int(value))
        # layout keyed to the full final line so shared glyphs never move
        self._char_h = self._fit_height(self.expr_text + "=" + self.answer)

    def _fit_height(self, full_text: str) -> int:
        h = round(self.square * 0.125)
        avail = self.width - 2 * (self.square // 18)
        w = text_width(full_text, h, gap=max(2, h // 4))
        if w > avail:
            h = max(12, h * avail // w)
        return h

    def _render(self, shown_answer: str) -> np.ndarray:
        canvas = new_canvas(self.width, self.height)
        h = self._char_h
        gap = max(2, h // 4)
        full = self.expr_text + "=" + self.answer
        x = (self.width - text_width(full, h, gap)) // 2
        y = (self.height - h) // 2
        x = draw_text(canvas, self.expr_text + "=", x, y, h, BLACK, gap)
        if shown_answer:
            draw_text(
                canvas, shown_answer, x + gap, y, h, color_rgb(ANSWER_COLOR), gap
            )
        return canvas

    def _reveal_frames(self, answer: str) -> list[np.ndarray]:
        frames = [self._render("") for _ in range(6)]
        for k in range(1, len(answer) + 1):
            frame = self._render(answer[:k])
            frames.append(frame)
            frames.append(frame.copy())
        return self._pad(frames)

    # -- scene interface -----------------------------------------------------

    def initial_array(self) -> np.ndarray:
        return self._render("")

    def target_array(self) -> np.ndarray:
        return self._render(self.answer)

    def truth(self) -> ExprResult:
        return ExprResult(text=self.expr_text, value=self.value)

    def task_text(self) -> str:
        return (
            f"The result of the equation {self.expr_text} is worked out and "
            "written after the equals sign, one digit at a time."
        )

    def gt_arrays(self) -> list[np.ndarray]:
        return self._reveal_frames(self.answer)

    def _corrupt(
        self, mode: CorruptionMode, rng: np.random.Generator
    ) -> list[np.ndarray]:
        delta = int(rng.integers(1, 4))
        wrong = int(self.value) + delta
        if wrong > 999:
            wrong = int(self.value) - delta
        return self._reveal_frames(str(wrong))
