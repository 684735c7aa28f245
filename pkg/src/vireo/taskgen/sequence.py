"""Rule-extrapolation task: the missing final number of a sequence appears.

Sequences are arithmetic progressions (and, on hard, doubling progressions)
with every term in 0..99.  The ground truth is the digit string of the whole
completed sequence read left to right.
"""

from __future__ import annotations

import numpy as np

from ..core import Difficulty, DigitSequence, Task
from ..draw import (
    BLACK,
    LIGHT_GRAY,
    color_rgb,
    draw_text,
    new_canvas,
    outline_rect,
    text_width,
)
from ._scene import CorruptionMode, Scene

_LEN = {Difficulty.EASY: 4, Difficulty.MEDIUM: 5, Difficulty.HARD: 6}

ANSWER_COLOR = "blue"


class SequenceScene(Scene):
    task = Task.RULE_EXTRAPOLATION
    corruptions = (CorruptionMode.WRONG_DIGIT,)

    def _build(self, rng: np.random.Generator) -> None:
        length = _LEN[self.difficulty]
        if self.difficulty is Difficulty.EASY:
            start = int(rng.integers(0, 4))
            step = int(rng.integers(1, 3))
            terms = [start + step * k for k in range(length)]
        elif self.difficulty is Difficulty.MEDIUM:
            start = int(rng.integers(0, 10))
            step = int(rng.integers(1, 6))
            terms = [start + step * k for k in range(length)]
        else:
            if rng.integers(2) == 0:
                start = int(rng.integers(0, 10))
                step = int(rng.integers(2, 10))
                terms = [start + step * k for k in range(length)]
            else:
                start = int(rng.integers(1, 4))
                terms = [start * 2**k for k in range(length)]
        self.terms = terms
        self.digits = tuple(int(ch) for t in terms for ch in str(t))
        self._layout()

    def _layout(self) -> None:
        h = round(self.square * 0.1)
        gap = max(2, h // 6)
        sep = round(h * 0.6)
        texts = [str(t) for t in self.terms]
        total = sum(text_width(t, h, gap) for t in texts) + sep * (len(texts) - 1)
        avail = self.width - 2 * (self.square // 18)
        if total > avail:
            h = max(12, h * avail // total)
            gap = max(2, h // 6)
            sep = round(h * 0.6)
            total = sum(text_width(t, h, gap) for t in texts) + sep * (
                len(texts) - 1
            )
        self._char_h, self._gap, self._sep = h, gap, sep
        xs = []
        x = (self.width - total) // 2
        for t in texts:
            xs.append(x)
            x += text_width(t, h, gap) + sep
        self._term_x = xs
        self._term_y = (self.height - h) // 2

    def _render(self, last_shown: str | None) -> np.ndarray:
        """Draw the sequence; None hides the last term behind a placeholder."""
        canvas = new_canvas(self.width, self.height)
        h, gap = self._char_h, self._gap
        for k, term in enumerate(self.terms[:-1]):
            draw_text(canvas, str(term), self._term_x[k], self._term_y, h, BLACK, gap)
        x_last = self._term_x[-1]
        if last_shown is None:
            w = text_width(str(self.terms[-1]), h, gap)
            outline_rect(
                canvas,
                x_last - 4,
                self._term_y - 4,
                w + 8,
                h + 8,
                LIGHT_GRAY,
                thickness=3,
            )
        elif last_shown:
            draw_text(
                canvas,
                last_shown,
                x_last,
                self._term_y,
                h,
                color_rgb(ANSWER_COLOR),
                gap,
            )
        return canvas

    def _reveal_frames(self, final_term: str) -> list[np.ndarray]:
        frames = [self._render(None) for _ in range(6)]
        for k in range(1, len(final_term) + 1):
            frame = self._render(final_term[:k])
            frames.append(frame)
            frames.append(frame.copy())
        return self._pad(frames)

    # -- scene interface -----------------------------------------------------

    def initial_array(self) -> np.ndarray:
        return self._render(None)

    def target_array(self) -> np.ndarray:
        return self._render(str(self.terms[-1]))

    def truth(self) -> DigitSequence:
        return DigitSequence(digits=self.digits)

    def task_text(self) -> str:
        shown = ", ".join(str(t) for t in self.terms[:-1])
        return (
            f"The sequence {shown}, ... follows one fixed rule. The missing "
            "final number appears in the empty slot, continuing that rule."
        )

    def gt_arrays(self) -> list[np.ndarray]:
        return self._reveal_frames(str(self.terms[-1]))

    def _corrupt(
        self, mode: CorruptionMode, rng: np.random.Generator
    ) -> list[np.ndarray]:
        true_term = str(self.terms[-1])
        pos = int(rng.integers(len(true_term)))
        lo = 1 if (pos == 0 and len(true_term) > 1) else 0
        wrong = int(rng.integers(lo, 9))
        if wrong >= int(true_term[pos]):
            wrong += 1
        chars = list(true_term)
        chars[pos] = str(wrong)
        return self._reveal_frames("".join(chars))
