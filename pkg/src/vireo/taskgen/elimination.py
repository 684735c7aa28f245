"""Temporal-ordering task: colored circles vanish in a prescribed order.

Each circle sits on a small dark pedestal; the pedestals stay through the
whole clip so the empty final scene is still clearly the same stage.
"""

from __future__ import annotations

import numpy as np

from ..core import Difficulty, ElimItem, EliminationOrder, Task
from ..draw import DARK_GRAY, PALETTE, color_rgb, fill_disk, fill_rect, new_canvas
from ._scene import CorruptionMode, Scene

_N = {Difficulty.EASY: 3, Difficulty.MEDIUM: 4, Difficulty.HARD: 5}
_STAGE_FRAMES = 4


class EliminationScene(Scene):
    task = Task.TEMPORAL_ORDERING
    corruptions = (CorruptionMode.WRONG_ELIMINATION_ORDER,)

    def _build(self, rng: np.random.Generator) -> None:
        n = _N[self.difficulty]
        self.n = n
        names = sorted(PALETTE)
        picked = rng.choice(len(names), size=n, replace=False)
        self.colors = [names[int(i)] for i in picked]
        self.order = [int(i) for i in rng.permutation(n)]
        self.radius = round(self.square * 0.072)
        self.cy = self.oy + round(self.square * 0.52)
        self.centers = [
            (self.ox + round(self.square * (i + 1) / (n + 1)), self.cy)
            for i in range(n)
        ]

    def _render(self, present: set[int]) -> np.ndarray:
        canvas = new_canvas(self.width, self.height)
        r = self.radius
        for i, (cx, cy) in enumerate(self.centers):
            fill_rect(
                canvas,
                cx - r,
                cy + r + round(r * 0.45),
                2 * r,
                max(4, r // 3),
                DARK_GRAY,
            )
            if i in present:
                fill_disk(canvas, cx, cy, r, color_rgb(self.colors[i]))
        return canvas

    def _stage_frames(self, order: list[int]) -> list[np.ndarray]:
        frames: list[np.ndarray] = []
        present = set(range(self.n))
        frames.extend(self._render(present) for _ in range(_STAGE_FRAMES))
        for idx in order:
            present.discard(idx)
            frames.extend(self._render(present) for _ in range(_STAGE_FRAMES))
        return self._pad(frames)

    # -- scene interface -----------------------------------------------------

    def initial_array(self) -> np.ndarray:
        return self._render(set(range(self.n)))

    def target_array(self) -> np.ndarray:
        return self._render(set())

    def truth(self) -> EliminationOrder:
        return EliminationOrder(
            items=tuple(
                ElimItem(label=f"{self.colors[i]} circle", color=self.colors[i])
                for i in self.order
            )
        )

    def task_text(self) -> str:
        seq = [f"{self.colors[i]} circle" for i in self.order]
        listing = ", then the ".join(seq[:-1])
        return (
            f"The {self.n} colored circles vanish one at a time from their "
            f"pedestals: first the {listing}, and finally the {seq[-1]}."
        )

    def gt_arrays(self) -> list[np.ndarray]:
        return self._stage_frames(self.order)

    def _corrupt(
        self, mode: CorruptionMode, rng: np.random.Generator
    ) -> list[np.ndarray]:
        swapped = self.order[:]
        swapped[0], swapped[1] = swapped[1], swapped[0]
        return self._stage_frames(swapped)
