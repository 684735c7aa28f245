"""Match-3 move task: one swap lines up a run, which clears and refills.

Every color owns a distinct high-contrast tile texture, so any two tiles of
different colors look structurally different.  Boards that end up too close
to their start (frame-similarity above a rejection ceiling) are regenerated
from a bumped substream, which keeps a frozen initial frame clearly distinct
from the target.
"""

from __future__ import annotations

import numpy as np

from ..core import DatasetError, Difficulty, Frame, PixelTarget, Task
from ..draw import DARK_GRAY, PALETTE, color_rgb, new_canvas, outline_rect
from ..imgproc import ssim, to_gray
from ._scene import CorruptionMode, Scene

_B = {Difficulty.EASY: 4, Difficulty.MEDIUM: 5, Difficulty.HARD: 6}
_N_COLORS = {Difficulty.EASY: 3, Difficulty.MEDIUM: 4, Difficulty.HARD: 5}
_MAX_ATTEMPTS = 20
# any ceiling below the verifier's 0.70 similarity floor guarantees that a
# frozen clip (final frame = initial frame) cannot pass; 0.68 keeps the
# rejection rate low while preserving that guarantee bit-for-bit
_SSIM_CEILING = 0.68
_SWAP_STEPS = 3
_FALL_STEPS = 4


def _tile_sprite(tile: int, rgb: tuple[int, int, int], kind: int) -> np.ndarray:
    """One textured tile; the overlay pattern is keyed to the color index.

    Patterns use different spatial frequencies so tiles of different colors
    are structurally dissimilar, not just differently tinted.
    """
    base = np.empty((tile, tile, 3), dtype=np.uint8)
    base[:] = rgb
    dark = tuple(int(v * 0.30) for v in rgb)
    ys, xs = np.mgrid[0:tile, 0:tile]
    if kind == 0:  # diagonal stripes
        period = max(4, tile // 3)
        mask = (xs + ys) % period < period // 2
    elif kind == 1:  # dot grid
        period = max(4, tile // 5)
        gx = xs % period - period / 2
        gy = ys % period - period / 2
        mask = gx * gx + gy * gy <= (period * 0.33) ** 2
    elif kind == 2:  # checkerboard
        period = max(4, tile // 4)
        mask = ((xs // period) + (ys // period)) % 2 == 0
    elif kind == 3:  # anti-diagonal stripes
        period = max(4, tile // 6)
        mask = (xs - ys) % period < period // 2
    else:  # concentric ring
        c = (tile - 1) / 2.0
        d2 = (xs - c) ** 2 + (ys - c) ** 2
        mask = (d2 >= (tile * 0.20) ** 2) & (d2 <= (tile * 0.40) ** 2)
    base[mask] = dark
    # thin dark border keeps the lattice visible
    base[:2] = base[-2:] = DARK_GRAY
    base[:, :2] = base[:, -2:] = DARK_GRAY
    return base


def _find_runs(board: np.ndarray) -> set[tuple[int, int]]:
    """Cells in any horizontal or vertical run of three or more.

    Negative entries mark holes and never match anything.
    """
    b = board.shape[0]
    hit: set[tuple[int, int]] = set()
    for r in range(b):
        for c in range(b - 2):
            if board[r, c] >= 0 and board[r, c] == board[r, c + 1] == board[r, c + 2]:
                hit.update({(r, c), (r, c + 1), (r, c + 2)})
    for c in range(b):
        for r in range(b - 2):
            if board[r, c] >= 0 and board[r, c] == board[r + 1, c] == board[r + 2, c]:
                hit.update({(r, c), (r + 1, c), (r + 2, c)})
    return hit


class Match3Scene(Scene):
    task = Task.GAME_MOVE
    corruptions = ()

    def _build(self, rng: np.random.Generator) -> None:
        del rng  # substreams are re-derived per attempt
        b = _B[self.difficulty]
        nc = _N_COLORS[self.difficulty]
        self.b, self.nc = b, nc
        self.tile = (self.square - 2 * (self.square // 24)) // b
        side = self.tile * b
        self.bx = (self.width - side) // 2
        self.by = (self.height - side) // 2
        for attempt in range(_MAX_ATTEMPTS):
            rng_a = self._rng("board", attempt)
            if self._try_build(rng_a):
                return
        raise DatasetError(
            f"match3 {self.difficulty.value} seed {self.seed}: no sufficiently "
            f"distinct board in {_MAX_ATTEMPTS} attempts"
        )

    def _try_build(self, rng: np.random.Generator) -> bool:
        b, nc = self.b, self.nc
        names = sorted(PALETTE)
        picked = rng.choice(len(names), size=nc, replace=False)
        colors = [names[int(i)] for i in picked]
        sprites = [
            _tile_sprite(self.tile, color_rgb(colors[k]), k % 5) for k in range(nc)
        ]
        # fill without accidental runs
        board = np.zeros((b, b), dtype=np.int64)
        for r in range(b):
            for c in range(b):
                banned = set()
                if c >= 2 and board[r, c - 1] == board[r, c - 2]:
                    banned.add(int(board[r, c - 1]))
                if r >= 2 and board[r - 1, c] == board[r - 2, c]:
                    banned.add(int(board[r - 1, c]))
                options = [k for k in range(nc) if k not in banned]
                board[r, c] = options[int(rng.integers(len(options)))]
        # plant XX_X on the bottom row with the gap's filler directly above,
        # so one downward swap completes a four-tile run (shifting four
        # columns and maximizing the visual change)
        r = b - 1
        c = int(rng.integers(0, b - 3))
        x = int(rng.integers(nc))
        board[r, c] = x
        board[r, c + 1] = x
        board[r, c + 3] = x
        board[r - 1, c + 2] = x
        if board[r, c + 2] == x:
            board[r, c + 2] = (x + 1) % nc
        if _find_runs(board):
            return False
        swap_a, swap_b = (r - 1, c + 2), (r, c + 2)
        swapped = board.copy()
        swapped[swap_a], swapped[swap_b] = swapped[swap_b], swapped[swap_a]
        runs = _find_runs(swapped)
        if not runs:
            return False
        # clear, gravity, refill
        cleared = swapped.copy()
        for cell in runs:
            cleared[cell] = -1
        final = np.empty_like(cleared)
        fills: list[tuple[int, int]] = []  # (column, landing row)
        for col in range(b):
            stack = [int(v) for v in cleared[:, col] if v >= 0]
            missing = b - len(stack)
            for row in range(missing):
                final[row, col] = -1
                fills.append((col, row))
            for k, v in enumerate(stack):
                final[missing + k, col] = v
        # refills prefer a color different from what that cell used to show
        # and avoid creating fresh runs; fall back gracefully if impossible
        for col, row in fills:
            old = int(board[row, col])
            ranked = sorted(
                (int(v) for v in rng.permutation(nc)),
                key=lambda v: v == old,
            )
            for candidate in ranked:
                final[row, col] = candidate
                if not _find_runs(final):
                    break
            else:
                final[row, col] = ranked[0]
        self.colors, self.sprites = colors, sprites
        self.board, self.swap_a, self.swap_b = board, swap_a, swap_b
        self.runs, self.swapped, self.final = runs, swapped, final
        score = ssim(
            to_gray(self._render(board)), to_gray(self._render(final))
        )
        return score < _SSIM_CEILING

    # -- rendering ---------------------------------------------------------

    def _cell_xy(self, r: float, c: float) -> tuple[int, int]:
        return (round(self.bx + c * self.tile), round(self.by + r * self.tile))

    def _render(
        self,
        board: np.ndarray,
        skip: set[tuple[int, int]] = frozenset(),
        floating: list[tuple[float, float, int]] = (),
        flash: set[tuple[int, int]] = frozenset(),
    ) -> np.ndarray:
        canvas = new_canvas(self.width, self.height)
        b = self.b
        for r in range(b):
            for c in range(b):
                if (r, c) in skip or board[r, c] < 0:
                    continue
                x, y = self._cell_xy(r, c)
                canvas[y: y + self.tile, x: x + self.tile] = self.sprites[
                    int(board[r, c])
                ]
        for r, c, k in floating:
            x, y = self._cell_xy(r, c)
            y0, y1 = max(0, y), min(self.height, y + self.tile)
            x0, x1 = max(0, x), min(self.width, x + self.tile)
            if y1 > y0 and x1 > x0:
                canvas[y0:y1, x0:x1] = self.sprites[k][
                    y0 - y: y1 - y, x0 - x: x1 - x
                ]
        for r, c in flash:
            x, y = self._cell_xy(r, c)
            outline_rect(canvas, x + 3, y + 3, self.tile - 6, self.tile - 6,
                         (255, 255, 255), 4)
        return canvas

    # -- scene interface -----------------------------------------------------

    def initial_array(self) -> np.ndarray:
        return self._render(self.board)

    def target_array(self) -> np.ndarray:
        return self._render(self.final)

    def truth(self) -> PixelTarget:
        return PixelTarget(frame=Frame(self.target_array()))

    def task_text(self) -> str:
        return (
            "On the tiled puzzle board, a pair of neighboring tiles trades "
            "places so that three matching tiles line up. The matched run "
            "flashes and clears, the tiles above drop down to fill the gap, "
            "and fresh tiles fall in from the top edge."
        )

    def gt_arrays(self) -> list[np.ndarray]:
        frames = [self._render(self.board) for _ in range(3)]
        (ra, ca), (rb, cb) = self.swap_a, self.swap_b
        ka, kb = int(self.board[self.swap_a]), int(self.board[self.swap_b])
        for step in range(1, _SWAP_STEPS + 1):
            t = step / _SWAP_STEPS
            floating = [
                (ra + (rb - ra) * t, ca + (cb - ca) * t, ka),
                (rb + (ra - rb) * t, cb + (ca - cb) * t, kb),
            ]
            frames.append(
                self._render(self.board, skip={self.swap_a, self.swap_b},
                             floating=floating)
            )
        frames.append(self._render(self.swapped, flash=self.runs))
        frames.append(self._render(self.swapped, flash=self.runs))
        frames.append(self._render(self.swapped, skip=self.runs))
        # gravity plus refill: every tile of the final board glides from its
        # source position (survivors) or from above the roof (new tiles)
        start_row: dict[tuple[int, int], float] = {}
        for col in range(self.b):
            survivors = [r for r in range(self.b) if (r, col) not in self.runs]
            missing = self.b - len(survivors)
            for new_row in range(missing):
                start_row[(new_row, col)] = float(new_row - missing)
            for k, src in enumerate(survivors):
                start_row[(missing + k, col)] = float(src)
        for step in range(1, _FALL_STEPS + 1):
            t = step / _FALL_STEPS
            floating = []
            for (r, c), r0 in start_row.items():
                rr = r0 + (r - r0) * t
                floating.append((rr, float(c), int(self.final[r, c])))
            blank = np.full_like(self.final, -1)
            frames.append(self._render(blank, floating=floating))
        frames.append(self.target_array())
        return self._pad(frames)
