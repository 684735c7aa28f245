"""Graph-traversal task: a token walks the edges; nodes color on first visit.

Nodes sit on a ring.  The token runs a depth-first tour of a random spanning
tree (plus a few decoy edges that are drawn but never walked), so it always
moves along drawn edges and returns to the top node at the end.
"""

from __future__ import annotations

import numpy as np

from ..core import BBox, Difficulty, ObjectRef, ObjectSet, Task
from ..draw import BLACK, GRAY, LIGHT_GRAY, PALETTE, color_rgb, draw_line, fill_disk, new_canvas, outline_disk
from ._scene import CorruptionMode, Scene

_N = {Difficulty.EASY: 4, Difficulty.MEDIUM: 6, Difficulty.HARD: 8}
_MOVE_STEPS = 2


class GraphScene(Scene):
    task = Task.GRAPH_TRAVERSAL
    corruptions = (CorruptionMode.WRONG_COUNT,)

    def _build(self, rng: np.random.Generator) -> None:
        n = _N[self.difficulty]
        self.n = n
        names = sorted(PALETTE)
        self.colors = [names[int(i)] for i in rng.integers(len(names), size=n)]
        # random spanning tree: node i>0 hangs off an earlier node
        tree: dict[int, list[int]] = {i: [] for i in range(n)}
        edges: set[tuple[int, int]] = set()
        for i in range(1, n):
            j = int(rng.integers(i))
            tree[j].append(i)
            tree[i].append(j)
            edges.add((min(i, j), max(i, j)))
        for _ in range(n // 3):
            a, b = int(rng.integers(n)), int(rng.integers(n))
            if a != b:
                edges.add((min(a, b), max(a, b)))
        self.edges = sorted(edges)
        # depth-first tour of the tree from node 0, recording each move and
        # whether it lands on a node for the first time
        moves: list[tuple[int, int, bool]] = []
        seen = {0}

        def walk(u: int) -> None:
            for v in sorted(tree[u]):
                if v in seen:
                    continue
                seen.add(v)
                moves.append((u, v, True))
                walk(v)
                moves.append((v, u, False))

        walk(0)
        self.moves = moves
        self.visit_order = [0] + [v for _, v, first in moves if first]
        # geometry: ring layout, top node first, clockwise
        radius = round(self.square * 0.35)
        cx, cy = self.width / 2.0, self.height / 2.0
        self.node_r = round(self.square * 0.055)
        self.centers = []
        for i in range(n):
            ang = -np.pi / 2 + 2 * np.pi * i / n
            self.centers.append(
                (round(cx + radius * np.cos(ang)), round(cy + radius * np.sin(ang)))
            )
        self._base = self._render_edges()

    # -- rendering ---------------------------------------------------------

    def _render_edges(self) -> np.ndarray:
        canvas = new_canvas(self.width, self.height)
        for a, b in self.edges:
            draw_line(canvas, *self.centers[a], *self.centers[b], GRAY, thickness=4)
        return canvas

    def _render(
        self, colored: set[int], token_xy: tuple[float, float] | None
    ) -> np.ndarray:
        canvas = self._base.copy()
        for i, (x, y) in enumerate(self.centers):
            rgb = color_rgb(self.colors[i]) if i in colored else LIGHT_GRAY
            fill_disk(canvas, x, y, self.node_r, rgb)
            outline_disk(canvas, x, y, self.node_r, BLACK, thickness=2.5)
        if token_xy is not None:
            fill_disk(canvas, token_xy[0], token_xy[1], self.node_r * 0.33, BLACK)
        return canvas

    def _tour_frames(self, color_stop: int | None) -> list[np.ndarray]:
        """DFS tour; nodes beyond ``color_stop`` first-visits stay gray."""
        frames = [self._render(set(), self.centers[0]) for _ in range(2)]
        colored: set[int] = set()
        visits = 0
        if color_stop is None or visits < color_stop:
            colored.add(0)
        visits += 1
        frames.append(self._render(colored, self.centers[0]))
        for u, v, first in self.moves:
            (x0, y0), (x1, y1) = self.centers[u], self.centers[v]
            for step in range(1, _MOVE_STEPS + 1):
                t = step / _MOVE_STEPS
                xy = (x0 + (x1 - x0) * t, y0 + (y1 - y0) * t)
                frames.append(self._render(colored, xy))
            if first:
                if color_stop is None or visits < color_stop:
                    colored.add(v)
                visits += 1
                frames.append(self._render(colored, self.centers[v]))
        return self._pad(frames)

    # -- scene interface -----------------------------------------------------

    def initial_array(self) -> np.ndarray:
        return self._render(set(), self.centers[0])

    def target_array(self) -> np.ndarray:
        return self._render(set(range(self.n)), self.centers[0])

    def truth(self) -> ObjectSet:
        r = self.node_r
        return ObjectSet(
            objects=tuple(
                ObjectRef(
                    label=f"{self.colors[i]} node",
                    bbox=BBox(self.centers[i][0] - r, self.centers[i][1] - r, 2 * r, 2 * r),
                )
                for i in range(self.n)
            )
        )

    def task_text(self) -> str:
        listing = ", ".join(self.colors)
        return (
            "A small black token starts on the top node of the graph and "
            "walks along the edges, visiting every node and returning home; "
            "each gray node takes on its own color the first time the token "
            f"arrives. Clockwise from the top the node colors are {listing}."
        )

    def gt_arrays(self) -> list[np.ndarray]:
        return self._tour_frames(None)

    def _corrupt(
        self, mode: CorruptionMode, rng: np.random.Generator
    ) -> list[np.ndarray]:
        # the tour runs in full but the last first-visit never colors
        return self._tour_frames(self.n - 1)
