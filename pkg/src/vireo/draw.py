"""Deterministic drawing primitives used by the task generators.

All routines mutate a uint8 HxWx3 canvas in place with purely integer /
vectorized numpy operations — no anti-aliasing, no font libraries — so the
same inputs always produce bit-identical pixels.
"""

from __future__ import annotations

import numpy as np

from .glyphs import glyph_bitmap, render_glyph

__all__ = [
    "PALETTE",
    "HUE_BANDS",
    "color_rgb",
    "new_canvas",
    "fill_rect",
    "outline_rect",
    "fill_disk",
    "outline_disk",
    "draw_line",
    "draw_glyph",
    "draw_text",
    "text_width",
    "blend",
]

# Named palette shared with the color grounder: RGB values sit centrally in
# the hue bands the grounder segments, with saturation/value comfortably
# above the detection thresholds.
PALETTE: dict[str, tuple[int, int, int]] = {
    "red": (220, 40, 40),
    "orange": (235, 140, 40),
    "yellow": (235, 220, 60),
    "green": (50, 185, 70),
    "cyan": (45, 195, 215),
    "blue": (50, 80, 225),
    "purple": (150, 60, 210),
}

# Hue bands (degrees, [lo, hi) intervals) for segmenting each palette color.
HUE_BANDS: dict[str, tuple[tuple[float, float], ...]] = {
    "red": ((0.0, 10.0), (350.0, 360.0)),
    "orange": ((20.0, 45.0),),
    "yellow": ((46.0, 70.0),),
    "green": ((90.0, 160.0),),
    "cyan": ((165.0, 205.0),),
    "blue": ((206.0, 260.0),),
    "purple": ((261.0, 320.0),),
}

WHITE = (255, 255, 255)
BLACK = (0, 0, 0)
GRAY = (128, 128, 128)
LIGHT_GRAY = (200, 200, 200)
DARK_GRAY = (70, 70, 70)


def color_rgb(name: str) -> tuple[int, int, int]:
    try:
        return PALETTE[name]
    except KeyError:
        raise KeyError(f"unknown palette color {name!r}")


def new_canvas(
    width: int, height: int, color: tuple[int, int, int] = WHITE
) -> np.ndarray:
    canvas = np.empty((height, width, 3), dtype=np.uint8)
    canvas[:, :] = color
    return canvas


def _clip_box(canvas: np.ndarray, x: int, y: int, w: int, h: int):
    x0 = max(0, x)
    y0 = max(0, y)
    x1 = min(canvas.shape[1], x + w)
    y1 = min(canvas.shape[0], y + h)
    if x1 <= x0 or y1 <= y0:
        return None
    return x0, y0, x1, y1

def fill_rect(
    canvas: np.ndarray, x: int, y: int, w: int, h: int,
    color: tuple[int, int, int],
) -> None:
    box = _clip_box(canvas, x, y, w, h)
    if box:
        x0, y0, x1, y1 = box
        canvas[y0:y1, x0:x1] = color


def outline_rect(
    canvas: np.ndarray, x: int, y: int, w: int, h: int,
    color: tuple[int, int, int], thickness: int = 2,
) -> None:
    t = thickness
    fill_rect(canvas, x, y, w, t, color)
    fill_rect(canvas, x, y + h - t, w, t, color)
    fill_rect(canvas, x, y, t, h, color)
    fill_rect(canvas, x + w - t, y, t, h, color)


def fill_disk(
    canvas: np.ndarray, cx: float, cy: float, r: float,
    color: tuple[int, int, int],
) -> None:
    box = _clip_box(
        canvas, int(cx - r) - 1, int(cy - r) - 1, int(2 * r) + 3, int(2 * r) + 3
    )
    if not box:
        return
    x0, y0, x1, y1 = box
    ys, xs = np.mgrid[y0:y1, x0:x1]
    mask = (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
    canvas[y0:y1, x0:x1][mask] = color


def outline_disk(
    canvas: np.ndarray, cx: float, cy: float, r: float,
    color: tuple[int, int, int], thickness: float = 3.0,
) -> None:
    box = _clip_box(
        canvas, int(cx - r) - 1, int(cy - r) - 1, int(2 * r) + 3, int(2 * r) + 3
    )
    if not box:
        return
    x0, y0, x1, y1 = box
    ys, xs = np.mgrid[y0:y1, x0:x1]
    d2 = (xs - cx) ** 2 + (ys - cy) ** 2
    inner = max(0.0, r - thickness)
    mask = (d2 <= r * r) & (d2 >= inner * inner)
    canvas[y0:y1, x0:x1][mask] = color


def draw_line(
    canvas: np.ndarray, x0: float, y0: float, x1: float, y1: float,
    color: tuple[int, int, int], thickness: float = 3.0,
) -> None:
    """Thick line: pixels within thickness/2 of the segment."""
    pad = int(thickness) + 2
    box = _clip_box(
        canvas,
        int(min(x0, x1)) - pad,
        int(min(y0, y1)) - pad,
        int(abs(x1 - x0)) + 2 * pad + 1,
        int(abs(y1 - y0)) + 2 * pad + 1,
    )
    if not box:
        return
    bx0, by0, bx1, by1 = box
    ys, xs = np.mgrid[by0:by1, bx0:bx1]
    dx, dy = x1 - x0, y1 - y0
    seg_len2 = dx * dx + dy * dy
    if seg_len2 < 1e-9:
        fill_disk(canvas, x0, y0, thickness / 2.0, color)
        return
    t = ((xs - x0) * dx + (ys - y0) * dy) / seg_len2
    t = np.clip(t, 0.0, 1.0)
    px = x0 + t * dx
    py = y0 + t * dy
    mask = (xs - px) ** 2 + (ys - py) ** 2 <= (thickness / 2.0) ** 2
    canvas[by0:by1, bx0:bx1][mask] = color


def draw_glyph(
    canvas: np.ndarray, ch: str, x: int, y: int, height: int,
    color: tuple[int, int, int] = BLACK, width: int | None = None,
) -> tuple[int, int]:
    """Blit one glyph with its top-left corner at (x, y).

    Returns the rendered (width, height).
    """
    ink = render_glyph(ch, height, width)
    h, w = ink.shape
    box = _clip_box(canvas, x, y, w, h)
    if box:
        x0, y0, x1, y1 = box
        sub = ink[y0 - y: y1 - y, x0 - x: x1 - x]
        canvas[y0:y1, x0:x1][sub] = color
    return w, h


def _glyph_width(ch: str, height: int) -> int:
    # width in units of the full 7-row line box, so all glyphs share a scale
    bm = glyph_bitmap(ch)
    return max(1, round(height * bm.shape[1] / 7))


def text_width(text: str, height: int, gap: int) -> int:
    """Total width `draw_text` would occupy."""
    if not text:
        return 0
    widths = [_glyph_width(ch, height) for ch in text]
    return sum(widths) + gap * (len(text) - 1)


def draw_text(
    canvas: np.ndarray, text: str, x: int, y: int, height: int,
    color: tuple[int, int, int] = BLACK, gap: int | None = None,
) -> int:
    """Draw a run of vocabulary glyphs left to right; returns end x.

    Glyphs are vertically centered on a common 7-unit line box so operators
    with trimmed blank rows still align with digits.
    """
    if gap is None:
        gap = max(2, height // 4)
    cx = x
    for ch in text:
        bm = glyph_bitmap(ch)
        # scale relative to the full 7-row line so '-' stays thin
        gh = max(1, round(height * bm.shape[0] / 7))
        gw = _glyph_width(ch, height)
        gy = y + (height - gh) // 2
        draw_glyph(canvas, ch, cx, gy, gh, color, width=gw)
        cx += gw + gap
    return cx - gap


def blend(
    a: np.ndarray, b: np.ndarray, alpha: float
) -> np.ndarray:
    """Deterministic integer blend round((1-alpha)*a + alpha*b)."""
    if a.shape != b.shape:
        raise ValueError("blend needs equal shapes")
    out = np.round(
        a.astype(np.float64) * (1.0 - alpha) + b.astype(np.float64) * alpha
    )
    return np.clip(out, 0, 255).astype(np.uint8)
