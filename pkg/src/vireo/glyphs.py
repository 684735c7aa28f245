"""Closed-vocabulary glyph set shared by the renderer and the verifier.

The vocabulary covers digits 0-9, option letters A-D, and the operator set
+ - x / = needed by the arithmetic task.  Glyphs are square-cornered 5x7
bitmaps (LCD style) chosen so that every glyph is a single 4-connected ink
component — except "=" and the division sign, whose parts fully overlap in x
and are merged by the verifier's column-overlap rule.  Recognition works by
normalized cross-correlation against these exact bitmaps, so reading back a
frame rendered by this module is loss-free by construction.

The atlas ships with the package as a PNG sprite sheet plus a JSON index
(assets/glyphs.png, assets/glyphs.json); `save_atlas` regenerates both.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .core import Frame, frame_to_png_bytes, frame_from_png_bytes

__all__ = [
    "GLYPHS",
    "VOCAB",
    "DIGITS",
    "LETTERS",
    "OPERATORS",
    "glyph_bitmap",
    "render_glyph",
    "glyph_aspect",
    "save_atlas",
    "load_atlas",
    "builtin_atlas",
]

# Operator characters use these canonical forms; the expression parser also
# accepts the ASCII aliases * and /.
MUL = "×"  # multiplication sign
DIV = "÷"  # division sign

_RAW: dict[str, tuple[str, ...]] = {
    "0": ("11111", "10001", "10001", "10001", "10001", "10001", "11111"),
    "1": ("00100", "01100", "00100", "00100", "00100", "00100", "01110"),
    "2": ("11111", "00001", "00001", "11111", "10000", "10000", "11111"),
    "3": ("11111", "00001", "00001", "01111", "00001", "00001", "11111"),
    "4": ("10001", "10001", "10001", "11111", "00001", "00001", "00001"),
    "5": ("11111", "10000", "10000", "11111", "00001", "00001", "11111"),
    "6": ("11111", "10000", "10000", "11111", "10001", "10001", "11111"),
    "7": ("11111", "00001", "00001", "00001", "00001", "00001", "00001"),
    "8": ("11111", "10001", "10001", "11111", "10001", "10001", "11111"),
    "9": ("11111", "10001", "10001", "11111", "00001", "00001", "11111"),
    "A": ("11111", "10001", "10001", "11111", "10001", "10001", "10001"),
    "B": ("11110", "10010", "10010", "11110", "10010", "10010", "11110"),
    "C": ("11111", "10000", "10000", "10000", "10000", "10000", "11111"),
    "D": ("11111", "10001", "10001", "10001", "10001", "10001", "11110"),
    "+": ("00000", "00100", "00100", "11111", "00100", "00100", "00000"),
    "-": ("00000", "00000", "00000", "11111", "00000", "00000", "00000"),
    MUL: ("00000", "11011", "01110", "00100", "01110", "11011", "00000"),
    DIV: ("00000", "00100", "00000", "11111", "00000", "00100", "00000"),
    "=": ("00000", "00000", "11111", "00000", "11111", "00000", "00000"),
}

DIGITS = tuple("0123456789")
LETTERS = tuple("ABCD")
OPERATORS = ("+", "-", MUL, DIV, "=")
VOCAB: tuple[str, ...] = DIGITS + LETTERS + OPERATORS


def _trim(bitmap: np.ndarray) -> np.ndarray:
    """Crop empty border rows/columns so glyph boxes match ink bboxes."""
    ys, xs = np.nonzero(bitmap)
    return bitmap[ys.min(): ys.max() + 1, xs.min(): xs.max() + 1]


GLYPHS: dict[str, np.ndarray] = {}
for _ch, _rows in _RAW.items():
    _bm = np.array([[c == "1" for c in row] for row in _rows], dtype=bool)
    _bm = _trim(_bm)
    _bm.setflags(write=False)
    GLYPHS[_ch] = _bm


def glyph_bitmap(ch: str) -> np.ndarray:
    """The trimmed boolean bitmap of a vocabulary glyph."""
    try:
        return GLYPHS[ch]
    except KeyError:
        raise KeyError(f"glyph {ch!r} not in vocabulary {''.join(VOCAB)!r}")


def glyph_aspect(ch: str) -> float:
    """width / height of the trimmed glyph bitmap."""
    bm = glyph_bitmap(ch)
    return bm.shape[1] / bm.shape[0]


def render_glyph(ch: str, height: int, width: int | None = None) -> np.ndarray:
    """Rasterize a glyph to a boolean ink mask of the requested size.

    Nearest-neighbour scaling keeps edges hard, so a glyph rendered and then
    template-matched at the same size correlates exactly.
    """
    bm = glyph_bitmap(ch)
    if height < bm.shape[0]:
        raise ValueError(f"height {height} smaller than glyph grid {bm.shape[0]}")
    if width is None:
        width = max(1, round(height * bm.shape[1] / bm.shape[0]))
    ys = (np.arange(height) * bm.shape[0]) // height
    xs = (np.arange(width) * bm.shape[1]) // width
    return bm[np.ix_(ys, xs)]


# ---------------------------------------------------------------------------
# sprite-sheet atlas
# ---------------------------------------------------------------------------

_CELL = 16  # sprite cell; glyphs are blitted top-left at native 5x7 scale 2


def _atlas_arrays() -> tuple[np.ndarray, dict]:
    """Build the sprite sheet (white ink on black) plus its JSON index."""
    n = len(VOCAB)
    sheet = np.zeros((_CELL, _CELL * n), dtype=np.uint8)
    index: dict = {"cell": _CELL, "glyphs": {}}
    for i, ch in enumerate(VOCAB):
        bm = glyph_bitmap(ch)
        scaled = render_glyph(ch, bm.shape[0] * 2, bm.shape[1] * 2)
        h, w = scaled.shape
        sheet[:h, i * _CELL: i * _CELL + w] = np.where(scaled, 255, 0)
        index["glyphs"][ch] = {"x": i * _CELL, "y": 0, "w": int(w), "h": int(h)}
    return sheet, index


def save_atlas(directory: str | Path) -> tuple[Path, Path]:
    """Write glyphs.png + glyphs.json under `directory`; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sheet, index = _atlas_arrays()
    png_path = directory / "glyphs.png"
    json_path = directory / "glyphs.json"
    rgb = np.repeat(sheet[:, :, None], 3, axis=2)
    png_path.write_bytes(frame_to_png_bytes(Frame(rgb)))
    json_path.write_text(
        json.dumps(index, indent=2, sort_keys=True), encoding="utf-8"
    )
    return png_path, json_path


def load_atlas(directory: str | Path | None = None) -> dict[str, np.ndarray]:
    """Load glyph bitmaps back from a sprite sheet.

    With no argument, reads the atlas shipped in the package's assets.
    """
    if directory is None:
        pkg = resources.files(__package__) / "assets"
        png_bytes = (pkg / "glyphs.png").read_bytes()
        index = json.loads((pkg / "glyphs.json").read_text(encoding="utf-8"))
    else:
        directory = Path(directory)
        png_bytes = (directory / "glyphs.png").read_bytes()
        index = json.loads(
            (directory / "glyphs.json").read_text(encoding="utf-8")
        )
    sheet = np.asarray(frame_from_png_bytes(png_bytes).pixels)[:, :, 0]
    out: dict[str, np.ndarray] = {}
    for ch, box in index["glyphs"].items():
        crop = sheet[box["y"]: box["y"] + box["h"], box["x"]: box["x"] + box["w"]]
        # stored at 2x scale; decimate back to the native grid
        native = crop[::2, ::2] > 127
        native.setflags(write=False)
        out[ch] = native
    return out


def builtin_atlas() -> dict[str, np.ndarray]:
    """The embedded glyph bitmaps keyed by character (native resolution)."""
    return dict(GLYPHS)
