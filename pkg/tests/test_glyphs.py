"""Glyph vocabulary: connectivity, distinctness, atlas round-trip."""

from __future__ import annotations

import numpy as np
import pytest

from vireo import glyphs
from vireo.glyphs import (
    DIGITS,
    DIV,
    GLYPHS,
    LETTERS,
    MUL,
    VOCAB,
    builtin_atlas,
    glyph_bitmap,
    load_atlas,
    render_glyph,
    save_atlas,
)
from vireo.imgproc import label_mask, match_template


class TestBitmaps:
    def test_vocabulary_complete(self):
        assert set(VOCAB) == set("0123456789ABCD") | {"+", "-", MUL, DIV, "="}
        assert len(VOCAB) == 19

    @pytest.mark.parametrize("ch", [c for c in VOCAB if c not in ("=", DIV)])
    def test_single_connected_component(self, ch):
        # one 4-connected ink blob per glyph keeps segmentation trivial
        _, n = label_mask(glyph_bitmap(ch))
        assert n == 1, f"glyph {ch!r} fragments into {n} components"

    @pytest.mark.parametrize("ch", ["=", DIV])
    def test_multi_part_glyphs_overlap_in_x(self, ch):
        bm = glyph_bitmap(ch)
        labels, n = label_mask(bm)
        assert n >= 2
        spans = []
        for i in range(n):
            xs = np.nonzero(labels == i)[1]
            spans.append((xs.min(), xs.max()))
        # every part's x-range intersects the widest part
        widest = max(spans, key=lambda s: s[1] - s[0])
        for lo, hi in spans:
            assert lo <= widest[1] and widest[0] <= hi

    def test_trimmed(self):
        for ch in VOCAB:
            bm = glyph_bitmap(ch)
            assert bm[0].any() and bm[-1].any()
            assert bm[:, 0].any() and bm[:, -1].any()


class TestDiscrimination:
    """Within each matching vocabulary, the right glyph wins by NCC."""

    @staticmethod
    def _ncc_self_vs_others(ch: str, vocab) -> tuple[float, float]:
        size = 42
        rendered = np.where(render_glyph(ch, size), 0, 255).astype(np.uint8)
        own, best_other = -2.0, -2.0
        for cand in vocab:
            h, w = rendered.shape
            tpl = np.where(render_glyph(cand, h, w), 0, 255).astype(np.uint8)
            score = match_template(rendered, tpl).score
            if cand == ch:
                own = score
            else:
                best_other = max(best_other, score)
        return own, best_other

    @pytest.mark.parametrize("ch", DIGITS)
    def test_digits(self, ch):
        own, other = self._ncc_self_vs_others(ch, DIGITS)
        assert own > 0.9999
        assert own > other + 0.05

    @pytest.mark.parametrize("ch", LETTERS)
    def test_letters(self, ch):
        own, other = self._ncc_self_vs_others(ch, LETTERS)
        assert own > 0.9999
        assert own > other + 0.05

    def test_seven_vs_one_example(self):
        rendered = np.where(render_glyph("7", 42), 0, 255).astype(np.uint8)
        h, w = rendered.shape
        t7 = np.where(render_glyph("7", h, w), 0, 255).astype(np.uint8)
        t1 = np.where(render_glyph("1", h, w), 0, 255).astype(np.uint8)
        s7 = match_template(rendered, t7).score
        s1 = match_template(rendered, t1).score
        assert s7 > 0.9
        assert s1 < s7


class TestAtlas:
    def test_shipped_atlas_matches_builtin(self):
        shipped = load_atlas()
        builtin = builtin_atlas()
        assert set(shipped) == set(builtin)
        for ch in builtin:
            assert np.array_equal(shipped[ch], builtin[ch]), ch

    def test_save_load_round_trip(self, tmp_path):
        png, idx = save_atlas(tmp_path)
        assert png.is_file() and idx.is_file()
        again = load_atlas(tmp_path)
        for ch, bm in builtin_atlas().items():
            assert np.array_equal(again[ch], bm), ch


class TestRenderGlyph:
    def test_scaling_preserves_ink_shape(self):
        for ch in VOCAB:
            bm = glyph_bitmap(ch)
            big = render_glyph(ch, bm.shape[0] * 4, bm.shape[1] * 4)
            assert np.array_equal(big[::4, ::4], bm)

    def test_unknown_glyph_raises(self):
        with pytest.raises(KeyError):
            glyph_bitmap("?")
