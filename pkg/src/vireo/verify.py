"""Final-state verification: decide pass/fail from a clip's last frame.

Each task family gets a verifier that reads the model's output the hard way
— OCR for digits and letters, HSV segmentation for marked regions and bars,
perspective rectification for grids, SSIM/edge overlap for boards, embedding
similarity and grounding for object scenes — and compares the reading
against the sample's typed ground truth.  ``verify_final`` dispatches on the
truth variant, routing time-dependent tasks to the ``track`` module.

A failed reading (unreadable grid, missing marker) is a *fail*: unreadable
output is a defect of the generated video.  Broken infrastructure (embedder
or grounder crash) is a *metric error*, a distinct verdict state that
excludes the generation from scoring instead of blaming the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import track as _track
from .core import (
    BarOrder,
    ChoiceLetter,
    ConfigError,
    DigitSequence,
    EliminationOrder,
    ExprResult,
    Frame,
    MazeTruth,
    MetricError,
    ObjectSet,
    PixelTarget,
    QASet,
    SudokuGrid,
    TargetRegion,
    Task,
    TaskSample,
    Verdict,
    VideoClip,
)
from .expr import ExprError, parse_expression
from .glyphs import glyph_bitmap
from .imgproc import (
    BBox,
    binarize,
    connected_components,
    edge_map,
    find_quad,
    homography_from_points,
    hue_in_bands,
    resize_nearest,
    rgb_to_hsv,
    ssim,
    to_gray,
    warp_perspective,
)
from .modelio import ColorGrounder, Embedder, Grounder, JudgeClient, PatchHistogramEmbedder

__all__ = [
    "ExprError",
    "VerifierDeps",
    "VerifyConfig",
    "parse_expression",
    "verify_arithmetic",
    "verify_digit_sequence",
    "verify_embedding_region",
    "verify_final",
    "verify_grounded",
    "verify_match3",
    "verify_multichoice",
    "verify_qa",
    "verify_sorting",
    "verify_sudoku",
]


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerifyConfig:
    """Decision thresholds and color bands; all overridable per run."""

    # Glyph matching is decided by argmax over candidates; the threshold only
    # rejects ink that resembles no glyph at all.  Perspective-warped digits
    # (sudoku cells) blur thin strokes, so the floor sits well below typical
    # axis-aligned match scores (~0.95): the worst true match observed across
    # rendered grids is ~0.73, the floor keeps margin under that.
    ncc_threshold: float = 0.70
    embed_threshold: float = 0.85
    ssim_threshold: float = 0.70
    edge_overlap_threshold: float = 0.60
    red_hue_bands: tuple[tuple[float, float], ...] = ((0.0, 10.0), (350.0, 360.0))
    red_min_saturation: float = 0.5
    red_min_value: float = 0.3
    blue_hue_bands: tuple[tuple[float, float], ...] = ((200.0, 260.0),)
    blue_min_saturation: float = 0.4
    min_marker_area: int = 100
    ink_threshold: int = 128

    def __post_init__(self) -> None:
        for name in (
            "ncc_threshold",
            "embed_threshold",
            "ssim_threshold",
            "edge_overlap_threshold",
        ):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ConfigError(f"{name} must lie in (0, 1), got {value}")


def _verdict(
    metric: str,
    passed: bool,
    evidence: Mapping,
    error: str | None = None,
) -> Verdict:
    # sample identity is attached later by verify_final
    return Verdict(
        sample_id="",
        generation_index=0,
        passed=passed,
        metric=metric,
        evidence=evidence,
        error=error,
    )


# ---------------------------------------------------------------------------
# glyph reading
# ---------------------------------------------------------------------------


def _scale_mask(mask: np.ndarray, w: int, h: int) -> np.ndarray:
    """Nearest-neighbour rescale of a boolean mask to (w, h)."""
    ys = (np.arange(h) * mask.shape[0]) // h
    xs = (np.arange(w) * mask.shape[1]) // w
    return mask[np.ix_(ys, xs)]


def _contains(outer: BBox, inner: BBox) -> bool:
    """True when ``inner`` lies entirely within ``outer``."""
    return (
        outer.x <= inner.x
        and outer.y <= inner.y
        and inner.x + inner.w <= outer.x + outer.w
        and inner.y + inner.h <= outer.y + outer.h
    )


def _ncc(a: np.ndarray, b: np.ndarray) -> float:
    """Zero-mean normalized correlation of two equal-size masks."""
    av = a.astype(np.float64).ravel()
    bv = b.astype(np.float64).ravel()
    av -= av.mean()
    bv -= bv.mean()
    na = float(np.linalg.norm(av))
    nb = float(np.linalg.norm(bv))
    if na == 0.0 or nb == 0.0:
        # constant masks: identical constants correlate perfectly
        return 1.0 if na == nb and a[0, 0] == b[0, 0] else 0.0
    return float(av @ bv / (na * nb))


def _tight_crop(mask: np.ndarray) -> np.ndarray | None:
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return None
    return mask[ys.min(): ys.max() + 1, xs.min(): xs.max() + 1]


def _read_glyph(
    ink: np.ndarray, candidates: str, threshold: float
) -> tuple[str | None, float]:
    """Best-matching glyph for an ink mask, or None below the threshold.

    Candidate bitmaps are rescaled to the crop's size with the same
    nearest-neighbour rule the renderer uses, so a clean rendering of a
    vocabulary glyph correlates near 1.0 with its own template.
    """
    crop = _tight_crop(ink)
    if crop is None:
        return None, 0.0
    h, w = crop.shape
    best: str | None = None
    best_score = -1.0
    for ch in candidates:
        template = _scale_mask(glyph_bitmap(ch), w, h)
        score = _ncc(crop, template)
        if score > best_score:
            best, best_score = ch, score
    if best_score < threshold:
        return None, best_score
    return best, best_score


def _ink_mask(gray: np.ndarray, threshold: int) -> np.ndarray:
    return gray < threshold


# ---------------------------------------------------------------------------
# grid reading (sudoku)
# ---------------------------------------------------------------------------

_CELL_WARP = 90  # rectified cell side in pixels
_CELL_INSET = 14  # margin stripped per cell side to drop lattice lines
_MIN_INK = 8  # fewer dark pixels than this reads as a blank cell


def verify_sudoku(
    final: Frame, truth: SudokuGrid, cfg: VerifyConfig | None = None
) -> Verdict:
    """Rectify the grid and read every cell; pass iff it equals the solution.

    Pipeline: edge map -> binarize -> enclosing quadrilateral of the largest
    edge component -> homography onto a square of side 90·n -> per-cell
    glyph correlation.  An unreadable grid or cell is a fail (the video is
    the defect), never an exception.
    """
    cfg = cfg or VerifyConfig()
    side = truth.side
    gray = to_gray(final)
    edges = binarize(edge_map(gray)).mask
    try:
        quad = find_quad(edges)
    except ValueError:
        return _verdict("sudoku_ncc", False, {"reason": "grid not found"})
    size = _CELL_WARP * side
    H = homography_from_points(
        np.array(quad), np.array([(0, 0), (size, 0), (size, size), (0, size)])
    )
    warped = warp_perspective(gray, H, (size, size))
    read: list[list[int]] = []
    unrecognized: list[list[int]] = []
    for r in range(side):
        row = []
        for c in range(side):
            cell = warped[
                r * _CELL_WARP + _CELL_INSET: (r + 1) * _CELL_WARP - _CELL_INSET,
                c * _CELL_WARP + _CELL_INSET: (c + 1) * _CELL_WARP - _CELL_INSET,
            ]
            ink = _ink_mask(cell, cfg.ink_threshold)
            if int(ink.sum()) < _MIN_INK:
                row.append(0)
                continue
            digit, _score = _read_glyph(
                ink, "123456789"[:side], cfg.ncc_threshold
            )
            if digit is None:
                row.append(-1)
                unrecognized.append([r, c])
            else:
                row.append(int(digit))
        read.append(row)
    expected = [list(r) for r in truth.solution]
    mismatches = [
        [r, c]
        for r in range(side)
        for c in range(side)
        if read[r][c] != expected[r][c]
    ]
    evidence = {"read_back": read, "mismatches": mismatches}
    if unrecognized:
        evidence["unrecognized"] = unrecognized
    return _verdict("sudoku_ncc", not mismatches, evidence)


# ---------------------------------------------------------------------------
# text reading (arithmetic, digit sequences)
# ---------------------------------------------------------------------------


def _row_clusters(comps):
    """Group components into horizontal rows by y-interval overlap."""
    rows: list[list] = []
    for comp in sorted(comps, key=lambda c: c.bbox.y):
        y0, y1 = comp.bbox.y, comp.bbox.y + comp.bbox.h
        for row in rows:
            ry0 = min(c.bbox.y for c in row)
            ry1 = max(c.bbox.y + c.bbox.h for c in row)
            if min(y1, ry1) - max(y0, ry0) > 0:
                row.append(comp)
                break
        else:
            rows.append([comp])
    return rows


def _merge_x_overlapping(comps):
    """Merge components whose x-intervals overlap into glyph clusters.

    Multi-part glyphs ('=' bars, '÷' bar and dots) occupy the same column
    band, so column overlap is what separates glyphs in a row.
    """
    clusters: list[list] = []
    for comp in sorted(comps, key=lambda c: c.bbox.x):
        x0, x1 = comp.bbox.x, comp.bbox.x + comp.bbox.w
        if clusters:
            last = clusters[-1]
            lx1 = max(c.bbox.x + c.bbox.w for c in last)
            lx0 = min(c.bbox.x for c in last)
            overlap = min(x1, lx1) - max(x0, lx0)
            if overlap > 0.4 * min(x1 - x0, lx1 - lx0):
                last.append(comp)
                continue
        clusters.append([comp])
    return clusters


def _cluster_mask(ink: np.ndarray, labels: np.ndarray, cluster) -> np.ndarray:
    ids = {c.id for c in cluster}
    return np.isin(labels, list(ids))


def _read_text_row(
    ink: np.ndarray, candidates: str, cfg: VerifyConfig
) -> tuple[str, list[dict]]:
    """Read the dominant glyph row of an ink mask left to right."""
    from .imgproc import label_mask

    comps = connected_components(ink)
    if not comps:
        return "", []
    rows = _row_clusters(comps)
    row = max(rows, key=lambda r: sum(c.area for c in r))
    labels, _ = label_mask(ink)
    text = []
    readings = []
    for cluster in _merge_x_overlapping(row):
        mask = _cluster_mask(ink, labels, cluster)
        ch, score = _read_glyph(mask, candidates, cfg.ncc_threshold)
        x = min(c.bbox.x for c in cluster)
        readings.append({"x": x, "glyph": ch, "score": round(score, 4)})
        text.append(ch if ch is not None else "?")
    return "".join(text), readings


def verify_arithmetic(
    final: Frame, truth: ExprResult, cfg: VerifyConfig | None = None
) -> Verdict:
    """Read the equation row and check the answer right of ``=``.

    Passes when the read-back answer matches the truth textually (either the
    stored expression text or the canonical value) or evaluates to the same
    rational number.
    """
    cfg = cfg or VerifyConfig()
    gray = to_gray(final)
    ink = _ink_mask(gray, cfg.ink_threshold)
    text, readings = _read_text_row(ink, "0123456789+-×÷=", cfg)
    evidence: dict = {"read_back": text, "glyphs": readings}
    if "?" in text:
        evidence["reason"] = "unrecognized glyph"
        return _verdict("arithmetic_ocr", False, evidence)
    if text.count("=") != 1:
        evidence["reason"] = "expected exactly one equals sign"
        return _verdict("arithmetic_ocr", False, evidence)
    answer = text.split("=")[1]
    evidence["answer"] = answer
    textual = answer != "" and (answer == truth.text or answer == str(truth.value))
    computed = False
    if answer:
        try:
            computed = parse_expression(answer) == Fraction(truth.value)
        except ExprError as exc:
            evidence["parse_error"] = str(exc)
    evidence["textual_match"] = textual
    evidence["computed_match"] = computed
    return _verdict("arithmetic_ocr", textual or computed, evidence)


def verify_digit_sequence(
    final: Frame, truth: DigitSequence, cfg: VerifyConfig | None = None
) -> Verdict:
    """Read the digits left to right; pass iff they equal the truth."""
    cfg = cfg or VerifyConfig()
    gray = to_gray(final)
    ink = _ink_mask(gray, cfg.ink_threshold)
    text, readings = _read_text_row(ink, "0123456789", cfg)
    evidence: dict = {
        "read_back": text,
        "expected": "".join(str(d) for d in truth.digits),
        "glyphs": readings,
    }
    if not text:
        evidence["reason"] = "no glyphs found"
        return _verdict("digit_sequence_ocr", False, evidence)
    if "?" in text:
        evidence["reason"] = "unrecognized glyph"
        return _verdict("digit_sequence_ocr", False, evidence)
    passed = tuple(int(ch) for ch in text) == truth.digits
    return _verdict("digit_sequence_ocr", passed, evidence)


# ---------------------------------------------------------------------------
# marked-choice reading
# ---------------------------------------------------------------------------


def verify_multichoice(
    final: Frame, truth: ChoiceLetter, cfg: VerifyConfig | None = None
) -> Verdict:
    """Find the single red marker and read the letter inside it.

    Zero or multiple red regions above the area floor is an ambiguous
    selection and fails outright.
    """
    cfg = cfg or VerifyConfig()
    h, s, v = rgb_to_hsv(final.pixels)
    mask = (
        hue_in_bands(h, cfg.red_hue_bands)
        & (s >= cfg.red_min_saturation)
        & (v >= cfg.red_min_value)
    )
    regions = [
        c for c in connected_components(mask) if c.area > cfg.min_marker_area
    ]
    if len(regions) != 1:
        return _verdict(
            "multichoice_ocr",
            False,
            {"reason": "ambiguous selection", "n_red_regions": len(regions)},
        )
    box = regions[0].bbox
    inset_x = max(2, round(box.w * 0.2))
    inset_y = max(2, round(box.h * 0.2))
    gray = to_gray(final)
    inner = gray[
        box.y + inset_y: box.y + box.h - inset_y,
        box.x + inset_x: box.x + box.w - inset_x,
    ]
    if inner.size == 0:
        return _verdict(
            "multichoice_ocr", False, {"reason": "marker region too small"}
        )
    letter, score = _read_glyph(
        _ink_mask(inner, cfg.ink_threshold), "ABCD", cfg.ncc_threshold
    )
    evidence = {"letter": letter, "score": round(score, 4), "expected": truth.letter}
    if letter is None:
        evidence["reason"] = "unrecognized letter"
        return _verdict("multichoice_ocr", False, evidence)
    return _verdict("multichoice_ocr", letter == truth.letter, evidence)


# ---------------------------------------------------------------------------
# bar order
# ---------------------------------------------------------------------------


def verify_sorting(
    final: Frame, truth: BarOrder, cfg: VerifyConfig | None = None
) -> Verdict:
    """Segment the bars and compare relative height ranks, left to right."""
    cfg = cfg or VerifyConfig()
    h, s, _v = rgb_to_hsv(final.pixels)
    mask = hue_in_bands(h, cfg.blue_hue_bands) & (s >= cfg.blue_min_saturation)
    regions = [
        c for c in connected_components(mask) if c.area > cfg.min_marker_area
    ]
    # Bar labels punch white glyphs into the bars; enclosed glyph counters
    # ('0', '6', ...) survive as small blue islands inside a bar's bbox.
    # Anything nested within another region is such an artifact, not a bar.
    bars = sorted(
        (
            c
            for c in regions
            if not any(
                other is not c and _contains(other.bbox, c.bbox)
                for other in regions
            )
        ),
        key=lambda c: c.bbox.x,
    )
    heights = [c.bbox.h for c in bars]
    evidence: dict = {"n_bars": len(bars), "expected_count": truth.count,
                      "heights": heights}
    if len(bars) != truth.count:
        evidence["reason"] = "bar count mismatch"
        return _verdict("bar_rank", False, evidence)
    order = sorted(range(len(bars)), key=lambda i: (heights[i], i))
    ranks = [0] * len(bars)
    for position, index in enumerate(order):
        ranks[index] = position
    evidence["ranks"] = ranks
    evidence["expected_ranks"] = list(truth.ranks)
    return _verdict("bar_rank", tuple(ranks) == truth.ranks, evidence)


# ---------------------------------------------------------------------------
# structural similarity (tile boards)
# ---------------------------------------------------------------------------


def verify_match3(
    final: Frame, truth: PixelTarget, cfg: VerifyConfig | None = None
) -> Verdict:
    """Pass iff grayscale SSIM and edge overlap both clear their thresholds."""
    cfg = cfg or VerifyConfig()
    target = truth.frame
    resized = False
    if target.size != final.size:
        target = Frame(
            resize_nearest(target.pixels, (final.width, final.height))
        )
        resized = True
    gf = to_gray(final)
    gt = to_gray(target)
    score = ssim(gf, gt)
    ef = edge_map(gf) > 64
    et = edge_map(gt) > 64
    overlap = float((ef & et).sum() / et.sum()) if et.any() else 1.0
    evidence = {
        "ssim": round(score, 4),
        "edge_overlap": round(overlap, 4),
        "resized": resized,
    }
    passed = score >= cfg.ssim_threshold and overlap >= cfg.edge_overlap_threshold
    return _verdict("ssim_edge", passed, evidence)


# ---------------------------------------------------------------------------
# embedding similarity
# ---------------------------------------------------------------------------


def verify_embedding_region(
    final: Frame,
    truth: TargetRegion,
    embedder: Embedder,
    cfg: VerifyConfig | None = None,
) -> Verdict:
    """Embed the truth's region of the final frame; pass on high cosine."""
    cfg = cfg or VerifyConfig()
    box = truth.bbox
    if (
        box.x < 0
        or box.y < 0
        or box.x + box.w > final.width
        or box.y + box.h > final.height
    ):
        return _verdict(
            "embed_cosine",
            False,
            {"bbox": box.to_json()},
            error="target region lies outside the frame",
        )
    crop = Frame(final.pixels[box.y: box.y + box.h, box.x: box.x + box.w])
    try:
        vec = np.asarray(embedder.embed(crop), dtype=np.float64)
    except Exception as exc:
        return _verdict("embed_cosine", False, {}, error=f"embedder failed: {exc}")
    ref = np.asarray(truth.embedding, dtype=np.float64)
    if vec.shape != ref.shape:
        return _verdict(
            "embed_cosine",
            False,
            {"got_dim": vec.size, "ref_dim": ref.size},
            error="embedding dimension mismatch",
        )
    denom = float(np.linalg.norm(vec) * np.linalg.norm(ref))
    if denom == 0.0:
        return _verdict(
            "embed_cosine", False, {}, error="degenerate zero embedding"
        )
    similarity = float(vec @ ref / denom)
    return _verdict(
        "embed_cosine",
        similarity >= cfg.embed_threshold,
        {"similarity": round(similarity, 6)},
    )


# ---------------------------------------------------------------------------
# grounded objects
# ---------------------------------------------------------------------------


class GroundedMode:
    COUNT = "count"
    ODD_ONE_OUT = "odd_one_out"


def verify_grounded(
    final: Frame,
    truth: ObjectSet,
    grounder: Grounder,
    mode: str = GroundedMode.COUNT,
    cfg: VerifyConfig | None = None,
) -> Verdict:
    """Count grounded objects per label, or locate the selected odd object."""
    del cfg  # thresholds live in the grounder itself
    if mode == GroundedMode.COUNT:
        expected = truth.counts_by_label()
        got: dict[str, int] = {}
        for label in sorted(expected):
            try:
                got[label] = len(grounder.ground(final, label))
            except Exception as exc:
                return _verdict(
                    "grounded_count",
                    False,
                    {"label": label},
                    error=f"grounder failed: {exc}",
                )
        mismatched = {
            label: {"expected": expected[label], "got": got[label]}
            for label in expected
            if got[label] != expected[label]
        }
        return _verdict(
            "grounded_count",
            not mismatched,
            {"counts": got, "expected": expected, "mismatched": mismatched},
        )
    if mode == GroundedMode.ODD_ONE_OUT:
        if not truth.objects:
            return _verdict(
                "grounded_odd_one_out",
                False,
                {},
                error="odd-one-out truth has no objects",
            )
        odd = truth.objects[0].bbox
        try:
            dets = grounder.ground(final, "selected")
        except Exception as exc:
            return _verdict(
                "grounded_odd_one_out", False, {}, error=f"grounder failed: {exc}"
            )
        if not dets:
            return _verdict(
                "grounded_odd_one_out", False, {"reason": "nothing selected"}
            )
        best = max(dets, key=lambda d: (d.score, d.bbox.w * d.bbox.h))
        cx = best.bbox.x + best.bbox.w / 2.0
        cy = best.bbox.y + best.bbox.h / 2.0
        inside = (
            odd.x <= cx < odd.x + odd.w and odd.y <= cy < odd.y + odd.h
        )
        return _verdict(
            "grounded_odd_one_out",
            inside,
            {"selected_center": [cx, cy], "odd_bbox": odd.to_json()},
        )
    raise ConfigError(f"unknown grounded mode {mode!r}")


# ---------------------------------------------------------------------------
# judge QA
# ---------------------------------------------------------------------------


def verify_qa(
    clip: VideoClip,
    truth: QASet,
    judge: JudgeClient,
    n_frames: int = 8,
) -> Verdict:
    """Ask each binary question about sampled frames; all answers must match."""
    frames = [
        clip.frames[i] for i in _track.sample_indices(len(clip), n_frames)
    ]
    answers = []
    for item in truth.items:
        try:
            reply = judge.chat(frames, item.question)
        except Exception as exc:
            return _verdict(
                "qa_judge",
                False,
                {"question": item.question},
                error=f"judge failed: {exc}",
            )
        token = reply.strip().split()[0].strip(".,!:;").lower() if reply.strip() else ""
        if token not in ("yes", "no"):
            return _verdict(
                "qa_judge",
                False,
                {"question": item.question, "reply": reply},
                error="unparseable yes/no answer",
            )
        answers.append(
            {
                "question": item.question,
                "expected": item.answer,
                "got": token == "yes",
            }
        )
    passed = all(a["expected"] == a["got"] for a in answers)
    return _verdict("qa_judge", passed, {"answers": answers})


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


@dataclass
class VerifierDeps:
    """Model handles the verifiers may need; built-in mocks by default."""

    embedder: Embedder | None = field(default_factory=PatchHistogramEmbedder)
    grounder: Grounder | None = field(default_factory=ColorGrounder)
    judge: JudgeClient | None = None
    track: _track.TrackConfig = field(default_factory=_track.TrackConfig)


def verify_final(
    sample: TaskSample,
    clip: VideoClip,
    deps: VerifierDeps | None = None,
    cfg: VerifyConfig | None = None,
    generation_index: int = 0,
) -> Verdict:
    """Verify one generated clip against its sample's ground truth.

    Dispatches on the truth variant; maze and elimination truths are judged
    over time via the ``track`` module (maze walks sample every frame so
    cell adjacency is meaningful), everything else from the last frame.
    Frames are nearest-resized to the sample's canvas when a generator
    returned a different resolution, since truth geometry is in canvas
    pixels.
    """
    if len(clip) == 0:
        raise ValueError("cannot verify an empty clip")
    deps = deps or VerifierDeps()
    cfg = cfg or VerifyConfig()
    resized = False
    if clip.frames[0].size != sample.target.size:
        w, h = sample.target.size
        clip = VideoClip(
            frames=tuple(
                Frame(resize_nearest(f.pixels, (w, h))) for f in clip.frames
            ),
            fps=clip.fps,
        )
        resized = True
    final = clip.frames[-1]
    truth = sample.truth

    if isinstance(truth, SudokuGrid):
        verdict = verify_sudoku(final, truth, cfg)
    elif isinstance(truth, ExprResult):
        verdict = verify_arithmetic(final, truth, cfg)
    elif isinstance(truth, ChoiceLetter):
        verdict = verify_multichoice(final, truth, cfg)
    elif isinstance(truth, DigitSequence):
        verdict = verify_digit_sequence(final, truth, cfg)
    elif isinstance(truth, BarOrder):
        verdict = verify_sorting(final, truth, cfg)
    elif isinstance(truth, PixelTarget):
        verdict = verify_match3(final, truth, cfg)
    elif isinstance(truth, TargetRegion):
        if deps.embedder is None:
            raise ConfigError("this sample needs an embedder to verify")
        verdict = verify_embedding_region(final, truth, deps.embedder, cfg)
    elif isinstance(truth, ObjectSet):
        if deps.grounder is None:
            raise ConfigError("this sample needs a grounder to verify")
        mode = (
            GroundedMode.ODD_ONE_OUT
            if sample.task == Task.ODD_ONE_OUT
            else GroundedMode.COUNT
        )
        verdict = verify_grounded(final, truth, deps.grounder, mode, cfg)
    elif isinstance(truth, MazeTruth):
        if deps.grounder is None:
            raise ConfigError("this sample needs a grounder to verify")
        try:
            trajectory = _track.extract_trajectory(
                clip,
                deps.grounder,
                deps.track.agent_label,
                n_samples=max(deps.track.n_samples, len(clip)),
            )
            verdict = _track.verify_maze_trajectory(
                trajectory, truth, deps.track.max_missed
            )
        except MetricError as exc:
            verdict = _verdict("maze_trajectory", False, {}, error=str(exc))
    elif isinstance(truth, EliminationOrder):
        if deps.grounder is None:
            raise ConfigError("this sample needs a grounder to verify")
        verdict = _track.verify_elimination(
            clip, truth, deps.grounder, deps.track.n_samples
        )
    elif isinstance(truth, QASet):
        if deps.judge is None:
            raise ConfigError("this sample needs a judge to verify")
        verdict = verify_qa(clip, truth, deps.judge)
    else:
        raise ConfigError(
            f"no verifier for truth kind {type(truth).__name__!r}"
        )
    evidence = dict(verdict.evidence)
    if resized:
        evidence["resized_to_canvas"] = True
    return replace(
        verdict,
        sample_id=sample.id,
        generation_index=generation_index,
        evidence=evidence,
    )
