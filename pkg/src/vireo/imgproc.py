"""Image-processing primitives for frame verification.

Everything here is implemented directly over numpy arrays — no external CV
dependency — because these routines *are* the measurement instruments of the
benchmark: color segmentation, binarization, connected components, quad
detection + perspective rectification, gradients, SSIM, and normalized
cross-correlation template matching.

Conventions
-----------
- GrayImage: 2-D uint8 array.
- Masks: 2-D bool arrays.
- `binarize` marks pixels *above* the threshold True; verifiers that want
  dark ink invert the mask.
- `edge_map` leaves a one-pixel zero border (the Sobel window never hangs
  off the image).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import BBox, Frame

__all__ = [
    "to_gray",
    "rgb_to_hsv",
    "hue_in_bands",
    "Binarization",
    "binarize",
    "Component",
    "label_mask",
    "connected_components",
    "find_quad",
    "homography_from_points",
    "apply_homography",
    "warp_perspective",
    "edge_map",
    "ssim",
    "MatchResult",
    "match_template",
    "resize_nearest",
]


def _as_gray(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D gray image, got shape {img.shape}")
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8, got {img.dtype}")
    return img


def to_gray(frame: Frame | np.ndarray) -> np.ndarray:
    """ITU-R 601 luma of an RGB frame, rounded to uint8."""
    px = frame.pixels if isinstance(frame, Frame) else np.asarray(frame)
    if px.ndim == 2:
        return px.astype(np.uint8, copy=True)
    if px.ndim != 3 or px.shape[2] != 3:
        raise ValueError(f"expected HxWx3, got {px.shape}")
    r = px[:, :, 0].astype(np.float64)
    g = px[:, :, 1].astype(np.float64)
    b = px[:, :, 2].astype(np.float64)
    return np.round(0.299 * r + 0.587 * g + 0.114 * b).astype(np.uint8)


# ---------------------------------------------------------------------------
# color
# ---------------------------------------------------------------------------

def rgb_to_hsv(frame: Frame | np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-pixel HSV: hue in degrees [0, 360), saturation/value in [0, 1].

    Achromatic pixels (saturation 0) get hue 0 by convention.
    """
    px = frame.pixels if isinstance(frame, Frame) else np.asarray(frame)
    if px.ndim != 3 or px.shape[2] != 3:
        raise ValueError(f"expected HxWx3, got {px.shape}")
    rgb = px.astype(np.float64) / 255.0
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    maxc = rgb.max(axis=2)
    minc = rgb.min(axis=2)
    delta = maxc - minc

    v = maxc
    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)

    # hue sectors; guard division by zero where delta == 0
    safe = np.where(delta > 0, delta, 1.0)
    h_r = ((g - b) / safe) % 6.0
    h_g = (b - r) / safe + 2.0
    h_b = (r - g) / safe + 4.0
    h = np.where(
        delta == 0,
        0.0,
        np.where(maxc == r, h_r, np.where(maxc == g, h_g, h_b)),
    )
    h = (h * 60.0) % 360.0
    h = np.where(s == 0, 0.0, h)
    return h, s, v


def hue_in_bands(
    hue: np.ndarray, bands: tuple[tuple[float, float], ...]
) -> np.ndarray:
    """Boolean mask of hue values falling inside any [lo, hi) degree band."""
    out = np.zeros(hue.shape, dtype=bool)
    for lo, hi in bands:
        out |= (hue >= lo) & (hue < hi)
    return out


# ---------------------------------------------------------------------------
# binarization (Otsu)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Binarization:
    mask: np.ndarray  # bool, True where pixel value > threshold
    threshold: int
    fallback: bool  # True when Otsu degenerated and Fixed(128) was used


def binarize(img: np.ndarray, threshold: int | None = None) -> Binarization:
    """Threshold a gray image: Otsu by default, or a fixed threshold.

    Otsu maximizes between-class variance over all 256 candidate thresholds,
    breaking ties toward the lower threshold.  A constant image has no
    between-class variance anywhere; it falls back to Fixed(128) and flags it.
    """
    img = _as_gray(img)
    if threshold is not None:
        if not (0 <= threshold <= 255):
            raise ValueError(f"threshold {threshold} outside 0..255")
        return Binarization(mask=img > threshold, threshold=int(threshold), fallback=False)

    hist = np.bincount(img.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    omega0 = np.cumsum(hist)  # pixels with value <= t
    mu_t = np.cumsum(hist * np.arange(256.0))
    mu_total = mu_t[-1]
    omega1 = total - omega0
    valid = (omega0 > 0) & (omega1 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = mu_t / omega0
        mu1 = (mu_total - mu_t) / omega1
        sigma_b = omega0 * omega1 * (mu0 - mu1) ** 2
    sigma_b = np.where(valid, sigma_b, 0.0)
    if not np.any(sigma_b > 0):
        return Binarization(mask=img > 128, threshold=128, fallback=True)
    t = int(np.argmax(sigma_b))  # argmax takes the first (lowest) maximum
    return Binarization(mask=img > t, threshold=t, fallback=False)


# ---------------------------------------------------------------------------
# connected components (4-connectivity)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Component:
    id: int
    area: int
    bbox: BBox


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self) -> None:
        self.parent: list[int] = []

    def make(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def label_mask(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected labelling of a boolean mask.

    Returns (labels, n) with labels[y, x] in 0..n-1 for True pixels and -1
    elsewhere.  Uses row-run encoding + union-find, so cost scales with the
    number of runs rather than full image area.
    """
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.dtype != np.bool_:
        raise ValueError("mask must be a 2-D bool array")
    h, w = mask.shape
    labels = np.full((h, w), -1, dtype=np.int32)
    uf = _UnionFind()
    # runs[r] = list of (x_start, x_end_exclusive, set_id)
    prev_runs: list[tuple[int, int, int]] = []
    all_runs: list[tuple[int, int, int, int]] = []  # (row, xs, xe, set_id)
    padded = np.zeros(w + 2, dtype=np.int8)
    for y in range(h):
        padded[1:-1] = mask[y]
        diff = np.diff(padded)
        starts = np.flatnonzero(diff == 1)
        ends = np.flatnonzero(diff == -1)
        runs: list[tuple[int, int, int]] = []
        j = 0
        for xs, xe in zip(starts.tolist(), ends.tolist()):
            rid = uf.make()
            # merge with overlapping runs in the previous row (4-connectivity:
            # column intervals must intersect)
            while j < len(prev_runs) and prev_runs[j][1] <= xs:
                j += 1
            k = j
            while k < len(prev_runs) and prev_runs[k][0] < xe:
                uf.union(rid, prev_runs[k][2])
                k += 1
            # next run in this row may also touch prev_runs[k-1]; rewind one
            if k > j:
                j = k - 1
            runs.append((xs, xe, rid))
            all_runs.append((y, xs, xe, rid))
        prev_runs = runs

    # compact roots to dense component indices
    root_to_idx: dict[int, int] = {}
    for y, xs, xe, rid in all_runs:
        root = uf.find(rid)
        idx = root_to_idx.setdefault(root, len(root_to_idx))
        labels[y, xs:xe] = idx
    return labels, len(root_to_idx)


def connected_components(mask: np.ndarray) -> list[Component]:
    """4-connected components sorted by pixel count descending.

    Ties break by bounding-box (y, x).  Component ids index into the order
    produced by `label_mask` on the same mask.
    """
    labels, n = label_mask(mask)
    if n == 0:
        return []
    flat = labels.ravel()
    sel = flat >= 0
    idx = flat[sel]
    areas = np.bincount(idx, minlength=n)
    ys, xs = np.nonzero(labels >= 0)
    lab = labels[ys, xs]
    order = np.argsort(lab, kind="stable")
    ys, xs, lab = ys[order], xs[order], lab[order]
    bounds = np.searchsorted(lab, np.arange(n + 1))
    comps: list[Component] = []
    for i in range(n):
        sl = slice(bounds[i], bounds[i + 1])
        y0, y1 = int(ys[sl].min()), int(ys[sl].max())
        x0, x1 = int(xs[sl].min()), int(xs[sl].max())
        comps.append(
            Component(
                id=i,
                area=int(areas[i]),
                bbox=BBox(x0, y0, x1 - x0 + 1, y1 - y0 + 1),
            )
        )
    comps.sort(key=lambda c: (-c.area, c.bbox.y, c.bbox.x))
    return comps


# ---------------------------------------------------------------------------
# quadrilateral detection
# ---------------------------------------------------------------------------

def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns hull vertices counter-clockwise in
    mathematical orientation (clockwise on screen with y down)."""
    pts = np.unique(points, axis=0)
    if len(pts) < 3:
        return pts.astype(np.float64)
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))].astype(np.float64)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=np.float64)


def _line_intersection(p1, p2, p3, p4) -> np.ndarray | None:
    """Intersection of lines (p1,p2) and (p3,p4); None if near parallel."""
    d1 = p2 - p1
    d2 = p4 - p3
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(denom) < 1e-12:
        return None
    t = ((p3[0] - p1[0]) * d2[1] - (p3[1] - p1[1]) * d2[0]) / denom
    return p1 + t * d1


def _poly_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def find_quad(mask: np.ndarray) -> tuple[tuple[float, float], ...]:
    """Minimal enclosing quadrilateral of the largest component.

    Convex hull followed by iterative vertex reduction: while more than four
    vertices remain, replace the adjacent vertex pair whose edge-line
    intersection adds the least area.  Corners come back ordered TL, TR, BR,
    BL (by angle around the centroid, starting top-left).
    """
    comps = connected_components(mask)
    if not comps:
        raise ValueError("find_quad: mask has no components")
    labels, _ = label_mask(mask)
    ys, xs = np.nonzero(labels == comps[0].id)
    pts = np.stack([xs, ys], axis=1)
    hull = _convex_hull(pts)
    if len(hull) < 3 or _poly_area(hull) < 1.0:
        raise ValueError("find_quad: largest component is degenerate")

    verts = [hull[i] for i in range(len(hull))]
    while len(verts) > 4:
        n = len(verts)
        best_cost = math.inf
        best: tuple[int, np.ndarray] | None = None
        for i in range(n):
            a, b = verts[i - 1], verts[i]
            c, d = verts[(i + 1) % n], verts[(i + 2) % n]
            p = _line_intersection(a, b, d, c)
            if p is None:
                continue
            # p must lie on the outward extensions of both edges, otherwise
            # replacing (b, c) with p would cut into the hull
            tb = np.dot(p - a, b - a)
            tc = np.dot(p - d, c - d)
            if tb <= np.dot(b - a, b - a) - 1e-9 or tc <= np.dot(c - d, c - d) - 1e-9:
                continue
            cost = _poly_area(np.array([b, p, c]))
            if cost < best_cost:
                best_cost = cost
                best = (i, p)
        if best is None:
            # fall back to the four extreme points (always encloses the hull
            # corners of near-axis-aligned shapes)
            arr = np.array(verts)
            s = arr[:, 0] + arr[:, 1]
            d = arr[:, 0] - arr[:, 1]
            idxs = {int(np.argmin(s)), int(np.argmax(d)),
                    int(np.argmax(s)), int(np.argmin(d))}
            if len(idxs) != 4:
                raise ValueError("find_quad: could not reduce hull to a quad")
            verts = [verts[i] for i in sorted(idxs)]
            break
        i, p = best
        n = len(verts)
        verts = [v for j, v in enumerate(verts) if j not in (i, (i + 1) % n)]
        verts.insert(i % len(verts) if i < len(verts) else len(verts), p)

    quad = np.array(verts, dtype=np.float64)
    if len(quad) != 4 or _poly_area(quad) < 1.0:
        raise ValueError("find_quad: degenerate quadrilateral")

    # order corners by angle around the centroid, starting at the top-left
    cx, cy = quad[:, 0].mean(), quad[:, 1].mean()
    ang = np.arctan2(quad[:, 1] - cy, quad[:, 0] - cx)
    order = np.argsort(ang)  # screen coords: increasing angle = clockwise
    quad = quad[order]
    tl = int(np.argmin(quad[:, 0] + quad[:, 1]))
    quad = np.roll(quad, -tl, axis=0)
    return tuple((float(x), float(y)) for x, y in quad)


# ---------------------------------------------------------------------------
# homography (4-point DLT) + perspective warp
# ---------------------------------------------------------------------------

def _check_not_collinear(pts: np.ndarray, name: str) -> None:
    for i in range(4):
        for j in range(i + 1, 4):
            for k in range(j + 1, 4):
                a, b, c = pts[i], pts[j], pts[k]
                area = abs(
                    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
                )
                if area < 1e-9:
                    raise ValueError(
                        f"homography_from_points: three {name} points collinear"
                    )


def homography_from_points(
    src: "np.ndarray | tuple",
    dst: "np.ndarray | tuple",
) -> np.ndarray:
    """Direct linear transform from exactly four point correspondences.

    Returns a 3x3 matrix H with H[2,2] == 1 mapping src -> dst homogeneously.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != (4, 2) or dst.shape != (4, 2):
        raise ValueError("homography_from_points needs exactly four 2-D points each")
    _check_not_collinear(src, "source")
    _check_not_collinear(dst, "destination")

    a = np.zeros((8, 8), dtype=np.float64)
    b = np.zeros(8, dtype=np.float64)
    for i in range(4):
        x, y = src[i]
        u, v = dst[i]
        a[2 * i] = [x, y, 1, 0, 0, 0, -x * u, -y * u]
        b[2 * i] = u
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -x * v, -y * v]
        b[2 * i + 1] = v
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        raise ValueError("homography_from_points: correspondences are singular")
    H = np.array(
        [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]],
        dtype=np.float64,
    )
    if abs(np.linalg.det(H)) <= 1e-9:
        raise ValueError("homography_from_points: matrix is singular")
    return H


def apply_homography(H: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Map an (N, 2) point array through a homography."""
    pts = np.asarray(points, dtype=np.float64)
    ones = np.ones((pts.shape[0], 1))
    hom = np.concatenate([pts, ones], axis=1) @ H.T
    return hom[:, :2] / hom[:, 2:3]


def warp_perspective(
    img: np.ndarray, H: np.ndarray, size: tuple[int, int]
) -> np.ndarray:
    """Inverse-mapped bilinear warp of a gray image to (width, height).

    Destination pixels that map outside the source read as black.
    """
    img = _as_gray(img)
    w, h = size
    if w < 1 or h < 1:
        raise ValueError("warp size must be positive")
    Hinv = np.linalg.inv(H)
    xs, ys = np.meshgrid(np.arange(w, dtype=np.float64),
                         np.arange(h, dtype=np.float64))
    denom = Hinv[2, 0] * xs + Hinv[2, 1] * ys + Hinv[2, 2]
    denom = np.where(np.abs(denom) < 1e-12, 1e-12, denom)
    sx = (Hinv[0, 0] * xs + Hinv[0, 1] * ys + Hinv[0, 2]) / denom
    sy = (Hinv[1, 0] * xs + Hinv[1, 1] * ys + Hinv[1, 2]) / denom

    ih, iw = img.shape
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0

    def sample(yy: np.ndarray, xx: np.ndarray) -> np.ndarray:
        inside = (yy >= 0) & (yy < ih) & (xx >= 0) & (xx < iw)
        vals = np.zeros(yy.shape, dtype=np.float64)
        vals[inside] = img[yy[inside], xx[inside]]
        return vals

    v00 = sample(y0, x0)
    v01 = sample(y0, x0 + 1)
    v10 = sample(y0 + 1, x0)
    v11 = sample(y0 + 1, x0 + 1)
    top = v00 * (1 - fx) + v01 * fx
    bot = v10 * (1 - fx) + v11 * fx
    out = top * (1 - fy) + bot * fy
    return np.clip(np.round(out), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------

def edge_map(img: np.ndarray) -> np.ndarray:
    """Sobel 3x3 gradient magnitude, clamped to uint8.

    The border ring stays zero (the kernel is only applied where it fits).
    """
    img = _as_gray(img)
    h, w = img.shape
    if h < 3 or w < 3:
        raise ValueError(f"edge_map needs at least 3x3, got {h}x{w}")
    p = img.astype(np.int64)
    # separable Sobel: smooth [1,2,1] one axis, differentiate [-1,0,1] other
    sv = p[:-2, :] + 2 * p[1:-1, :] + p[2:, :]  # vertical smoothing (rows)
    gx = sv[:, 2:] - sv[:, :-2]
    sh = p[:, :-2] + 2 * p[:, 1:-1] + p[:, 2:]  # horizontal smoothing (cols)
    gy = sh[2:, :] - sh[:-2, :]
    mag = np.sqrt(gx.astype(np.float64) ** 2 + gy.astype(np.float64) ** 2)
    out = np.zeros((h, w), dtype=np.uint8)
    out[1:-1, 1:-1] = np.clip(np.round(mag), 0, 255).astype(np.uint8)
    return out


# ---------------------------------------------------------------------------
# SSIM
# ---------------------------------------------------------------------------

_SSIM_WIN = 8
_SSIM_STRIDE = 4
_SSIM_C1 = (0.01 * 255.0) ** 2
_SSIM_C2 = (0.03 * 255.0) ** 2


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean structural similarity over 8x8 windows with stride 4.

    Uses population moments per window and the standard stabilizers
    C1 = (0.01 * 255)^2, C2 = (0.03 * 255)^2.  Result lies in [-1, 1].
    """
    a = _as_gray(a)
    b = _as_gray(b)
    if a.shape != b.shape:
        raise ValueError(f"ssim needs equal shapes, got {a.shape} vs {b.shape}")
    h, w = a.shape
    if h < _SSIM_WIN or w < _SSIM_WIN:
        raise ValueError(f"ssim needs at least {_SSIM_WIN}x{_SSIM_WIN} images")

    wa = np.lib.stride_tricks.sliding_window_view(a, (_SSIM_WIN, _SSIM_WIN))
    wb = np.lib.stride_tricks.sliding_window_view(b, (_SSIM_WIN, _SSIM_WIN))
    wa = wa[::_SSIM_STRIDE, ::_SSIM_STRIDE].astype(np.float64)
    wb = wb[::_SSIM_STRIDE, ::_SSIM_STRIDE].astype(np.float64)

    mu_a = wa.mean(axis=(-1, -2))
    mu_b = wb.mean(axis=(-1, -2))
    var_a = (wa * wa).mean(axis=(-1, -2)) - mu_a * mu_a
    var_b = (wb * wb).mean(axis=(-1, -2)) - mu_b * mu_b
    cov = (wa * wb).mean(axis=(-1, -2)) - mu_a * mu_b

    num = (2 * mu_a * mu_b + _SSIM_C1) * (2 * cov + _SSIM_C2)
    den = (mu_a**2 + mu_b**2 + _SSIM_C1) * (var_a + var_b + _SSIM_C2)
    return float(np.mean(num / den))


# ---------------------------------------------------------------------------
# template matching (zero-mean NCC)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatchResult:
    score: float
    x: int
    y: int


def match_template(img: np.ndarray, template: np.ndarray) -> MatchResult:
    """Best placement of `template` in `img` by normalized cross-correlation.

    Zero-variance windows score 0; a zero-variance template is an error.
    Ties resolve to the smallest (y, x).
    """
    img = _as_gray(img)
    tpl = _as_gray(template)
    th, tw = tpl.shape
    ih, iw = img.shape
    if th > ih or tw > iw:
        raise ValueError(
            f"template {tw}x{th} larger than image {iw}x{ih}"
        )
    t = tpl.astype(np.float64)
    t = t - t.mean()
    t_norm = math.sqrt(float((t * t).sum()))
    if t_norm < 1e-12:
        raise ValueError("match_template: template has zero variance")

    windows = np.lib.stride_tricks.sliding_window_view(img, (th, tw)).astype(
        np.float64
    )
    n = th * tw
    win_sum = windows.sum(axis=(-1, -2))
    win_sq = (windows * windows).sum(axis=(-1, -2))
    cross = np.einsum("yxij,ij->yx", windows, t)
    # windows are centered implicitly: sum((w - mean_w) * t) == sum(w*t)
    # because t is zero-mean already
    win_var = win_sq - win_sum * win_sum / n
    win_var = np.maximum(win_var, 0.0)
    denom = np.sqrt(win_var) * t_norm
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = np.where(denom > 1e-12, cross / denom, 0.0)
    scores = np.clip(scores, -1.0, 1.0)
    flat_idx = int(np.argmax(scores))  # first max = smallest (y, x)
    y, x = divmod(flat_idx, scores.shape[1])
    return MatchResult(score=float(scores[y, x]), x=int(x), y=int(y))


# ---------------------------------------------------------------------------
# resize
# ---------------------------------------------------------------------------

def resize_nearest(img: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    """Nearest-neighbour resize to (width, height); works for 2-D and 3-D."""
    img = np.asarray(img)
    w, h = size
    if w < 1 or h < 1:
        raise ValueError("resize target must be positive")
    src_h, src_w = img.shape[:2]
    ys = (np.arange(h) * src_h) // h
    xs = (np.arange(w) * src_w) // w
    return img[np.ix_(ys, xs)]
