"""Parking-line, parking-space, and arrow perception on aerial images.

All image points are (x, y) = (column, row) pixel coordinates. A "horizontal"
filter scans along columns within each row and responds to near-vertical
stripes; a "vertical" filter scans along rows within each column and responds
to near-horizontal stripes. Boundary responses are signed: entering a bright
stripe gives a positive peak, leaving it a negative valley, and the median
coordinate of each super-threshold run is kept as a definite point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .control import TurnCommand


@dataclass(frozen=True)
class Roi:
    row0: int
    row1: int
    col0: int
    col1: int

    def contains(self, x: float, y: float) -> bool:
        return self.col0 <= x < self.col1 and self.row0 <= y < self.row1

    def shifted(self, dx: int, dy: int) -> "Roi":
        return Roi(self.row0 + dy, self.row1 + dy, self.col0 + dx, self.col1 + dx)


@dataclass(frozen=True)
class DefinitePoint:
    x: float
    y: float
    polarity: int  # +1 rising boundary, -1 falling
    orientation: str = "horizontal"  # scan orientation it came from


@dataclass(frozen=True)
class LineSegment2D:
    x0: float
    y0: float
    x1: float
    y1: float
    angle_deg: float  # from the image vertical, in (-90, 90]
    inliers: int
    role: str = "unknown"

    @property
    def length(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    @property
    def midpoint(self) -> tuple[float, float]:
        return (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))


@dataclass(frozen=True)
class ParkingSpaceHypothesis:
    split_a: LineSegment2D
    split_b: LineSegment2D
    base: LineSegment2D | None
    quad: tuple  # four (x, y) corners: near-a, near-b, far-b, far-a
    score: float
    side: str


@dataclass(frozen=True)
class ArrowObservation:
    direction: str  # "left" | "right" | "none"
    rising_center: tuple[float, float] | None = None
    falling_center: tuple[float, float] | None = None


@dataclass(frozen=True)
class DebounceState:
    last_direction: str = "none"
    count: int = 0
    rotating: bool = False


@dataclass(frozen=True)
class AlignmentMeasurement:
    left_delta_deg: float | None
    right_delta_deg: float | None
    rear_gap_px: float | None


def line_filter(image: np.ndarray, orientation: str, half_width: int) -> np.ndarray:
    """Signed boundary response: sum of the next half_width samples minus the
    previous half_width along the scan direction; borders stay zero."""
    if half_width < 1:
        raise ValueError("half_width must be at least 1")
    img = np.asarray(image, dtype=np.int32)
    if orientation == "vertical":
        return line_filter(img.T, "horizontal", half_width).T
    if orientation != "horizontal":
        raise ValueError("orientation must be 'horizontal' or 'vertical'")
    w = half_width
    if img.shape[1] <= 2 * w + 1:
        raise ValueError("image too small for the requested filter width")
    csum = np.zeros((img.shape[0], img.shape[1] + 1), dtype=np.int64)
    np.cumsum(img, axis=1, out=csum[:, 1:])
    resp = np.zeros(img.shape, dtype=np.int32)
    cols = np.arange(w, img.shape[1] - w)
    ahead = csum[:, cols + w + 1] - csum[:, cols + 1]
    behind = csum[:, cols] - csum[:, cols - w]
    resp[:, w : img.shape[1] - w] = (ahead - behind).astype(np.int32)
    return resp


def extract_definite_points(
    response_row: np.ndarray, threshold: float, orientation: str = "horizontal", y: float = 0.0
) -> list[DefinitePoint]:
    """Median coordinates of super-threshold runs in a single scanline."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    resp = np.asarray(response_row)
    points = []
    for polarity, mask in ((1, resp > threshold), (-1, resp < -threshold)):
        if not mask.any():
            continue
        padded = np.concatenate(([False], mask, [False]))
        edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
        starts, ends = edges[0::2], edges[1::2] - 1
        for s, e in zip(starts, ends):
            coord = 0.5 * (float(s) + float(e))
            if orientation == "horizontal":
                points.append(DefinitePoint(coord, y, polarity, orientation))
            else:
                points.append(DefinitePoint(y, coord, polarity, orientation))
    points.sort(key=lambda p: (p.x if orientation == "horizontal" else p.y))
    return points


def _definite_points_grid(resp: np.ndarray, threshold: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized run extraction over all rows: (row, median_col, polarity)."""
    rows_out = []
    cols_out = []
    pol_out = []
    ncols = resp.shape[1]
    for polarity in (1, -1):
        mask = resp > threshold if polarity == 1 else resp < -threshold
        if not mask.any():
            continue
        padded = np.zeros((resp.shape[0], ncols + 2), dtype=np.int8)
        padded[:, 1:-1] = mask
        d = np.diff(padded, axis=1)
        r_s, c_s = np.nonzero(d == 1)
        r_e, c_e = np.nonzero(d == -1)
        # starts and ends pair up in order within each row
        rows_out.append(r_s)
        cols_out.append(0.5 * (c_s.astype(np.float64) + (c_e.astype(np.float64) - 1.0)))
        pol_out.append(np.full(r_s.shape, polarity, dtype=np.int8))
    if not rows_out:
        return np.empty(0, int), np.empty(0), np.empty(0, np.int8)
    return np.concatenate(rows_out), np.concatenate(cols_out), np.concatenate(pol_out)


def pair_edges_to_centers(points: list[DefinitePoint], max_line_width: float) -> list[tuple[float, float]]:
    """Adjacent (rising, falling) pairs within the width gate become centers."""
    centers = []
    pending: DefinitePoint | None = None
    horizontal = bool(points) and points[0].orientation == "horizontal"
    for pt in points:
        coord = pt.x if horizontal else pt.y
        if pt.polarity > 0:
            pending = pt
            continue
        if pending is not None:
            start = pending.x if horizontal else pending.y
            if coord - start <= max_line_width and coord > start:
                mid = 0.5 * (start + coord)
                centers.append((mid, pt.y) if horizontal else (pt.x, mid))
            pending = None
    return centers


def _centers_grid(
    image: np.ndarray, roi: Roi, orientation: str, half_width: int, threshold: float, max_line_width: float
) -> np.ndarray:
    """Line-center points (x, y) for every scanline of the ROI, vectorized."""
    crop = image[roi.row0 : roi.row1, roi.col0 : roi.col1]
    work = crop if orientation == "horizontal" else crop.T
    resp = line_filter(work, "horizontal", half_width)
    rows, cols, pol = _definite_points_grid(resp, threshold)
    centers = []
    if rows.size:
        order = np.lexsort((cols, rows))
        rows, cols, pol = rows[order], cols[order], pol[order]
        start = 0
        for idx in range(1, rows.size + 1):
            if idx == rows.size or rows[idx] != rows[start]:
                pending = None
                for j in range(start, idx):
                    if pol[j] > 0:
                        pending = cols[j]
                    elif pending is not None:
                        if cols[j] - pending <= max_line_width and cols[j] > pending:
                            centers.append((rows[start], 0.5 * (pending + cols[j])))
                        pending = None
                start = idx
    if not centers:
        return np.empty((0, 2))
    arr = np.array(centers, dtype=np.float64)  # (scanline, center)
    if orientation == "horizontal":
        xy = np.stack([arr[:, 1] + roi.col0, arr[:, 0] + roi.row0], axis=1)
    else:
        xy = np.stack([arr[:, 0] + roi.col0, arr[:, 1] + roi.row0], axis=1)
    return xy


@dataclass
class _Chain:
    ys: list
    xs: list

    def predict(self, y: float) -> float:
        if len(self.xs) == 1:
            return self.xs[-1]
        n = len(self.xs)
        k = min(n, 6)
        ys = self.ys[-k:]
        xs = self.xs[-k:]
        my = sum(ys) / k
        mx = sum(xs) / k
        denom = sum((yy - my) ** 2 for yy in ys)
        if denom == 0.0:
            return self.xs[-1]
        slope = sum((yy - my) * (xx - mx) for yy, xx in zip(ys, xs)) / denom
        return mx + slope * (y - my)


def fit_parking_lines(
    centers,
    roi: Roi,
    min_inliers: int = 8,
    row_gap: float = 3.0,
    col_gate: float = 2.0,
) -> list[LineSegment2D]:
    """Greedy deterministic chaining of center points followed by a least-squares
    fit per chain; chains run along increasing y, x within the gate of the
    chain's predicted continuation."""
    pts = [(float(p[0]), float(p[1])) for p in centers]
    for x, y in pts:
        if not roi.contains(x, y):
            raise ValueError(f"center point ({x:.1f}, {y:.1f}) lies outside the ROI")
    pts.sort(key=lambda p: (p[1], p[0]))
    open_chains: list[_Chain] = []
    closed: list[_Chain] = []
    for x, y in pts:
        still_open = []
        for chain in open_chains:
            if y - chain.ys[-1] > row_gap:
                closed.append(chain)
            else:
                still_open.append(chain)
        open_chains = still_open
        best = None
        best_err = None
        for chain in open_chains:
            if y <= chain.ys[-1]:
                continue
            err = abs(chain.predict(y) - x)
            if err <= col_gate and (best_err is None or err < best_err):
                best = chain
                best_err = err
        if best is None:
            open_chains.append(_Chain([y], [x]))
        else:
            best.ys.append(y)
            best.xs.append(x)
    closed.extend(open_chains)

    segments = []
    for chain in closed:
        n = len(chain.xs)
        if n < min_inliers:
            continue
        ys = np.array(chain.ys)
        xs = np.array(chain.xs)
        my, mx = ys.mean(), xs.mean()
        denom = float(((ys - my) ** 2).sum())
        slope = float(((ys - my) * (xs - mx)).sum()) / denom if denom > 0 else 0.0
        y0, y1 = float(ys.min()), float(ys.max())
        x0 = mx + slope * (y0 - my)
        x1 = mx + slope * (y1 - my)
        angle = math.degrees(math.atan2(x1 - x0, y1 - y0))
        if angle <= -90.0:
            angle += 180.0
        elif angle > 90.0:
            angle -= 180.0
        segments.append(LineSegment2D(x0, y0, x1, y1, angle, n))
    segments.sort(key=lambda s: (s.y0, s.x0))
    return segments


def _fit_lines_transposed(centers, roi: Roi, **kw) -> list[LineSegment2D]:
    """Fit near-horizontal lines by swapping the axes around the core fit."""
    swapped = [(y, x) for x, y in centers]
    roi_t = Roi(roi.col0, roi.col1, roi.row0, roi.row1)
    out = []
    for seg in fit_parking_lines(swapped, roi_t, **kw):
        angle = 90.0 - seg.angle_deg
        if angle > 90.0:
            angle -= 180.0
        out.append(
            LineSegment2D(seg.y0, seg.x0, seg.y1, seg.x1, angle, seg.inliers, seg.role)
        )
    return out


def angle_between_deg(a: float, b: float) -> float:
    """Fold the angular difference of two undirected lines into [0, 90]."""
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


def infer_base_line(
    split_a: LineSegment2D,
    split_b: LineSegment2D,
    centers,
    parallel_tol_deg: float = 10.0,
    perp_tol_deg: float = 12.0,
    min_inliers: int = 6,
    search_px: float = 10.0,
    far_side: str = "auto",
) -> LineSegment2D | None:
    """Perpendicular segment between the far ends of two parallel split lines."""
    if angle_between_deg(split_a.angle_deg, split_b.angle_deg) > parallel_tol_deg:
        raise ValueError("split lines are not parallel within tolerance")
    row_lo = min(split_a.y0, split_a.y1, split_b.y0, split_b.y1) - 3.0
    row_hi = max(split_a.y0, split_a.y1, split_b.y0, split_b.y1) + 3.0

    def far_col(side: str) -> float:
        if side == "low":
            return 0.5 * (min(split_a.x0, split_a.x1) + min(split_b.x0, split_b.x1))
        return 0.5 * (max(split_a.x0, split_a.x1) + max(split_b.x0, split_b.x1))

    sides = ("low", "high") if far_side == "auto" else (far_side,)
    best = None
    for side in sides:
        fc = far_col(side)
        cand = [
            (x, y)
            for x, y in centers
            if row_lo <= y <= row_hi and abs(x - fc) <= search_px
        ]
        if len(cand) < min_inliers:
            continue
        xs = [c[0] for c in cand]
        ys = [c[1] for c in cand]
        roi = Roi(int(math.floor(min(ys))), int(math.ceil(max(ys))) + 1,
                  int(math.floor(min(xs))), int(math.ceil(max(xs))) + 1)
        for seg in fit_parking_lines(cand, roi, min_inliers=min_inliers):
            mean_split = 0.5 * (split_a.angle_deg + split_b.angle_deg)
            if abs(angle_between_deg(seg.angle_deg, mean_split) - 90.0) > perp_tol_deg:
                continue
            if best is None or seg.inliers > best.inliers:
                best = replace(seg, role="base")
    return best


def match_template(target: np.ndarray, template: np.ndarray) -> float:
    """Zero-mean normalized cross-correlation of two same-size patches."""
    a = np.asarray(target, dtype=np.float64)
    b = np.asarray(template, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("target and template must have the same shape")
    b_dev = b - b.mean()
    b_norm = math.sqrt(float((b_dev**2).sum()))
    if b_norm == 0.0:
        raise ValueError("template has zero variance")
    a_dev = a - a.mean()
    a_norm = math.sqrt(float((a_dev**2).sum()))
    if a_norm == 0.0:
        return 0.0  # blank targets score zero by definition
    score = float((a_dev * b_dev).sum()) / (a_norm * b_norm)
    return max(-1.0, min(1.0, score))


@dataclass(frozen=True)
class Template:
    name: str
    image: np.ndarray
    width_px: int  # separation of the split lines in the template
    aspect: float  # depth / width of the bay it encodes
    width_m: float  # bay width the template was generated from


def build_templates(
    width_m: float = 0.32,
    depth_m: float = 0.55,
    line_width_m: float = 0.035,
    widths_px: tuple[int, ...] = (24, 32, 42),
) -> list[Template]:
    """Synthetic parking-space patches: U-shaped and open variants, both sides,
    three scales. Row 0 is the bay opening, columns run split to split."""
    templates = []
    aspect = depth_m / width_m
    for wpx in widths_px:
        lw = max(2, int(round(line_width_m / (width_m / wpx))))
        rows = int(round(wpx * aspect))
        base_img = np.full((rows, wpx), 90, dtype=np.uint8)
        base_img[:, :lw] = 230
        base_img[:, -lw:] = 230
        open_img = base_img.copy()
        u_img = base_img.copy()
        u_img[-lw:, :] = 230
        for variant, img in (("u", u_img), ("open", open_img)):
            for side in ("left", "right"):
                pic = img if side == "left" else np.fliplr(img)
                templates.append(Template(f"{variant}-{side}-{wpx}", pic, wpx, aspect, width_m))
    return templates


def _bilinear(image: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    h, w = image.shape
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.minimum(np.floor(xs), w - 2).astype(np.intp)
    y0 = np.minimum(np.floor(ys), h - 2).astype(np.intp)
    fx = xs - x0
    fy = ys - y0
    img = image.astype(np.float64)
    top = img[y0, x0] * (1 - fx) + img[y0, x0 + 1] * fx
    bot = img[y0 + 1, x0] * (1 - fx) + img[y0 + 1, x0 + 1] * fx
    return top * (1 - fy) + bot * fy


def _line_x_at(seg: LineSegment2D, y: np.ndarray) -> np.ndarray:
    if seg.y1 == seg.y0:
        return np.full_like(y, 0.5 * (seg.x0 + seg.x1))
    t = (y - seg.y0) / (seg.y1 - seg.y0)
    return seg.x0 + t * (seg.x1 - seg.x0)


def _line_y_at(seg: LineSegment2D, x: np.ndarray) -> np.ndarray:
    if seg.x1 == seg.x0:
        return np.full_like(x, 0.5 * (seg.y0 + seg.y1))
    t = (x - seg.x0) / (seg.x1 - seg.x0)
    return seg.y0 + t * (seg.y1 - seg.y0)


def detect_empty_space(
    image: np.ndarray,
    templates: list[Template],
    roi: Roi,
    scales=None,
    half_width: int = 3,
    threshold: float = 60.0,
    max_line_width: float = 9.0,
    min_inliers: int = 16,
    accept_threshold: float = 0.6,
    parallel_tol_deg: float = 8.0,
    sep_tol: float = 0.30,
) -> list[ParkingSpaceHypothesis]:
    """Full detection chain: boundary filtering, definite points, line fitting,
    split pairing, optional base line, rectification, and template matching.

    Split candidates are near-horizontal segments inside the ROI (side bands of
    the aerial view); the bay opens toward the vehicle, i.e. toward the image
    centre column.
    """
    if not templates:
        raise ValueError("at least one template is required")
    side = "left" if (roi.col0 + roi.col1) / 2.0 < image.shape[1] / 2.0 else "right"
    toward_vehicle = 1.0 if side == "left" else -1.0  # +x toward the vehicle centre

    centers_h = _centers_grid(image, roi, "vertical", half_width, threshold, max_line_width)
    if centers_h.shape[0] == 0:
        return []
    splits = _fit_lines_transposed(
        centers_h, roi, min_inliers=min_inliers, row_gap=3.0, col_gate=2.0
    )
    splits = [replace(s, role="split") for s in splits if abs(s.angle_deg) > 45.0]
    if len(splits) < 2:
        return []

    expected_seps = sorted({float(t.width_px) for t in templates})
    if scales is not None and getattr(scales, "aerial_to_topo", None):
        expected_seps.append(templates[0].width_m / scales.aerial_to_topo)

    centers_v = _centers_grid(image, roi, "horizontal", half_width, threshold, max_line_width)

    hypotheses = []
    for i in range(len(splits)):
        for j in range(i + 1, len(splits)):
            a, b = splits[i], splits[j]
            if angle_between_deg(a.angle_deg, b.angle_deg) > parallel_tol_deg:
                continue
            sep = abs(a.midpoint[1] - b.midpoint[1])
            if not any(abs(sep - e) <= sep_tol * e for e in expected_seps):
                continue
            lo_a, hi_a = sorted((a.x0, a.x1))
            lo_b, hi_b = sorted((b.x0, b.x1))
            overlap = min(hi_a, hi_b) - max(lo_a, lo_b)
            if overlap < 0.5 * min(hi_a - lo_a, hi_b - lo_b):
                continue
            near_col = min(hi_a, hi_b) if toward_vehicle > 0 else max(lo_a, lo_b)
            base = None
            if centers_v.shape[0]:
                try:
                    base = infer_base_line(
                        a, b, [tuple(c) for c in centers_v],
                        far_side=("low" if toward_vehicle > 0 else "high"),
                    )
                except ValueError:
                    base = None

            best_score = -1.0
            best_quad = None
            for tpl in templates:
                depth_px = sep * tpl.aspect
                far = near_col - toward_vehicle * depth_px
                rows_t, cols_t = tpl.image.shape
                fr = np.linspace(0.0, 1.0, rows_t)
                fc = np.linspace(0.0, 1.0, cols_t)
                grid_r, grid_c = np.meshgrid(fr, fc, indexing="ij")
                xs = near_col + (far - near_col) * grid_r
                ya = _line_y_at(a, xs)
                yb = _line_y_at(b, xs)
                ys = ya + (yb - ya) * grid_c
                patch = _bilinear(image, xs, ys)
                try:
                    score = match_template(patch, tpl.image)
                except ValueError:
                    continue
                if score > best_score:
                    best_score = score
                    far_use = base.midpoint[0] if base is not None else far
                    quad = (
                        (near_col, float(_line_y_at(a, np.array(near_col)))),
                        (near_col, float(_line_y_at(b, np.array(near_col)))),
                        (far_use, float(_line_y_at(b, np.array(far_use)))),
                        (far_use, float(_line_y_at(a, np.array(far_use)))),
                    )
                    best_quad = quad
            if best_quad is not None and best_score >= accept_threshold:
                hypotheses.append(
                    ParkingSpaceHypothesis(a, b, base, best_quad, best_score, side)
                )
    hypotheses.sort(key=lambda h: -h.score)
    return hypotheses


def classify_arrow(
    image: np.ndarray,
    half_width: int = 2,
    threshold: float = 50.0,
    min_inliers: int = 4,
    deadband_px: float = 1.0,
) -> ArrowObservation:
    """Direction of a floor arrow from the two strongest head edges.

    The longest rising and longest falling boundary segments stand in for the
    arrow-head edges; the arrow points left when the rising centre sits above
    (smaller row than) the falling centre, and right in the mirrored case.
    """
    resp = line_filter(image, "horizontal", half_width)
    rows, cols, pol = _definite_points_grid(resp, threshold)
    if rows.size == 0:
        return ArrowObservation("none")
    roi = Roi(0, image.shape[0], 0, image.shape[1])

    def longest(polarity: int) -> LineSegment2D | None:
        sel = pol == polarity
        pts = list(zip(cols[sel], rows[sel].astype(np.float64)))
        if len(pts) < min_inliers:
            return None
        segs = fit_parking_lines(pts, roi, min_inliers=min_inliers, row_gap=2.0, col_gate=2.5)
        if not segs:
            return None
        segs.sort(key=lambda s: (-s.length, min(s.x0, s.x1), min(s.y0, s.y1)))
        return segs[0]

    rising = longest(1)
    falling = longest(-1)
    if rising is None or falling is None:
        return ArrowObservation("none")
    ry = rising.midpoint[1]
    fy = falling.midpoint[1]
    if abs(ry - fy) < deadband_px:
        return ArrowObservation("none", rising.midpoint, falling.midpoint)
    direction = "left" if ry < fy else "right"
    return ArrowObservation(direction, rising.midpoint, falling.midpoint)


def debounce_arrow(
    state: DebounceState, obs: ArrowObservation, frames_required: int = 10
) -> tuple[DebounceState, TurnCommand | None]:
    """Emit one turn command when the same direction persists for more than
    frames_required consecutive frames; rotation suppresses observation."""
    if state.rotating:
        return DebounceState("none", 0, True), None
    if obs.direction == "none":
        return DebounceState("none", 0, False), None
    count = state.count + 1 if obs.direction == state.last_direction else 1
    command = TurnCommand(obs.direction) if count == frames_required + 1 else None
    return DebounceState(obs.direction, count, False), command


def measure_alignment(
    left_image: np.ndarray,
    right_image: np.ndarray,
    rear_image: np.ndarray,
    reference_slopes: tuple[float, float] = (0.0, 0.0),
    half_width: int = 3,
    threshold: float = 60.0,
    max_line_width: float = 9.0,
    min_inliers: int = 10,
) -> AlignmentMeasurement:
    """Slope deltas of the nearest split line in each side view against the
    parallel-pose reference, plus the rear pixel gap to the base line.

    Side crops must be oriented with the vehicle at the high-column edge; the
    rear crop starts at the vehicle's rear edge row.
    """

    def side_delta(img: np.ndarray, reference: float) -> float | None:
        roi = Roi(0, img.shape[0], 0, img.shape[1])
        centers = _centers_grid(img, roi, "horizontal", half_width, threshold, max_line_width)
        if centers.shape[0] == 0:
            return None
        segs = fit_parking_lines(
            [tuple(c) for c in centers], roi, min_inliers=min_inliers, row_gap=3.0, col_gate=2.5
        )
        if not segs:
            return None
        nearest = max(segs, key=lambda s: s.midpoint[0])
        return angle_between_deg(nearest.angle_deg, reference)

    def rear_gap(img: np.ndarray) -> float | None:
        roi = Roi(0, img.shape[0], 0, img.shape[1])
        centers = _centers_grid(img, roi, "vertical", half_width, threshold, max_line_width)
        if centers.shape[0] == 0:
            return None
        segs = _fit_lines_transposed(
            centers, roi, min_inliers=min_inliers, row_gap=3.0, col_gate=2.0
        )
        segs = [s for s in segs if abs(s.angle_deg) > 45.0]
        if not segs:
            return None
        return min(s.midpoint[1] for s in segs)

    return AlignmentMeasurement(
        left_delta_deg=side_delta(left_image, reference_slopes[0]),
        right_delta_deg=side_delta(right_image, reference_slopes[1]),
        rear_gap_px=rear_gap(rear_image),
    )
