"""Ground-truth parking-lot world: markings, glare, and the kinematic vehicle.

The ground plane is the (x, z) plane; y is height and never appears in poses.
Headings are radians in (-pi, pi], measured from +x toward +z, so the vehicle's
left side points along heading + pi/2. All lengths are metres; world files
carry angles in degrees and are converted on load.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

TAU = 2.0 * math.pi


class WorldFormatError(ValueError):
    """World document is malformed or violates an invariant."""


class Gear(Enum):
    FORWARD = 1
    REVERSE = -1


def normalize_angle(angle: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = angle % TAU
    if a > math.pi:
        a -= TAU
    return a


def heading_vectors(heading: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """Forward and left unit vectors on the ground plane for a heading."""
    c, s = math.cos(heading), math.sin(heading)
    return (c, s), (-s, c)


@dataclass(frozen=True)
class OrientedRect:
    """Rectangle on the ground plane: center, unit axis of its first extent."""

    cx: float
    cz: float
    ux: float
    uz: float
    half_len: float
    half_width: float

    def contains(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        dx = x - self.cx
        dz = z - self.cz
        along = dx * self.ux + dz * self.uz
        across = -dx * self.uz + dz * self.ux
        return (np.abs(along) <= self.half_len) & (np.abs(across) <= self.half_width)

    def corners(self) -> np.ndarray:
        u = np.array([self.ux, self.uz])
        v = np.array([-self.uz, self.ux])
        c = np.array([self.cx, self.cz])
        return np.array(
            [
                c + self.half_len * u + self.half_width * v,
                c + self.half_len * u - self.half_width * v,
                c - self.half_len * u - self.half_width * v,
                c - self.half_len * u + self.half_width * v,
            ]
        )


@dataclass(frozen=True)
class Triangle:
    """Filled triangle marking, used for arrow heads."""

    p0: tuple[float, float]
    p1: tuple[float, float]
    p2: tuple[float, float]

    def contains(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        def edge(a, b):
            return (b[0] - a[0]) * (z - a[1]) - (b[1] - a[1]) * (x - a[0])

        d0 = edge(self.p0, self.p1)
        d1 = edge(self.p1, self.p2)
        d2 = edge(self.p2, self.p0)
        neg = (d0 <= 0) & (d1 <= 0) & (d2 <= 0)
        pos = (d0 >= 0) & (d1 >= 0) & (d2 >= 0)
        return neg | pos

    def corners(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2])


@dataclass(frozen=True)
class Bay:
    rect: OrientedRect  # first extent = depth axis, pointing into the bay
    occupied: bool
    draw_base: bool = True


@dataclass(frozen=True)
class Arrow:
    x: float
    z: float
    ux: float  # pointing along the driving direction
    uz: float
    direction: str  # "left" | "right"


@dataclass(frozen=True)
class GlareSpot:
    x: float
    z: float
    radius: float
    delta: float


@dataclass(frozen=True)
class ScaleLine:
    x0: float
    z0: float
    x1: float
    z1: float
    width: float

    @property
    def length(self) -> float:
        return math.hypot(self.x1 - self.x0, self.z1 - self.z0)


@dataclass(frozen=True)
class VehicleParams:
    wheelbase: float
    width: float
    length: float
    steer_max: float
    cruise_speed: float

    def __post_init__(self):
        for name in ("wheelbase", "width", "length", "steer_max", "cruise_speed"):
            if getattr(self, name) <= 0:
                raise WorldFormatError(f"vehicle.{name} must be positive")
        if self.steer_max >= math.pi / 2:
            raise WorldFormatError("vehicle.steer_max must be below 90 degrees")


@dataclass
class VehicleState:
    x: float
    z: float
    heading: float
    steer: float = 0.0
    speed: float = 0.0
    gear: Gear = Gear.FORWARD


@dataclass
class WorldSpec:
    lanes: tuple[OrientedRect, ...]
    bays: tuple[Bay, ...]
    arrows: tuple[Arrow, ...]
    scale_line: ScaleLine | None
    glare_spots: tuple[GlareSpot, ...]
    floor_albedo: float
    marking_albedo: float
    start_pose: tuple[float, float, float]
    vehicle: VehicleParams
    model_scale: float
    line_width: float = 0.035
    _marks: list = field(default=None, repr=False, compare=False)

    def validate(self) -> None:
        if not 0.0 <= self.floor_albedo <= 1.0:
            raise WorldFormatError("floor_albedo must lie in [0, 1]")
        if not 0.0 <= self.marking_albedo <= 1.0:
            raise WorldFormatError("marking_albedo must lie in [0, 1]")
        if self.marking_albedo <= self.floor_albedo:
            raise WorldFormatError("marking_albedo must exceed floor_albedo")
        if self.model_scale <= 0:
            raise WorldFormatError("model_scale must be positive")
        if self.line_width <= 0:
            raise WorldFormatError("line_width must be positive")
        for i, bay in enumerate(self.bays):
            if bay.rect.half_len <= 0 or bay.rect.half_width <= 0:
                raise WorldFormatError(f"bays[{i}] must have positive area")
        for i, spot in enumerate(self.glare_spots):
            if not 0.0 <= spot.delta <= 1.0:
                raise WorldFormatError(f"glare_spots[{i}].delta must lie in [0, 1]")
            if spot.radius <= 0:
                raise WorldFormatError(f"glare_spots[{i}].radius must be positive")
        for i, arrow in enumerate(self.arrows):
            if arrow.direction not in ("left", "right"):
                raise WorldFormatError(f"arrows[{i}].direction must be left or right")
        if self.scale_line is not None and self.scale_line.length <= 0:
            raise WorldFormatError("scale_line must have positive length")

    def marks(self) -> list:
        """Marking primitives (rects and triangles), built once per world."""
        if self._marks is None:
            self._marks = _build_marks(self)
        return self._marks


def _edge_rect(a: np.ndarray, b: np.ndarray, width: float) -> OrientedRect:
    mid = 0.5 * (a + b)
    d = b - a
    length = float(np.hypot(d[0], d[1]))
    u = d / length
    return OrientedRect(
        float(mid[0]), float(mid[1]), float(u[0]), float(u[1]),
        0.5 * length + 0.5 * width, 0.5 * width,
    )


# Arrow geometry, relative to the arrow anchor (tail of the shaft), in units of
# metres along the driving axis u and the left axis v. The head is a triangle
# whose base runs along u so a horizontal scan of the approach view meets one
# slanted boundary and the straight shaft boundary at clearly different depths.
_ARROW_SHAFT_LEN = 0.14
_ARROW_SHAFT_WID = 0.05
_ARROW_HEAD_HALF = 0.10  # head-base half extent along u
_ARROW_HEAD_REACH = 0.14  # apex offset toward the pointed side


def _arrow_marks(arrow: Arrow) -> list:
    u = np.array([arrow.ux, arrow.uz])
    v = np.array([-arrow.uz, arrow.ux])  # left of the driving direction
    anchor = np.array([arrow.x, arrow.z])
    tip_side = v if arrow.direction == "left" else -v

    shaft_mid = anchor + (0.5 * _ARROW_SHAFT_LEN) * u
    shaft = OrientedRect(
        float(shaft_mid[0]), float(shaft_mid[1]), arrow.ux, arrow.uz,
        0.5 * _ARROW_SHAFT_LEN, 0.5 * _ARROW_SHAFT_WID,
    )
    base_center = anchor + _ARROW_SHAFT_LEN * u
    apex = base_center + _ARROW_HEAD_REACH * tip_side
    b0 = base_center + _ARROW_HEAD_HALF * u
    b1 = base_center - _ARROW_HEAD_HALF * u
    head = Triangle(tuple(apex), tuple(b0), tuple(b1))
    return [shaft, head]


def _bay_marks(bay: Bay, line_width: float) -> list:
    marks = []
    corners = bay.rect.corners()  # far-left, far-right, near-right, near-left in u/v terms
    far_l, far_r, near_r, near_l = corners
    marks.append(_edge_rect(near_l, far_l, line_width))  # split line
    marks.append(_edge_rect(near_r, far_r, line_width))  # split line
    if bay.draw_base:
        marks.append(_edge_rect(far_l, far_r, line_width))
    if bay.occupied:
        marks.append(
            OrientedRect(
                bay.rect.cx, bay.rect.cz, bay.rect.ux, bay.rect.uz,
                bay.rect.half_len * 0.62, bay.rect.half_width * 0.62,
            )
        )
    return marks


def _build_marks(world: WorldSpec) -> list:
    marks = []
    for lane in world.lanes:
        c = lane.corners()
        for a, b in ((c[0], c[1]), (c[1], c[2]), (c[2], c[3]), (c[3], c[0])):
            marks.append(_edge_rect(a, b, world.line_width))
    for bay in world.bays:
        marks.extend(_bay_marks(bay, world.line_width))
    for arrow in world.arrows:
        marks.extend(_arrow_marks(arrow))
    if world.scale_line is not None:
        sl = world.scale_line
        marks.append(_edge_rect(np.array([sl.x0, sl.z0]), np.array([sl.x1, sl.z1]), sl.width))
    return marks


def ground_intensity(world: WorldSpec, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Albedo of the ground at the given points, glare applied and clamped."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    fx = x.ravel()
    fz = z.ravel()
    marked = np.zeros(fx.shape, dtype=bool)
    for mark in world.marks():
        pts = mark.corners()
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        box = (fx >= lo[0]) & (fx <= hi[0]) & (fz >= lo[1]) & (fz <= hi[1])
        idx = np.nonzero(box)[0]
        if idx.size == 0:
            continue
        inside = mark.contains(fx[idx], fz[idx])
        marked[idx[inside]] = True
    out = np.where(marked, world.marking_albedo, world.floor_albedo)
    for spot in world.glare_spots:
        d2 = (fx - spot.x) ** 2 + (fz - spot.z) ** 2
        out = np.where(d2 <= spot.radius**2, out + spot.delta, out)
    return np.clip(out, 0.0, 1.0).reshape(x.shape)


def render_ground(
    world: WorldSpec,
    center: tuple[float, float],
    extent: tuple[float, float],
    resolution: float,
) -> np.ndarray:
    """Orthographic top-down render; x maps to columns, z to rows.

    Pixel coverage is decided by pixel-center sampling, so identical inputs
    give bit-identical images.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    ex, ez = extent
    if ex <= 0 or ez <= 0:
        raise ValueError("extent must be positive")
    cols = max(1, int(round(ex / resolution)))
    rows = max(1, int(round(ez / resolution)))
    xs = center[0] - 0.5 * cols * resolution + (np.arange(cols) + 0.5) * resolution
    zs = center[1] - 0.5 * rows * resolution + (np.arange(rows) + 0.5) * resolution
    gx, gz = np.meshgrid(xs, zs)
    vals = ground_intensity(world, gx, gz)
    return np.rint(vals * 255.0).astype(np.uint8)


def step_vehicle(state: VehicleState, params: VehicleParams, dt: float) -> VehicleState:
    """Advance the bicycle model by dt.

    Constant controls trace an exact circular arc of radius wheelbase/tan(steer);
    the pose update uses the closed-form arc so a full turn returns to the start
    up to float rounding.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    steer = max(-params.steer_max, min(params.steer_max, state.steer))
    v = state.speed * (1.0 if state.gear is Gear.FORWARD else -1.0)
    if v == 0.0:
        return VehicleState(state.x, state.z, state.heading, steer, state.speed, state.gear)
    tan_steer = math.tan(steer)
    if abs(tan_steer) < 1e-12:
        nx = state.x + v * dt * math.cos(state.heading)
        nz = state.z + v * dt * math.sin(state.heading)
        nh = state.heading
    else:
        omega = v * tan_steer / params.wheelbase
        radius = v / omega
        nh = state.heading + omega * dt
        nx = state.x + radius * (math.sin(nh) - math.sin(state.heading))
        nz = state.z - radius * (math.cos(nh) - math.cos(state.heading))
    return VehicleState(nx, nz, normalize_angle(nh), steer, state.speed, state.gear)


def footprint_corners(state: VehicleState, params: VehicleParams) -> np.ndarray:
    """Vehicle outline; the pose tracks the rear axle, overhangs are symmetric."""
    fwd, left = heading_vectors(state.heading)
    center = np.array([state.x, state.z]) + (params.wheelbase / 2.0) * np.array(fwd)
    u = np.array(fwd) * (params.length / 2.0)
    v = np.array(left) * (params.width / 2.0)
    return np.array([center + u + v, center + u - v, center - u - v, center - u + v])


def _seg_seg_distance(p0, p1, q0, q1) -> float:
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = float(d1 @ d1)
    e = float(d2 @ d2)
    f = float(d2 @ r)
    if a == 0.0 and e == 0.0:
        return float(np.hypot(*r))
    if a == 0.0:
        t = min(1.0, max(0.0, f / e))
        return float(np.linalg.norm(r - t * d2))
    c = float(d1 @ r)
    if e == 0.0:
        s = min(1.0, max(0.0, -c / a))
        return float(np.linalg.norm(r + s * d1))
    b = float(d1 @ d2)
    denom = a * e - b * b
    s = min(1.0, max(0.0, (b * f - c * e) / denom)) if denom != 0.0 else 0.0
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = min(1.0, max(0.0, -c / a))
    elif t > 1.0:
        t = 1.0
        s = min(1.0, max(0.0, (b - c) / a))
    return float(np.linalg.norm((p0 + s * d1) - (q0 + t * d2)))


def _segments_intersect(p0, p1, q0, q1) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(q0, q1, p0)
    d2 = orient(q0, q1, p1)
    d3 = orient(p0, p1, q0)
    d4 = orient(p0, p1, q1)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    return False


def bay_clearance(state: VehicleState, params: VehicleParams, bay: OrientedRect) -> float:
    """Minimum footprint distance to the bay border; negative when crossing it."""
    corners = footprint_corners(state, params)
    dx = corners[:, 0] - bay.cx
    dz = corners[:, 1] - bay.cz
    along = dx * bay.ux + dz * bay.uz
    across = -dx * bay.uz + dz * bay.ux
    excursion = np.maximum(np.abs(along) - bay.half_len, np.abs(across) - bay.half_width)
    bay_corners = bay.corners()
    veh_edges = [(corners[i], corners[(i + 1) % 4]) for i in range(4)]
    bay_edges = [(bay_corners[i], bay_corners[(i + 1) % 4]) for i in range(4)]
    crossing = any(
        _segments_intersect(a, b, c, d) for a, b in veh_edges for c, d in bay_edges
    )
    if crossing:
        return -float(np.max(excursion))
    dist = min(_seg_seg_distance(a, b, c, d) for a, b in veh_edges for c, d in bay_edges)
    if bool(np.all(excursion <= 0.0)):
        return dist  # fully inside: distance to the nearest border
    return dist  # fully outside


def _require(doc: dict, key: str, context: str = "world") -> object:
    if key not in doc:
        raise WorldFormatError(f"{context} document is missing required field '{key}'")
    return doc[key]


def _rect_from_doc(doc: dict, context: str) -> OrientedRect:
    center = _require(doc, "center", context)
    size = _require(doc, "size", context)
    heading = math.radians(float(doc.get("heading_deg", 0.0)))
    if len(center) != 2 or len(size) != 2:
        raise WorldFormatError(f"{context}: center and size must each have 2 entries")
    if size[0] <= 0 or size[1] <= 0:
        raise WorldFormatError(f"{context}: size entries must be positive")
    return OrientedRect(
        float(center[0]), float(center[1]),
        math.cos(heading), math.sin(heading),
        float(size[0]) / 2.0, float(size[1]) / 2.0,
    )


def load_world(text: str) -> WorldSpec:
    """Parse and validate a world document (JSON, degrees, metres)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorldFormatError(f"world document parse error at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise WorldFormatError("world document must be a JSON object")

    lanes = tuple(
        _rect_from_doc(entry, f"lanes[{i}]") for i, entry in enumerate(_require(doc, "lanes"))
    )
    bays = []
    for i, entry in enumerate(_require(doc, "bays")):
        rect = _rect_from_doc(entry, f"bays[{i}]")
        bays.append(
            Bay(rect=rect, occupied=bool(entry.get("occupied", False)),
                draw_base=bool(entry.get("base_line", True)))
        )
    arrows = []
    for i, entry in enumerate(_require(doc, "arrows")):
        pos = _require(entry, "position", f"arrows[{i}]")
        heading = math.radians(float(_require(entry, "heading_deg", f"arrows[{i}]")))
        arrows.append(
            Arrow(float(pos[0]), float(pos[1]), math.cos(heading), math.sin(heading),
                  str(_require(entry, "direction", f"arrows[{i}]")).lower())
        )
    sl_doc = _require(doc, "scale_line")
    scale_line = None
    if sl_doc:
        start = _require(sl_doc, "start", "scale_line")
        end = _require(sl_doc, "end", "scale_line")
        scale_line = ScaleLine(
            float(start[0]), float(start[1]), float(end[0]), float(end[1]),
            float(sl_doc.get("width", doc.get("line_width", 0.035))),
        )
    glare = []
    for i, entry in enumerate(_require(doc, "glare_spots")):
        center = _require(entry, "center", f"glare_spots[{i}]")
        glare.append(
            GlareSpot(float(center[0]), float(center[1]),
                      float(_require(entry, "radius", f"glare_spots[{i}]")),
                      float(_require(entry, "intensity", f"glare_spots[{i}]")))
        )
    pose_doc = _require(doc, "start_pose")
    start_pose = (
        float(_require(pose_doc, "x", "start_pose")),
        float(_require(pose_doc, "z", "start_pose")),
        normalize_angle(math.radians(float(_require(pose_doc, "heading_deg", "start_pose")))),
    )
    veh = _require(doc, "vehicle")
    vehicle = VehicleParams(
        wheelbase=float(_require(veh, "wheelbase", "vehicle")),
        width=float(_require(veh, "width", "vehicle")),
        length=float(_require(veh, "length", "vehicle")),
        steer_max=math.radians(float(_require(veh, "steer_max_deg", "vehicle"))),
        cruise_speed=float(_require(veh, "cruise_speed", "vehicle")),
    )
    world = WorldSpec(
        lanes=lanes,
        bays=tuple(bays),
        arrows=tuple(arrows),
        scale_line=scale_line,
        glare_spots=tuple(glare),
        floor_albedo=float(_require(doc, "floor_albedo")),
        marking_albedo=float(_require(doc, "marking_albedo")),
        start_pose=start_pose,
        vehicle=vehicle,
        model_scale=float(_require(doc, "model_scale")),
        line_width=float(doc.get("line_width", 0.035)),
    )
    world.validate()
    return world
