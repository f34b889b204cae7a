"""Keyframe map built from noisy, scale-ambiguous odometry, with loop-closure
correction and the two-stage map/aerial/metric scale estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .world import normalize_angle


class ScaleEstimationError(ValueError):
    pass


@dataclass(frozen=True)
class Keyframe:
    kf_id: int
    x: float
    z: float
    heading: float


@dataclass
class OdometryModel:
    """Map units advance by scale times the true motion plus seeded noise."""

    scale: float = 1.0  # map units per metre
    trans_noise_std: float = 0.0  # metres per step
    heading_noise_std: float = 0.0  # radians per step
    seed: int = 0
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("odometry scale must be positive")
        if self.trans_noise_std < 0 or self.heading_noise_std < 0:
            raise ValueError("noise standard deviations must be non-negative")
        self._rng = np.random.default_rng(self.seed)


def observe_pose(model: OdometryModel, true_pose, prev_map_pose, prev_true_pose):
    """Next map pose: scaled true delta plus per-step noise, deterministic per seed."""
    dx = true_pose[0] - prev_true_pose[0]
    dz = true_pose[1] - prev_true_pose[1]
    dh = normalize_angle(true_pose[2] - prev_true_pose[2])
    if model.trans_noise_std > 0.0:
        dx += float(model._rng.normal(0.0, model.trans_noise_std))
        dz += float(model._rng.normal(0.0, model.trans_noise_std))
    if model.heading_noise_std > 0.0:
        dh += float(model._rng.normal(0.0, model.heading_noise_std))
    return (
        prev_map_pose[0] + model.scale * dx,
        prev_map_pose[1] + model.scale * dz,
        normalize_angle(prev_map_pose[2] + dh),
    )


@dataclass
class KeyframeMap:
    d_kf: float  # map units between keyframes
    theta_kf: float = math.radians(10.0)
    r_loop: float | None = None  # defaults to 2 * d_kf
    l_min: float | None = None  # defaults to 8 * d_kf
    keyframes: list = field(default_factory=list)
    loop_closed: bool = False
    closure_fired: bool = False
    start: tuple | None = None
    path_length: float = 0.0
    last_pose: tuple | None = None

    def __post_init__(self):
        if self.r_loop is None:
            self.r_loop = 2.0 * self.d_kf
        if self.l_min is None:
            self.l_min = 4.0 * self.r_loop

    def spacing_stats(self) -> float:
        """Average distance between adjacent keyframes."""
        if len(self.keyframes) < 2:
            return self.d_kf
        total = 0.0
        for a, b in zip(self.keyframes, self.keyframes[1:]):
            total += math.hypot(b.x - a.x, b.z - a.z)
        return total / (len(self.keyframes) - 1)


def maybe_create_keyframe(m: KeyframeMap, pose) -> KeyframeMap:
    """Append a keyframe on enough translation or rotation; pose 0 always keys."""
    if m.last_pose is not None:
        m.path_length += math.hypot(pose[0] - m.last_pose[0], pose[1] - m.last_pose[1])
    m.last_pose = tuple(pose)
    if not m.keyframes:
        m.start = tuple(pose)
        m.keyframes.append(Keyframe(0, pose[0], pose[1], pose[2]))
        return m
    last = m.keyframes[-1]
    moved = math.hypot(pose[0] - last.x, pose[1] - last.z)
    turned = abs(normalize_angle(pose[2] - last.heading))
    if moved >= m.d_kf or turned >= m.theta_kf:
        m.keyframes.append(Keyframe(len(m.keyframes), pose[0], pose[1], pose[2]))
    return m


def detect_loop_closure(m: KeyframeMap, pose) -> bool:
    """True once, when the pose re-enters the start region after a full run."""
    if m.closure_fired or m.loop_closed or m.start is None:
        return False
    if m.path_length < m.l_min:
        return False
    if math.hypot(pose[0] - m.start[0], pose[1] - m.start[1]) > m.r_loop:
        return False
    m.closure_fired = True
    return True


def close_loop(m: KeyframeMap, closing_pose) -> KeyframeMap:
    """Distribute the endpoint error linearly along the path length.

    The keyframe at fraction t of the loop moves by -t * e, heading corrected
    along the shortest arc; keyframe order stays the creation order.
    """
    if not m.closure_fired:
        raise RuntimeError("close_loop called before a loop closure was detected")
    if m.loop_closed:
        raise RuntimeError("loop already closed")
    ex = closing_pose[0] - m.start[0]
    ez = closing_pose[1] - m.start[1]
    eh = normalize_angle(closing_pose[2] - m.start[2])
    lengths = [0.0]
    for a, b in zip(m.keyframes, m.keyframes[1:]):
        lengths.append(lengths[-1] + math.hypot(b.x - a.x, b.z - a.z))
    total = lengths[-1]
    corrected = []
    for kf, dist in zip(m.keyframes, lengths):
        t = dist / total if total > 0 else 0.0
        corrected.append(
            Keyframe(
                kf.kf_id,
                kf.x - t * ex,
                kf.z - t * ez,
                normalize_angle(kf.heading - t * eh),
            )
        )
    m.keyframes = corrected
    m.loop_closed = True
    return m


def drift_closing_pose(model: OdometryModel, m: KeyframeMap, map_pose, true_pose, true_start):
    """Closing pose carrying exactly the accumulated drift.

    Revisiting the start lets the mapper observe the true relative pose; the
    difference between the dead-reckoned map pose and that observation is the
    drift handed to close_loop. With zero noise this equals the start pose.
    """
    expected = (
        m.start[0] + model.scale * (true_pose[0] - true_start[0]),
        m.start[1] + model.scale * (true_pose[1] - true_start[1]),
        normalize_angle(m.start[2] + (true_pose[2] - true_start[2])),
    )
    return (
        m.start[0] + (map_pose[0] - expected[0]),
        m.start[1] + (map_pose[1] - expected[1]),
        normalize_angle(m.start[2] + normalize_angle(map_pose[2] - expected[2])),
    )


@dataclass
class ScaleEstimate:
    slam_to_aerial: float | None = None  # map units per aerial pixel
    aerial_to_topo: float | None = None  # metres per aerial pixel
    slam_to_topo: float | None = None  # metres per map unit

    def compose(self) -> "ScaleEstimate":
        if not self.slam_to_aerial or not self.aerial_to_topo:
            raise ScaleEstimationError("both partial scales are required to compose")
        self.slam_to_topo = self.aerial_to_topo / self.slam_to_aerial
        return self


def estimate_slam_aerial_scale(events, aerial_distance_px: float) -> float:
    """Map-unit separation of the two crossing events over the aerial pixel
    distance between the pre-specified areas."""
    if len(events) != 2:
        raise ScaleEstimationError("exactly two crossing events are required")
    if aerial_distance_px <= 0:
        raise ScaleEstimationError("aerial distance must be positive")
    (pose_a, _), (pose_b, _) = events
    sep = math.hypot(pose_b[0] - pose_a[0], pose_b[1] - pose_a[1])
    if sep <= 0:
        raise ScaleEstimationError("crossing events coincide")
    return sep / aerial_distance_px


def estimate_aerial_topo_scale(detected_px: float, actual_m: float) -> float:
    if detected_px <= 0 or actual_m <= 0:
        raise ScaleEstimationError("lengths must be positive")
    return actual_m / detected_px


def dump_map(m: KeyframeMap) -> str:
    """Plain-text keyframes in creation order with a closure footer."""
    lines = [f"{kf.kf_id} {kf.x:.9f} {kf.z:.9f} {kf.heading:.9f}" for kf in m.keyframes]
    if m.loop_closed:
        lines.append("# loop_closed")
    return "\n".join(lines) + "\n"
