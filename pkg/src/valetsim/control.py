"""Driving policies: arrow-guided initial driving, keyframe following with
unreachable-area handling, and the five-step parking state machine."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .world import Gear, VehicleParams


class DegenerateMapError(ValueError):
    """Keyframe geometry admits no finite turning radius."""


@dataclass(frozen=True)
class TurnCommand:
    direction: str  # "left" | "right"

    @property
    def heading_change(self) -> float:
        return math.pi / 2.0 if self.direction == "left" else -math.pi / 2.0


@dataclass(frozen=True)
class Controls:
    steer: float
    speed: float
    gear: Gear


@dataclass
class FollowerState:
    target_index: int
    avg_spacing: float
    r_min: float
    mode: str = "follow"  # follow | corrective-left | corrective-right | done


def initial_drive_policy(
    cmd: TurnCommand | None,
    rotating: bool,
    heading_progress: float,
    params: VehicleParams,
    dt: float,
) -> Controls:
    """Straight at cruise by default; a turn command holds a constant-steer arc
    until the cumulative heading change reaches 90 degrees.

    The final arc step is shortened so the turn lands on 90 degrees exactly.
    """
    if cmd is None or not rotating:
        return Controls(steer=0.0, speed=params.cruise_speed, gear=Gear.FORWARD)
    remaining = math.pi / 2.0 - heading_progress
    if remaining <= 0.0:
        return Controls(steer=0.0, speed=params.cruise_speed, gear=Gear.FORWARD)
    sign = 1.0 if cmd.direction == "left" else -1.0
    full_rate = params.cruise_speed * math.tan(params.steer_max) / params.wheelbase
    if remaining < full_rate * dt:
        needed = math.atan(remaining * params.wheelbase / (params.cruise_speed * dt))
        return Controls(steer=sign * needed, speed=params.cruise_speed, gear=Gear.FORWARD)
    return Controls(steer=sign * params.steer_max, speed=params.cruise_speed, gear=Gear.FORWARD)


def circumradius(p1, p2, p3, collinear_eps: float = 1e-9) -> float:
    """Radius of the circle through three points; inf for collinear triples."""
    (x1, z1), (x2, z2), (x3, z3) = p1, p2, p3
    if (x1, z1) == (x2, z2) or (x1, z1) == (x3, z3) or (x2, z2) == (x3, z3):
        raise ValueError("circumradius requires pairwise distinct points")
    d = 2.0 * (x1 * (z2 - z3) + x2 * (z3 - z1) + x3 * (z1 - z2))
    if abs(d) < collinear_eps:
        return math.inf
    s1 = x1 * x1 + z1 * z1
    s2 = x2 * x2 + z2 * z2
    s3 = x3 * x3 + z3 * z3
    ux = (s1 * (z2 - z3) + s2 * (z3 - z1) + s3 * (z1 - z2)) / d
    uz = (s1 * (x3 - x2) + s2 * (x1 - x3) + s3 * (x2 - x1)) / d
    return math.hypot(x1 - ux, z1 - uz)


def min_turning_radius(points) -> float:
    """Smallest finite circumradius over consecutive keyframe triples."""
    pts = [(float(p[0]), float(p[1])) for p in points]
    if len(pts) < 3:
        raise DegenerateMapError("need at least three keyframes")
    best = math.inf
    for i in range(len(pts) - 2):
        try:
            r = circumradius(pts[i], pts[i + 1], pts[i + 2])
        except ValueError:
            continue
        best = min(best, r)
    if not math.isfinite(best):
        raise DegenerateMapError("all keyframe triples are collinear")
    return best


def to_vehicle_frame(pose, target) -> tuple[float, float]:
    """Forward / left coordinates of a map point seen from a map pose."""
    x, z, heading = pose
    dx = target[0] - x
    dz = target[1] - z
    c, s = math.cos(heading), math.sin(heading)
    forward = dx * c + dz * s
    lateral = -dx * s + dz * c
    return forward, lateral


def select_target_keyframe(keyframes, pose, state: FollowerState) -> FollowerState:
    """Advance past keyframes that are behind the vehicle or already reached."""
    idx = state.target_index
    while idx < len(keyframes):
        kf = keyframes[idx]
        forward, lateral = to_vehicle_frame(pose, (kf.x, kf.z))
        dist = math.hypot(forward, lateral)
        if forward > 0.0 and dist > state.avg_spacing:
            break
        idx += 1
    if idx >= len(keyframes):
        return replace(state, target_index=len(keyframes), mode="done")
    return replace(state, target_index=idx)


def reachability(forward: float, lateral: float, r_min: float) -> str:
    """Classify a vehicle-frame target against the two minimum turning disks."""
    if r_min <= 0 or not math.isfinite(r_min):
        raise ValueError("r_min must be finite and positive")
    if math.hypot(forward, lateral - r_min) < r_min:
        return "unreachable-left"
    if math.hypot(forward, lateral + r_min) < r_min:
        return "unreachable-right"
    return "reachable"


def follow_controls(
    state: FollowerState, forward: float, lateral: float, params: VehicleParams
) -> tuple[FollowerState, Controls]:
    """Pure pursuit toward the target; reverse out of the unreachable disks."""
    zone = reachability(forward, lateral, state.r_min)
    if zone == "unreachable-left":
        return (
            replace(state, mode="corrective-left"),
            Controls(steer=-params.steer_max, speed=0.5 * params.cruise_speed, gear=Gear.REVERSE),
        )
    if zone == "unreachable-right":
        return (
            replace(state, mode="corrective-right"),
            Controls(steer=params.steer_max, speed=0.5 * params.cruise_speed, gear=Gear.REVERSE),
        )
    dist = math.hypot(forward, lateral)
    if dist < 1e-9:
        steer = 0.0
    else:
        lookahead = max(dist, params.wheelbase)
        alpha = math.atan2(lateral, forward)
        steer = math.atan(2.0 * params.wheelbase * math.sin(alpha) / lookahead)
    steer = max(-params.steer_max, min(params.steer_max, steer))
    return (
        replace(state, mode="follow"),
        Controls(steer=steer, speed=params.cruise_speed, gear=Gear.FORWARD),
    )


PARK_PHASES = ("locate", "forward_offset", "reverse_turn", "align_straight", "depth_stop", "done")


@dataclass
class ParkingFsm:
    side: str  # side of the accepted bay, "left" | "right"
    model_scale: float
    reference_slopes: tuple[float, float] = (0.0, 0.0)  # side-view slopes when parallel
    phase: str = "locate"
    destination: tuple[float, float] | None = None  # map units
    offset_full_scale: float = 1.8  # metres at full scale, scaled per world
    slope_tol_deg: float = 1.0
    gap_threshold_px: float = 10.0
    locate_steer_frac: float = 1.0
    speed_frac: float = 0.5
    traveled: float = 0.0  # map units since forward_offset began
    offset_map: float | None = None
    last_pose: tuple[float, float, float] | None = None
    phase_steps: int = 0
    phase_budget: int = 6000
    aborted: bool = False

    def phase_index(self) -> int:
        return PARK_PHASES.index(self.phase)


def parking_fsm_step(
    fsm: ParkingFsm,
    hypothesis,
    alignment,
    scale,
    map_pose,
    params: VehicleParams,
) -> tuple[ParkingFsm, Controls]:
    """One decision step of the five-phase parking maneuver.

    The forward offset is 1.8 m scaled by the world's model ratio and converted
    to map units through the composed scale estimate; covering that distance on
    the odometer is what "destination reached" means here.
    """
    side_sign = 1.0 if fsm.side == "left" else -1.0
    stop = Controls(steer=0.0, speed=0.0, gear=Gear.FORWARD)
    fsm.phase_steps += 1
    if fsm.phase_steps > fsm.phase_budget and fsm.phase != "done":
        fsm.aborted = True
        return fsm, stop
    if fsm.phase in ("locate", "forward_offset") and hypothesis is None:
        fsm.aborted = True
        return fsm, stop

    if fsm.phase == "locate":
        if scale is None or scale.slam_to_topo is None:
            # scale must be composed before the offset leg may complete
            return fsm, Controls(
                steer=-side_sign * fsm.locate_steer_frac * params.steer_max,
                speed=0.0,
                gear=Gear.FORWARD,
            )
        desk_offset = fsm.offset_full_scale * fsm.model_scale
        fsm.offset_map = desk_offset / scale.slam_to_topo
        c, s = math.cos(map_pose[2]), math.sin(map_pose[2])
        fsm.destination = (map_pose[0] + fsm.offset_map * c, map_pose[1] + fsm.offset_map * s)
        fsm.traveled = 0.0
        fsm.last_pose = map_pose
        fsm.phase = "forward_offset"
        fsm.phase_steps = 0
        return fsm, Controls(
            steer=-side_sign * fsm.locate_steer_frac * params.steer_max,
            speed=0.0,
            gear=Gear.FORWARD,
        )

    if fsm.phase == "forward_offset":
        fsm.traveled += math.hypot(map_pose[0] - fsm.last_pose[0], map_pose[1] - fsm.last_pose[1])
        fsm.last_pose = map_pose
        if fsm.traveled >= fsm.offset_map:
            fsm.phase = "reverse_turn"
            fsm.phase_steps = 0
            return fsm, Controls(
                steer=side_sign * params.steer_max,
                speed=fsm.speed_frac * params.cruise_speed,
                gear=Gear.REVERSE,
            )
        return fsm, Controls(
            steer=-side_sign * fsm.locate_steer_frac * params.steer_max,
            speed=fsm.speed_frac * params.cruise_speed,
            gear=Gear.FORWARD,
        )

    if fsm.phase == "reverse_turn":
        deltas = (alignment.left_delta_deg, alignment.right_delta_deg) if alignment else (None, None)
        if (
            deltas[0] is not None
            and deltas[1] is not None
            and abs(deltas[0] - fsm.reference_slopes[0]) <= fsm.slope_tol_deg
            and abs(deltas[1] - fsm.reference_slopes[1]) <= fsm.slope_tol_deg
        ):
            fsm.phase = "align_straight"
            fsm.phase_steps = 0
            return fsm, Controls(steer=0.0, speed=fsm.speed_frac * params.cruise_speed, gear=Gear.REVERSE)
        return fsm, Controls(
            steer=side_sign * params.steer_max,
            speed=fsm.speed_frac * params.cruise_speed,
            gear=Gear.REVERSE,
        )

    if fsm.phase == "align_straight":
        # wheels restored; depth watching takes over immediately
        fsm.phase = "depth_stop"
        fsm.phase_steps = 0
        return fsm, Controls(steer=0.0, speed=fsm.speed_frac * params.cruise_speed, gear=Gear.REVERSE)

    if fsm.phase == "depth_stop":
        gap = alignment.rear_gap_px if alignment else None
        if gap is not None and gap < fsm.gap_threshold_px:
            fsm.phase = "done"
            fsm.phase_steps = 0
            return fsm, stop
        return fsm, Controls(steer=0.0, speed=fsm.speed_frac * params.cruise_speed, gear=Gear.REVERSE)

    return fsm, stop
