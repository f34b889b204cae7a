"""Four-camera equidistant fisheye rig and LUT-driven aerial-view composition.

Camera model
------------
Ideal equidistant projection: a ray at angle theta from the optical axis lands
at image radius r = focal * theta, azimuth preserved. There are no polynomial
distortion terms, so projection and unprojection invert each other exactly.

Frames
------
3-D vectors are stored as (x, z, h): the two ground coordinates first, height
last, which keeps the ground math identical to the 2-D pose convention
(heading from +x toward +z, left = heading + 90deg). Camera frames follow the
usual vision convention: +Xc right, +Yc down, +Zc along the optical axis.

Aerial view
-----------
The aerial (top-down) window is fixed to the vehicle: row 0 is ahead of the
vehicle, column 0 is to its left. A Lut maps every aerial pixel to a source
camera and a fractional source pixel; applying the table is a pure gather,
while the direct path recomputes every projection per call. Both paths share
the same sampling code, so their outputs are bit-identical by construction.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .world import WorldSpec, ground_intensity

CAMERA_NAMES = ("front", "rear", "left", "right")


@dataclass(frozen=True)
class FisheyeIntrinsics:
    focal: float  # pixels per radian
    cx: float
    cy: float
    width: int
    height: int
    fov: float = math.pi

    def __post_init__(self):
        if self.focal <= 0:
            raise ValueError("focal must be positive")
        if not 0.0 < self.fov <= math.pi:
            raise ValueError("fov must lie in (0, pi]")
        border = min(self.cx, self.cy, (self.width - 1) - self.cx, (self.height - 1) - self.cy)
        if self.focal * (self.fov / 2.0) > border + 1e-9:
            raise ValueError("full field of view does not fit inside the image")


def _rot_ground(heading: float) -> np.ndarray:
    c, s = math.cos(heading), math.sin(heading)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


# Camera axes expressed in the (x, z, h) frame at yaw 0, pitch 0:
# right -> -z (driver's right), down -> -h, optical axis -> +x.
_R_BASE = np.array(
    [
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
    ]
)


def _rot_pitch_down(pitch: float) -> np.ndarray:
    c, s = math.cos(pitch), math.sin(pitch)
    # rotation about the camera x axis tilting the optical axis downward
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])


@dataclass(frozen=True)
class CameraPose:
    """Camera placement: position (x, z, height) and cam-to-world rotation."""

    position: tuple[float, float, float]
    rotation: tuple  # 3x3 nested tuple, columns are camera axes in the world

    @classmethod
    def from_yaw_pitch(cls, x: float, z: float, height: float, yaw: float, pitch: float) -> "CameraPose":
        rot = _rot_ground(yaw) @ _R_BASE @ _rot_pitch_down(pitch)
        return cls((x, z, height), tuple(map(tuple, rot)))

    def matrix(self) -> np.ndarray:
        return np.array(self.rotation, dtype=np.float64)

    def compose(self, base_x: float, base_z: float, heading: float) -> "CameraPose":
        """Pose of this (vehicle-frame) camera for a vehicle at the given pose."""
        rot = _rot_ground(heading)
        pos = rot @ np.array([self.position[0], self.position[1], self.position[2]])
        pos[0] += base_x
        pos[1] += base_z
        return CameraPose(tuple(pos), tuple(map(tuple, rot @ self.matrix())))


@dataclass(frozen=True)
class CameraRig:
    """Four cameras in the vehicle frame, ordered front, rear, left, right."""

    poses: tuple[CameraPose, CameraPose, CameraPose, CameraPose]
    intrinsics: tuple[FisheyeIntrinsics, FisheyeIntrinsics, FisheyeIntrinsics, FisheyeIntrinsics]

    def __post_init__(self):
        if len(self.poses) != 4 or len(self.intrinsics) != 4:
            raise ValueError("rig requires exactly four cameras")
        for pose in self.poses:
            if pose.position[2] <= 0:
                raise ValueError("camera mounting height must be positive")

    @classmethod
    def default(
        cls,
        half_length: float,
        half_width: float,
        height: float,
        pitch: float = math.radians(30.0),
        image_size: int = 360,
        fov: float = math.pi,
    ) -> "CameraRig":
        intr = FisheyeIntrinsics(
            focal=(image_size - 1) / math.pi,
            cx=(image_size - 1) / 2.0,
            cy=(image_size - 1) / 2.0,
            width=image_size,
            height=image_size,
            fov=fov,
        )
        poses = (
            CameraPose.from_yaw_pitch(half_length, 0.0, height, 0.0, pitch),
            CameraPose.from_yaw_pitch(-half_length, 0.0, height, math.pi, pitch),
            CameraPose.from_yaw_pitch(0.0, half_width, height, math.pi / 2.0, pitch),
            CameraPose.from_yaw_pitch(0.0, -half_width, height, -math.pi / 2.0, pitch),
        )
        return cls(poses, (intr, intr, intr, intr))

    def fingerprint(self) -> str:
        h = hashlib.sha1()
        for pose, intr in zip(self.poses, self.intrinsics):
            h.update(repr((pose.position, pose.rotation)).encode())
            h.update(repr((intr.focal, intr.cx, intr.cy, intr.width, intr.height, intr.fov)).encode())
        return h.hexdigest()


@dataclass(frozen=True)
class AvmSpec:
    """Vehicle-centred aerial window; output size derives from extent/resolution."""

    length: float  # metres along the vehicle axis
    width: float  # metres across
    resolution: float  # metres per pixel

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.length <= 0 or self.width <= 0:
            raise ValueError("window extent must be positive")

    @property
    def rows(self) -> int:
        return int(round(self.length / self.resolution))

    @property
    def cols(self) -> int:
        return int(round(self.width / self.resolution))

    def pixel_offsets(self) -> tuple[np.ndarray, np.ndarray]:
        """Forward and left offsets (m) of every pixel centre, row-major grids."""
        cached = _OFFSET_CACHE.get(self)
        if cached is None:
            fwd = (self.rows / 2.0 - (np.arange(self.rows) + 0.5)) * self.resolution
            left = (self.cols / 2.0 - (np.arange(self.cols) + 0.5)) * self.resolution
            grid = np.meshgrid(fwd.astype(np.float32), left.astype(np.float32), indexing="ij")
            cached = (grid[0], grid[1])
            _OFFSET_CACHE[self] = cached
        return cached


_OFFSET_CACHE: dict["AvmSpec", tuple[np.ndarray, np.ndarray]] = {}


def project_ground_to_fisheye(
    intrinsics: FisheyeIntrinsics, pose: CameraPose, point: tuple[float, float]
) -> tuple[float, float] | None:
    """Project a ground point; None when it falls outside the field of view."""
    p = np.array([point[0], point[1], 0.0]) - np.array(pose.position)
    cam = pose.matrix().T @ p
    rho = math.hypot(cam[0], cam[1])
    theta = math.atan2(rho, cam[2])
    if theta > intrinsics.fov / 2.0:
        return None
    if rho == 0.0:
        return (intrinsics.cx, intrinsics.cy)
    r = intrinsics.focal * theta
    return (intrinsics.cx + r * cam[0] / rho, intrinsics.cy + r * cam[1] / rho)


def unproject_fisheye(
    intrinsics: FisheyeIntrinsics, u: float, v: float
) -> tuple[float, float, float] | None:
    """Camera-frame unit ray for a pixel; None outside the image circle."""
    du = u - intrinsics.cx
    dv = v - intrinsics.cy
    r = math.hypot(du, dv)
    theta = r / intrinsics.focal
    if theta > intrinsics.fov / 2.0:
        return None
    if r == 0.0:
        return (0.0, 0.0, 1.0)
    s = math.sin(theta) / r
    return (du * s, dv * s, math.cos(theta))


_RAY_CACHE: dict[FisheyeIntrinsics, tuple[np.ndarray, np.ndarray]] = {}


def _camera_rays(intrinsics: FisheyeIntrinsics) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel unit rays in the camera frame plus the inside-fov mask."""
    cached = _RAY_CACHE.get(intrinsics)
    if cached is not None:
        return cached
    us = np.arange(intrinsics.width, dtype=np.float64)
    vs = np.arange(intrinsics.height, dtype=np.float64)
    gu, gv = np.meshgrid(us, vs)
    du = gu - intrinsics.cx
    dv = gv - intrinsics.cy
    r = np.hypot(du, dv)
    theta = r / intrinsics.focal
    valid = theta <= intrinsics.fov / 2.0
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(r > 0, np.sin(theta) / np.where(r > 0, r, 1.0), 0.0)
    rays = np.stack([du * s, dv * s, np.cos(theta)], axis=0)
    rays[:, r == 0.0] = np.array([0.0, 0.0, 1.0])[:, None]
    _RAY_CACHE[intrinsics] = (rays, valid)
    return rays, valid


def render_fisheye_view(
    world: WorldSpec, intrinsics: FisheyeIntrinsics, pose: CameraPose
) -> np.ndarray:
    """Synthetic fisheye frame: ground-sampling where rays hit the plane, else 0."""
    if pose.position[2] <= 0:
        raise ValueError("camera height must be positive")
    rays_cam, in_fov = _camera_rays(intrinsics)
    rot = pose.matrix()
    rays = np.tensordot(rot, rays_cam, axes=([1], [0]))
    down = rays[2] < 0
    hit = in_fov & down
    t = np.where(hit, -pose.position[2] / np.where(down, rays[2], -1.0), 0.0)
    gx = pose.position[0] + t * rays[0]
    gz = pose.position[1] + t * rays[1]
    img = np.zeros((intrinsics.height, intrinsics.width), dtype=np.uint8)
    if hit.any():
        vals = ground_intensity(world, gx[hit], gz[hit])
        img[hit] = np.rint(vals * 255.0).astype(np.uint8)
    return img


@dataclass(frozen=True)
class Lut:
    """Per-aerial-pixel mapping to (camera id, fractional source pixel).

    Sampling indices and fixed-point bilinear weights are derived once at build
    time so applying the table is a pure gather.
    """

    camera: np.ndarray  # int8, -1 marks invalid pixels
    u: np.ndarray  # float32 source columns
    v: np.ndarray  # float32 source rows
    spec: AvmSpec
    fingerprint: str
    image_sizes: tuple[tuple[int, int], ...]  # (width, height) per camera
    base_idx: np.ndarray  # flat index into the stacked camera images
    weights: tuple  # four int32 fixed-point (16-bit) corner weights


def _project_points(rig: CameraRig, ci: int, px: np.ndarray, pz: np.ndarray):
    """Project ground points through camera ci; returns (u, v, valid) float32."""
    intr = rig.intrinsics[ci]
    pose = rig.poses[ci]
    rot = pose.matrix().astype(np.float32)
    dx = px - np.float32(pose.position[0])
    dz = pz - np.float32(pose.position[1])
    ph = np.float32(-pose.position[2])
    cx = rot[0, 0] * dx
    cx += rot[1, 0] * dz
    cx += rot[2, 0] * ph
    cy = rot[0, 1] * dx
    cy += rot[1, 1] * dz
    cy += rot[2, 1] * ph
    cz = rot[0, 2] * dx
    cz += rot[1, 2] * dz
    cz += rot[2, 2] * ph
    rho = np.hypot(cx, cy)
    theta = np.arctan2(rho, cz)
    rho[rho == 0.0] = 1.0  # on-axis points: azimuth scale is irrelevant
    scale = np.float32(intr.focal) * theta
    scale /= rho
    uu = scale * cx
    uu += np.float32(intr.cx)
    vv = scale * cy
    vv += np.float32(intr.cy)
    ok = theta <= np.float32(intr.fov / 2.0)
    ok &= uu >= 0.0
    ok &= uu <= np.float32(intr.width - 1)
    ok &= vv >= 0.0
    ok &= vv <= np.float32(intr.height - 1)
    return uu, vv, ok


def _sector_assignment(rig: CameraRig, gx: np.ndarray, gz: np.ndarray):
    """Nearest-azimuth camera per pixel plus the azimuth dot products."""
    axes = []
    for pose in rig.poses:
        axis = pose.matrix()[:, 2]
        norm = math.hypot(axis[0], axis[1])
        axes.append((axis[0] / norm, axis[1] / norm) if norm > 0 else (1.0, 0.0))
    canonical = (
        abs(axes[0][0] - 1.0) < 1e-12 and abs(axes[0][1]) < 1e-12
        and abs(axes[1][0] + 1.0) < 1e-12 and abs(axes[1][1]) < 1e-12
        and abs(axes[2][0]) < 1e-12 and abs(axes[2][1] - 1.0) < 1e-12
        and abs(axes[3][0]) < 1e-12 and abs(axes[3][1] + 1.0) < 1e-12
    )
    if canonical:
        # front/rear/left/right point along +x/-x/+z/-z: quadrant comparison
        ax_ge = np.abs(gx) >= np.abs(gz)
        sector = np.where(
            ax_ge,
            np.where(gx >= 0.0, 0, 1),
            np.where(gz >= 0.0, 2, 3),
        ).astype(np.int8)
        return sector, axes, None
    dots = [gx * ax + gz * az for ax, az in axes]
    lead01 = dots[1] > dots[0]
    lead23 = dots[3] > dots[2]
    best01 = np.where(lead01, dots[1], dots[0])
    best23 = np.where(lead23, dots[3], dots[2])
    sector = np.where(
        best23 > best01,
        np.where(lead23, 3, 2),
        np.where(lead01, 1, 0),
    ).astype(np.int8)
    return sector, axes, dots


def _mapping_tables(rig: CameraRig, spec: AvmSpec):
    """Sector-assign, project, and derive sampling tables for every pixel.

    Returns (cam, u, v, base, weights); build_lut stores them, remap_direct
    recomputes them per call. One shared routine keeps both paths identical.
    """
    w, h = rig.intrinsics[0].width, rig.intrinsics[0].height
    plane = h * w
    fwd, left = spec.pixel_offsets()
    shape = fwd.shape
    gx = fwd.ravel()
    gz = left.ravel()
    sector, axes, dots = _sector_assignment(rig, gx, gz)

    cam = np.full(gx.shape, -1, dtype=np.int8)
    u = np.zeros(gx.shape, dtype=np.float32)
    v = np.zeros(gx.shape, dtype=np.float32)
    base = np.zeros(gx.shape, dtype=np.intp)
    weights = tuple(np.zeros(gx.shape, dtype=np.int32) for _ in range(4))

    def fill(ci: int, sel: np.ndarray) -> None:
        uu, vv, ok = _project_points(rig, ci, gx[sel], gz[sel])
        hit = sel[ok]
        if hit.size == 0:
            return
        uu = uu[ok]
        vv = vv[ok]
        cam[hit] = ci
        u[hit] = uu
        v[hit] = vv
        x0f = np.minimum(np.floor(uu), np.float32(w - 2))
        y0f = np.minimum(np.floor(vv), np.float32(h - 2))
        uu -= x0f
        vv -= y0f
        wx = np.rint(uu * np.float32(256.0)).astype(np.int32)
        wy = np.rint(vv * np.float32(256.0)).astype(np.int32)
        idx = y0f.astype(np.intp)
        idx *= w
        idx += x0f.astype(np.intp)
        idx += ci * plane
        base[hit] = idx
        cwx = 256 - wx
        cwy = 256 - wy
        weights[0][hit] = cwx * cwy
        weights[1][hit] = wx * cwy
        weights[2][hit] = cwx * wy
        weights[3][hit] = wx * wy

    for ci in range(4):
        sel = np.nonzero(sector == ci)[0]
        if sel.size:
            fill(ci, sel)

    # Pixels the sector camera cannot see fall back to the next-nearest azimuth.
    pending = np.nonzero(cam == -1)[0]
    if pending.size:
        if dots is None:
            sub = np.stack([gx[pending] * ax + gz[pending] * az for ax, az in axes], axis=0)
        else:
            sub = np.stack([d[pending] for d in dots], axis=0)
        order = np.argsort(-sub, axis=0)
        for rank in range(1, 4):
            if pending.size == 0:
                break
            choice = order[rank]
            for ci in range(4):
                sel = pending[choice == ci]
                if sel.size:
                    fill(ci, sel)
            keep = cam[pending] == -1
            pending = pending[keep]
            order = order[:, keep]

    return (
        cam.reshape(shape),
        u.reshape(shape),
        v.reshape(shape),
        base,
        weights,
    )


def _derive_sampling(cam: np.ndarray, u: np.ndarray, v: np.ndarray, image_sizes):
    """Flat stacked-image indices and folded fixed-point bilinear weights.

    All cameras share one image size, so per-camera strides fold into the base
    index and sampling is camera-agnostic. Weights are 16-bit fixed point with
    invalid pixels zeroed, which makes the gather a pure multiply-accumulate.
    """
    w, h = image_sizes[0]
    flat_cam = cam.reshape(-1)
    uu = u.reshape(-1)
    vv = v.reshape(-1)
    x0 = np.minimum(np.floor(uu), w - 2).astype(np.intp)
    y0 = np.minimum(np.floor(vv), h - 2).astype(np.intp)
    wx = np.rint((uu - x0) * 256.0).astype(np.int32)
    wy = np.rint((vv - y0) * 256.0).astype(np.int32)
    valid = flat_cam >= 0
    np.multiply(wx, valid, out=wx)
    cxw = 256 - wx
    np.multiply(cxw, valid, out=cxw)
    base = np.maximum(flat_cam, 0).astype(np.intp) * (h * w) + y0 * w + x0
    weights = (cxw * (256 - wy), wx * (256 - wy), cxw * wy, wx * wy)
    return base, weights


def _sample(base: np.ndarray, weights, images, shape) -> np.ndarray:
    """Fixed-point bilinear gather shared by the table and direct paths."""
    h, w = images[0].shape
    stack = np.stack(images).reshape(-1)
    acc = stack[base] * weights[0]
    acc += stack[base + 1] * weights[1]
    acc += stack[base + w] * weights[2]
    acc += stack[base + w + 1] * weights[3]
    acc += 32768
    acc >>= 16
    return acc.astype(np.uint8).reshape(shape)


def build_lut(rig: CameraRig, spec: AvmSpec) -> Lut:
    sizes = tuple((intr.width, intr.height) for intr in rig.intrinsics)
    if len(set(sizes)) != 1:
        raise ValueError("all rig cameras must share one image size")
    cam, u, v = _compute_mapping(rig, spec)
    base, weights = _derive_sampling(cam, u, v, sizes)
    return Lut(
        camera=cam, u=u, v=v, spec=spec, fingerprint=rig.fingerprint(),
        image_sizes=sizes, base_idx=base, weights=weights,
    )


def _check_sizes(image_sizes, images) -> None:
    for name, (w, hgt), img in zip(CAMERA_NAMES, image_sizes, images):
        if img.shape != (hgt, w):
            raise ValueError(
                f"{name} image size {img.shape[1]}x{img.shape[0]} does not match the rig "
                f"({w}x{hgt})"
            )


def apply_lut(lut: Lut, images) -> np.ndarray:
    """Compose the aerial image by table lookup; invalid pixels stay 0."""
    _check_sizes(lut.image_sizes, images)
    return _sample(lut.base_idx, lut.weights, images, lut.camera.shape)


def remap_direct(rig: CameraRig, spec: AvmSpec, images) -> np.ndarray:
    """Unaccelerated baseline: recompute every projection per call, then sample
    through the same bilinear path so outputs match the table bit for bit."""
    sizes = tuple((intr.width, intr.height) for intr in rig.intrinsics)
    if len(set(sizes)) != 1:
        raise ValueError("all rig cameras must share one image size")
    _check_sizes(sizes, images)
    cam, u, v = _compute_mapping(rig, spec)
    base, weights = _derive_sampling(cam, u, v, sizes)
    return _sample(base, weights, images, cam.shape)


def render_rig_views(world: WorldSpec, rig: CameraRig, x: float, z: float, heading: float):
    """All four synthetic fisheye frames for a vehicle pose."""
    return [
        render_fisheye_view(world, intr, pose.compose(x, z, heading))
        for pose, intr in zip(rig.poses, rig.intrinsics)
    ]
