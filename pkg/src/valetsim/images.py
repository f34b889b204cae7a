"""8-bit grayscale PGM (P5) and color PPM (P6) I/O, plus debug overlays."""

from __future__ import annotations

from pathlib import Path

import numpy as np

SPLIT_COLOR = (220, 40, 40)
BASE_COLOR = (40, 200, 60)
POINT_COLOR = (60, 80, 230)


def write_pgm(path, image: np.ndarray) -> None:
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 2:
        raise ValueError("PGM output requires a 2-D grayscale image")
    header = f"P5\n{image.shape[1]} {image.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + image.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError("not a binary PGM (P5) file")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError("only maxval 255 PGM files are supported")
    pos += 1  # single whitespace after maxval
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return pixels.reshape(height, width).copy()


def write_ppm(path, image: np.ndarray) -> None:
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError("PPM output requires an HxWx3 image")
    header = f"P6\n{image.shape[1]} {image.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + image.tobytes())


def to_rgb(image: np.ndarray) -> np.ndarray:
    return np.repeat(np.asarray(image, dtype=np.uint8)[:, :, None], 3, axis=2)


def draw_segment(rgb: np.ndarray, x0: float, y0: float, x1: float, y1: float, color) -> None:
    """Rasterize a segment by dense sampling; endpoints are pixel coordinates."""
    n = int(max(abs(x1 - x0), abs(y1 - y0), 1.0) * 2) + 1
    xs = np.rint(np.linspace(x0, x1, n)).astype(int)
    ys = np.rint(np.linspace(y0, y1, n)).astype(int)
    ok = (xs >= 0) & (xs < rgb.shape[1]) & (ys >= 0) & (ys < rgb.shape[0])
    rgb[ys[ok], xs[ok]] = color


def draw_point(rgb: np.ndarray, x: float, y: float, color) -> None:
    xi, yi = int(round(x)), int(round(y))
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if abs(dx) + abs(dy) > 1:
                continue
            px, py = xi + dx, yi + dy
            if 0 <= px < rgb.shape[1] and 0 <= py < rgb.shape[0]:
                rgb[py, px] = color


def overlay_detections(image: np.ndarray, segments=(), points=()) -> np.ndarray:
    """Color overlay: split segments red, base segments green, points blue."""
    rgb = to_rgb(image)
    for seg in segments:
        color = BASE_COLOR if getattr(seg, "role", "") == "base" else SPLIT_COLOR
        draw_segment(rgb, seg.x0, seg.y0, seg.x1, seg.y1, color)
    for pt in points:
        draw_point(rgb, pt[0], pt[1], POINT_COLOR)
    return rgb
