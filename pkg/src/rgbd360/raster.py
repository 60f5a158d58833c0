"""Software rasterizer: perspective projection, near-plane clipping,
z-buffered triangle fill with perspective-correct bilinear texturing.

Axis and camera conventions (shared with the sphere mesh and the web
viewer, and recorded in exported scene.json files):
  - right-handed world, +Y up, longitude zero along +X, positive
    longitude rotating +X toward -Z (right-hand rule about +Y);
  - camera yaw is the longitude of the view direction, pitch positive
    looks up; camera right at yaw is (sin yaw, 0, cos yaw);
  - screen x grows right, screen y grows down, pixel centers at +0.5.

Texture sampling is bilinear with horizontal wrap and vertical clamp,
texel centers at +0.5, written in lerp form so sampling a constant map
reproduces the constant bitwise.

The per-triangle fill runs under numba; everything else is numpy. The
fill is sequential over triangles, so output is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import InvalidRange


@dataclass(frozen=True)
class Viewpoint:
    """Camera pose and intrinsics for one rendered frame."""

    position: np.ndarray  # (3,) world units
    yaw: float = 0.0
    pitch: float = 0.0
    fov_y: float = np.pi / 3
    width: int = 512
    height: int = 512

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64).reshape(3)
        object.__setattr__(self, "position", pos)
        if not (0.0 < self.fov_y < np.pi):
            raise InvalidRange(f"fov_y must be in (0, pi), got {self.fov_y}")
        if self.width < 1 or self.height < 1:
            raise InvalidRange(f"frame size must be positive, got {self.width}x{self.height}")


def camera_basis(yaw: float, pitch: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(forward, right, up) unit vectors; right stays horizontal at any pitch."""
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    forward = np.array([cp * cy, sp, -cp * sy])
    right = np.array([sy, 0.0, cy])
    up = np.array([-sp * cy, cp, sp * sy])
    return forward, right, up


def bilinear_sample(img: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized bilinear lookup at normalized (u, v), wrap-x / clamp-y.

    img is (H, W) or (H, W, C); u and v may have any broadcastable shape.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[0], img.shape[1]
    tx = np.asarray(u, dtype=np.float64) * w - 0.5
    ty = np.asarray(v, dtype=np.float64) * h - 0.5
    x0 = np.floor(tx)
    y0 = np.floor(ty)
    fx = tx - x0
    fy = ty - y0
    x0i = np.mod(x0.astype(np.int64), w)
    x1i = np.mod(x0i + 1, w)
    y0i = np.clip(y0.astype(np.int64), 0, h - 1)
    y1i = np.clip(y0i + 1, 0, h - 1)
    if img.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    v00 = img[y0i, x0i]
    v01 = img[y0i, x1i]
    v10 = img[y1i, x0i]
    v11 = img[y1i, x1i]
    top = v00 + fx * (v01 - v00)
    bot = v10 + fx * (v11 - v10)
    return top + fy * (bot - top)


def _clip_triangle_near(pts: np.ndarray, near: float) -> np.ndarray:
    """Sutherland-Hodgman clip of one triangle against z = near.

    pts is (3, 5): camera-space x, y, z plus u, v per vertex. Returns the
    clipped polygon as (k, 5) with k in {0, 3, 4}; attributes interpolate
    linearly in camera space, which is exact for a planar triangle.
    """
    out = []
    for i in range(3):
        a = pts[i]
        b = pts[(i + 1) % 3]
        ina = a[2] > near
        inb = b[2] > near
        if ina:
            out.append(a)
        if ina != inb:
            t = (near - a[2]) / (b[2] - a[2])
            out.append(a + t * (b - a))
    return np.asarray(out).reshape(-1, 5)


@njit(cache=True)
def _fill_triangles(sx, sy, zc, tu, tv, tex, out, zbuf):
    """Z-buffered fill of projected triangles with perspective-correct UVs.

    sx, sy: (M, 3) screen coords; zc: (M, 3) camera depths (> 0);
    tu, tv: (M, 3) texture coords; tex: (Ht, Wt, 3) float32 in 0..255;
    out: (H, W, 3) float32; zbuf: (H, W) float64.
    """
    height, width = out.shape[0], out.shape[1]
    th, tw = tex.shape[0], tex.shape[1]
    for m in range(sx.shape[0]):
        x0, x1, x2 = sx[m, 0], sx[m, 1], sx[m, 2]
        y0, y1, y2 = sy[m, 0], sy[m, 1], sy[m, 2]
        area = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area == 0.0:
            continue
        inv_area = 1.0 / area

        lo_x = min(x0, min(x1, x2))
        hi_x = max(x0, max(x1, x2))
        lo_y = min(y0, min(y1, y2))
        hi_y = max(y0, max(y1, y2))
        px0 = int(np.ceil(lo_x - 0.5))
        px1 = int(np.floor(hi_x - 0.5))
        py0 = int(np.ceil(lo_y - 0.5))
        py1 = int(np.floor(hi_y - 0.5))
        if px0 < 0:
            px0 = 0
        if py0 < 0:
            py0 = 0
        if px1 > width - 1:
            px1 = width - 1
        if py1 > height - 1:
            py1 = height - 1
        if px0 > px1 or py0 > py1:
            continue

        iz0 = 1.0 / zc[m, 0]
        iz1 = 1.0 / zc[m, 1]
        iz2 = 1.0 / zc[m, 2]
        uz0 = tu[m, 0] * iz0
        uz1 = tu[m, 1] * iz1
        uz2 = tu[m, 2] * iz2
        vz0 = tv[m, 0] * iz0
        vz1 = tv[m, 1] * iz1
        vz2 = tv[m, 2] * iz2

        for py in range(py0, py1 + 1):
            cy = py + 0.5
            for px in range(px0, px1 + 1):
                cx = px + 0.5
                w0 = ((x2 - x1) * (cy - y1) - (y2 - y1) * (cx - x1)) * inv_area
                if w0 < 0.0:
                    continue
                w1 = ((x0 - x2) * (cy - y2) - (y0 - y2) * (cx - x2)) * inv_area
                if w1 < 0.0:
                    continue
                w2 = 1.0 - w0 - w1
                if w2 < 0.0:
                    continue
                iz = w0 * iz0 + w1 * iz1 + w2 * iz2
                z = 1.0 / iz
                if z >= zbuf[py, px]:
                    continue
                zbuf[py, px] = z
                uu = (w0 * uz0 + w1 * uz1 + w2 * uz2) * z
                vv = (w0 * vz0 + w1 * vz1 + w2 * vz2) * z

                tx = uu * tw - 0.5
                ty = vv * th - 0.5
                fx0 = np.floor(tx)
                fy0 = np.floor(ty)
                fx = tx - fx0
                fy = ty - fy0
                xi0 = int(fx0) % tw
                xi1 = (xi0 + 1) % tw
                yi0 = int(fy0)
                if yi0 < 0:
                    yi0 = 0
                if yi0 > th - 1:
                    yi0 = th - 1
                yi1 = yi0 + 1
                if yi1 > th - 1:
                    yi1 = th - 1
                for ch in range(3):
                    v00 = tex[yi0, xi0, ch]
                    v01 = tex[yi0, xi1, ch]
                    v10 = tex[yi1, xi0, ch]
                    v11 = tex[yi1, xi1, ch]
                    top = v00 + fx * (v01 - v00)
                    bot = v10 + fx * (v11 - v10)
                    out[py, px, ch] = top + fy * (bot - top)


def rasterize(
    cam_xyz: np.ndarray,
    uvs: np.ndarray,
    triangles: np.ndarray,
    tex: np.ndarray,
    width: int,
    height: int,
    fov_y: float,
    near: float,
    background: float = 0.0,
) -> np.ndarray:
    """Render camera-space geometry to a float32 (H, W, 3) frame in 0..255.

    cam_xyz is (N, 3) with x right, y up, z depth along the view axis;
    triangles fully behind the near plane are dropped and straddling ones
    are clipped.
    """
    cam_xyz = np.asarray(cam_xyz, dtype=np.float64)
    uvs = np.asarray(uvs, dtype=np.float64)
    tris = np.asarray(triangles, dtype=np.int64)

    z = cam_xyz[:, 2]
    front = z > near
    tri_front = front[tris]
    n_front = tri_front.sum(axis=1)

    keep = tris[n_front == 3]
    data = np.concatenate([cam_xyz, uvs], axis=1)  # (N, 5)

    polys = [data[keep]]  # (K, 3, 5)
    for tri in tris[(n_front > 0) & (n_front < 3)]:
        poly = _clip_triangle_near(data[tri], near)
        for k in range(1, poly.shape[0] - 1):
            polys.append(poly[[0, k, k + 1]][None, :, :])
    packed = np.concatenate(polys, axis=0) if polys else np.empty((0, 3, 5))

    focal = (height / 2.0) / np.tan(fov_y / 2.0)
    zc = packed[:, :, 2]
    sx = width / 2.0 + focal * packed[:, :, 0] / zc
    sy = height / 2.0 - focal * packed[:, :, 1] / zc

    out = np.full((height, width, 3), background, dtype=np.float32)
    zbuf = np.full((height, width), np.inf, dtype=np.float64)
    _fill_triangles(
        np.ascontiguousarray(sx),
        np.ascontiguousarray(sy),
        np.ascontiguousarray(zc),
        np.ascontiguousarray(packed[:, :, 3]),
        np.ascontiguousarray(packed[:, :, 4]),
        np.ascontiguousarray(tex, dtype=np.float32),
        out,
        zbuf,
    )
    return out


def quantize_frame(frame: np.ndarray) -> np.ndarray:
    """0..255 floats to uint8, rounding half away from zero."""
    return np.floor(np.clip(frame, 0.0, 255.0) + 0.5).astype(np.uint8)
