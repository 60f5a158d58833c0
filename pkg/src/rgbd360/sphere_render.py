"""Immersive 360-degree pipeline: equirectangular textures on a lat-long
sphere, depth-driven radial vertex displacement, rendering from inside
the sphere, stereo pairs, orbit frame sequences, and scene bundles.

Depth semantics: sampled depth d in [0, 1] moves a vertex radially by
r' = r * (1 + k * (1 - 2d)), so d = 0.5 leaves the sphere untouched,
d -> 1 pulls vertices toward the origin and d -> 0 pushes them away.
The displaced radius is clamped to 0.05 * r to avoid inverted geometry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import fileio
from .depth_codec import DepthMap16, RgbImage
from .errors import (
    InvalidTessellation,
    MalformedScene,
    MissingAsset,
    VersionMismatch,
    ViewpointOutsideMesh,
)
from .raster import (
    Viewpoint,
    bilinear_sample,
    camera_basis,
    quantize_frame,
    rasterize,
)

SCENE_FORMAT_VERSION = 1
RADIUS_CLAMP = 0.05

AXIS_CONVENTIONS = {
    "handedness": "right",
    "up": "+Y",
    "longitude_zero": "+X",
    "longitude_positive": "+X toward -Z (right-hand rule about +Y)",
    "polar_angle_from": "+Y",
}


@dataclass(frozen=True)
class SphereMesh:
    """Lat-long tessellated sphere with radial per-vertex distances.

    Vertex (i, j) sits at polar angle pi*i/rows from +Y and longitude
    2*pi*j/cols, with UV (j/cols, i/rows); the duplicated seam column and
    the positionally collapsed pole rows keep their own UVs.
    """

    rows: int
    cols: int
    base_radius: float
    directions: np.ndarray  # (N, 3) unit vectors
    radii: np.ndarray  # (N,)
    uvs: np.ndarray  # (N, 2)
    triangles: np.ndarray  # (M, 3) int

    @property
    def positions(self) -> np.ndarray:
        return self.directions * self.radii[:, None]

    @property
    def min_radius(self) -> float:
        return float(self.radii.min())


def build_sphere_mesh(rows: int, cols: int, base_radius: float = 1.0) -> SphereMesh:
    """Tessellate the sphere into a (rows+1) x (cols+1) vertex grid."""
    if rows < 2 or cols < 3:
        raise InvalidTessellation(f"need rows >= 2 and cols >= 3, got {rows}x{cols}")
    if base_radius <= 0:
        raise InvalidTessellation(f"base_radius must be positive, got {base_radius}")

    i = np.arange(rows + 1)
    j = np.arange(cols + 1)
    v = i / rows
    u = j / cols
    polar = np.pi * v  # angle from +Y
    lon = 2.0 * np.pi * u

    sin_p = np.sin(polar)[:, None]
    cos_p = np.cos(polar)[:, None]
    cos_l = np.cos(lon)[None, :]
    sin_l = np.sin(lon)[None, :]
    dirs = np.stack(
        [
            sin_p * cos_l,
            np.broadcast_to(cos_p, (rows + 1, cols + 1)),
            -sin_p * sin_l,
        ],
        axis=-1,
    ).reshape(-1, 3)
    uu, vv = np.meshgrid(u, v)
    uvs = np.stack([uu, vv], axis=-1).reshape(-1, 2)

    idx = np.arange((rows + 1) * (cols + 1)).reshape(rows + 1, cols + 1)
    a = idx[:-1, :-1].ravel()
    b = idx[1:, :-1].ravel()
    c = idx[:-1, 1:].ravel()
    d = idx[1:, 1:].ravel()
    triangles = np.concatenate(
        [np.stack([a, b, c], axis=1), np.stack([b, d, c], axis=1)], axis=0
    )

    return SphereMesh(
        rows=rows,
        cols=cols,
        base_radius=float(base_radius),
        directions=dirs,
        radii=np.full(dirs.shape[0], float(base_radius)),
        uvs=uvs,
        triangles=triangles,
    )


def _normalized_depth(depth: DepthMap16 | np.ndarray) -> np.ndarray:
    if isinstance(depth, DepthMap16):
        return depth.values.astype(np.float64) / 65535.0
    arr = np.asarray(depth, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"depth map must be 2-D, got shape {arr.shape}")
    return arr


def displace_vertices(
    mesh: SphereMesh, depth: DepthMap16 | np.ndarray, k: float
) -> SphereMesh:
    """Radially displace vertices by depth sampled bilinearly at their UVs."""
    if k < 0:
        raise ValueError(f"displacement strength must be >= 0, got {k}")
    d = bilinear_sample(_normalized_depth(depth), mesh.uvs[:, 0], mesh.uvs[:, 1])
    radii = mesh.radii * (1.0 + k * (1.0 - 2.0 * d))
    radii = np.maximum(radii, RADIUS_CLAMP * mesh.radii)
    return replace(mesh, radii=radii)


def _check_inside(mesh: SphereMesh, vp: Viewpoint) -> None:
    dist = float(np.linalg.norm(vp.position))
    if dist >= mesh.min_radius:
        raise ViewpointOutsideMesh(
            f"viewpoint at distance {dist:.6g} is not strictly inside the "
            f"displaced surface (min vertex radius {mesh.min_radius:.6g})"
        )


def render_view(mesh: SphereMesh, tex: RgbImage, vp: Viewpoint) -> RgbImage:
    """Rasterize the textured sphere from a viewpoint inside it."""
    _check_inside(mesh, vp)
    forward, right, up = camera_basis(vp.yaw, vp.pitch)
    rel = mesh.positions - vp.position
    cam = np.stack([rel @ right, rel @ up, rel @ forward], axis=1)
    near = max(1e-6, 1e-4 * mesh.base_radius)
    frame = rasterize(
        cam,
        mesh.uvs,
        mesh.triangles,
        tex.pixels.astype(np.float32),
        vp.width,
        vp.height,
        vp.fov_y,
        near,
    )
    return RgbImage(quantize_frame(frame))


def render_equirect_oracle(tex: RgbImage, vp: Viewpoint) -> RgbImage:
    """Mesh-free reference render: per-pixel ray direction looked up
    directly in the equirectangular texture. Only meaningful from the
    origin, where sphere geometry does not occlude or parallax-shift."""
    forward, right, up = camera_basis(vp.yaw, vp.pitch)
    focal = (vp.height / 2.0) / np.tan(vp.fov_y / 2.0)
    px = (np.arange(vp.width) + 0.5 - vp.width / 2.0) / focal
    py = (vp.height / 2.0 - (np.arange(vp.height) + 0.5)) / focal
    dirs = (
        forward[None, None, :]
        + px[None, :, None] * right[None, None, :]
        + py[:, None, None] * up[None, None, :]
    )
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    u, v = direction_to_equirect(dirs)
    frame = bilinear_sample(tex.pixels.astype(np.float64), u, v)
    return RgbImage(quantize_frame(frame))


def direction_to_equirect(dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions to (u, v) in [0, 1): longitude over 2*pi, polar
    angle from +Y over pi."""
    x, y, z = dirs[..., 0], dirs[..., 1], dirs[..., 2]
    lon = np.arctan2(-z, x)
    u = np.mod(lon / (2.0 * np.pi), 1.0)
    v = np.arccos(np.clip(y, -1.0, 1.0)) / np.pi
    return u, v


def equirect_to_direction(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    polar = np.pi * np.asarray(v, dtype=np.float64)
    lon = 2.0 * np.pi * np.asarray(u, dtype=np.float64)
    sin_p = np.sin(polar)
    return np.stack(
        [sin_p * np.cos(lon), np.cos(polar), -sin_p * np.sin(lon)], axis=-1
    )


def render_stereo_pair(
    mesh: SphereMesh, tex: RgbImage, center: Viewpoint, ipd: float
) -> tuple[RgbImage, RgbImage]:
    """Render left/right eyes offset by ipd/2 along the view-right axis."""
    if ipd < 0:
        raise ValueError(f"ipd must be >= 0, got {ipd}")
    _, right, _ = camera_basis(center.yaw, center.pitch)
    left_vp = replace(center, position=center.position - right * (ipd / 2.0))
    right_vp = replace(center, position=center.position + right * (ipd / 2.0))
    return render_view(mesh, tex, left_vp), render_view(mesh, tex, right_vp)


def orbit_sequence(
    mesh: SphereMesh, tex: RgbImage, path: list[Viewpoint], out_dir: str | Path
) -> list[Path]:
    """Render one numbered PNG frame per viewpoint, validating the whole
    path before any frame is written."""
    for i, vp in enumerate(path):
        try:
            _check_inside(mesh, vp)
        except ViewpointOutsideMesh as exc:
            raise ViewpointOutsideMesh(f"viewpoint {i}: {exc}") from None
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for i, vp in enumerate(path):
        frame = render_view(mesh, tex, vp)
        p = out_dir / f"frame_{i:05d}.png"
        fileio.write_rgb_png(frame, p)
        files.append(p)
    return files


# ---------------------------------------------------------------------------
# scene bundles


def export_scene(
    mesh: SphereMesh,
    tex: RgbImage,
    depth: DepthMap16 | None,
    out_dir: str | Path,
    k: float,
) -> Path:
    """Write scene.json + texture.png + 16-bit depth.png; the bundle alone
    is enough to rebuild the displaced mesh."""
    if depth is None:
        raise MissingAsset("scene export requires a depth map")
    if not isinstance(depth, DepthMap16):
        raise MissingAsset("scene depth must be a 16-bit depth map")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "version": SCENE_FORMAT_VERSION,
        "rows": mesh.rows,
        "cols": mesh.cols,
        "base_radius": mesh.base_radius,
        "strength": float(k),
        "radius_clamp": RADIUS_CLAMP,
        "displacement": "r' = r * (1 + k * (1 - 2 * d)), clamped to >= radius_clamp * r",
        "axes": AXIS_CONVENTIONS,
        "texture": "texture.png",
        "depth": "depth.png",
    }
    (out_dir / "scene.json").write_text(json.dumps(meta, indent=2) + "\n")
    fileio.write_rgb_png(tex, out_dir / "texture.png")
    fileio.write_depth16_png(depth, out_dir / "depth.png")
    return out_dir


@dataclass(frozen=True)
class SceneBundle:
    meta: dict
    texture: RgbImage
    depth: DepthMap16

    @property
    def strength(self) -> float:
        return float(self.meta["strength"])

    def displaced_mesh(self, k: float | None = None) -> SphereMesh:
        mesh = build_sphere_mesh(
            self.meta["rows"], self.meta["cols"], self.meta["base_radius"]
        )
        return displace_vertices(
            mesh, self.depth, self.strength if k is None else k
        )


def load_scene(bundle_dir: str | Path) -> SceneBundle:
    bundle_dir = Path(bundle_dir)
    scene_path = bundle_dir / "scene.json"
    if not scene_path.is_file():
        raise MissingAsset(f"{scene_path} not found")
    try:
        meta = json.loads(scene_path.read_text())
    except json.JSONDecodeError as exc:
        raise MalformedScene(f"{scene_path}: {exc}") from None
    version = meta.get("version")
    if version != SCENE_FORMAT_VERSION:
        raise VersionMismatch(
            f"unsupported scene version {version!r}; this build reads version "
            f"{SCENE_FORMAT_VERSION}"
        )
    for key in ("rows", "cols", "base_radius", "strength", "texture", "depth"):
        if key not in meta:
            raise MalformedScene(f"scene.json missing required key {key!r}")
    tex_path = bundle_dir / meta["texture"]
    depth_path = bundle_dir / meta["depth"]
    if not tex_path.is_file():
        raise MissingAsset(f"{tex_path} not found")
    if not depth_path.is_file():
        raise MissingAsset(f"{depth_path} not found")
    return SceneBundle(
        meta=meta,
        texture=fileio.read_rgb_png(tex_path),
        depth=fileio.read_depth16_png(depth_path),
    )
