#!/usr/bin/env python3
"""Build a synthetic equirectangular panorama with a matching depth map,
export it as a viewer scene bundle, and render a preview frame plus a
stereo pair.

Usage: python scripts/make_demo_scene.py --out-dir demo_scene
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from rgbd360 import fileio
from rgbd360.depth_codec import DepthMap16, RgbImage
from rgbd360.raster import Viewpoint
from rgbd360.sphere_render import (
    build_sphere_mesh,
    displace_vertices,
    export_scene,
    render_stereo_pair,
    render_view,
)


def synthetic_panorama(width: int, height: int):
    """Sky/ground gradient with colored pillars at distinct longitudes;
    pillars sit near (high d), sky sits far (low d)."""
    u = (np.arange(width) + 0.5) / width
    v = (np.arange(height) + 0.5) / height
    uu, vv = np.meshgrid(u, v)

    tex = np.empty((height, width, 3), np.float64)
    sky = vv < 0.5
    tex[:, :, 0] = np.where(sky, 90 + 60 * vv * 2, 110 + 40 * (vv - 0.5) * 2)
    tex[:, :, 1] = np.where(sky, 140 + 60 * vv * 2, 95 + 30 * (vv - 0.5) * 2)
    tex[:, :, 2] = np.where(sky, 220 - 40 * vv * 2, 70 * np.ones_like(vv))
    depth = np.where(sky, 0.15, 0.55 + 0.2 * (vv - 0.5))

    colors = [(230, 80, 60), (70, 200, 90), (240, 200, 60), (150, 90, 220)]
    for i, color in enumerate(colors):
        center = (i + 0.5) / len(colors)
        in_pillar = (np.abs(uu - center) < 0.025) & (vv > 0.3) & (vv < 0.72)
        for c in range(3):
            tex[:, :, c] = np.where(in_pillar, color[c], tex[:, :, c])
        depth = np.where(in_pillar, 0.85, depth)

    texture = RgbImage(np.floor(tex + 0.5).clip(0, 255).astype(np.uint8))
    depth16 = DepthMap16(np.floor(depth * 65535 + 0.5).astype(np.uint16))
    return texture, depth16


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="demo_scene")
    parser.add_argument("--width", type=int, default=1024)
    parser.add_argument("--height", type=int, default=512)
    parser.add_argument("--rows", type=int, default=192)
    parser.add_argument("--cols", type=int, default=384)
    parser.add_argument("--strength", type=float, default=0.35)
    parser.add_argument("--ipd", type=float, default=0.12)
    args = parser.parse_args()

    texture, depth = synthetic_panorama(args.width, args.height)
    mesh = build_sphere_mesh(args.rows, args.cols, 2.0)
    out_dir = Path(args.out_dir)
    export_scene(mesh, texture, depth, out_dir, args.strength)
    print(f"exported bundle to {out_dir}", file=sys.stderr)

    displaced = displace_vertices(mesh, depth, args.strength)
    vp = Viewpoint(position=np.zeros(3), yaw=np.pi / 4, pitch=0.0,
                   width=640, height=480)
    fileio.write_rgb_png(render_view(displaced, texture, vp), out_dir / "preview.png")
    left, right = render_stereo_pair(displaced, texture, vp, ipd=args.ipd)
    fileio.write_rgb_png(left, out_dir / "preview_left.png")
    fileio.write_rgb_png(right, out_dir / "preview_right.png")
    print("wrote preview.png, preview_left.png, preview_right.png", file=sys.stderr)
    print(f"view it with: rgbd360 serve --bundle {out_dir} --viewer frontend/dist",
          file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
