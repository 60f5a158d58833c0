import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rgbd360.depth_codec import DepthMap16, RgbImage
from rgbd360.errors import (
    InvalidTessellation,
    MalformedScene,
    MissingAsset,
    VersionMismatch,
    ViewpointOutsideMesh,
)
from rgbd360.raster import Viewpoint, bilinear_sample, camera_basis
from rgbd360.sphere_render import (
    build_sphere_mesh,
    direction_to_equirect,
    displace_vertices,
    equirect_to_direction,
    export_scene,
    load_scene,
    orbit_sequence,
    render_equirect_oracle,
    render_stereo_pair,
    render_view,
)


def smooth_texture(width=512, height=256):
    """Low-frequency test panorama built from the ray direction itself,
    so pole rows are color-consistent like a real equirect photo."""
    u = (np.arange(width) + 0.5) / width
    v = (np.arange(height) + 0.5) / height
    uu, vv = np.meshgrid(u, v)
    d = equirect_to_direction(uu, vv)
    tex = np.floor(127.5 * (1.0 + d) + 0.5).clip(0, 255).astype(np.uint8)
    return RgbImage(tex)


class TestCameraBasis:
    def test_identity_pose(self):
        f, r, u = camera_basis(0.0, 0.0)
        assert f == pytest.approx([1, 0, 0])
        assert r == pytest.approx([0, 0, 1])
        assert u == pytest.approx([0, 1, 0])

    @given(st.floats(-10, 10), st.floats(-1.5, 1.5))
    @settings(max_examples=100)
    def test_orthonormal_right_handed(self, yaw, pitch):
        f, r, u = camera_basis(yaw, pitch)
        for a in (f, r, u):
            assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-12)
        assert f @ r == pytest.approx(0.0, abs=1e-12)
        assert f @ u == pytest.approx(0.0, abs=1e-12)
        assert np.cross(r, u) == pytest.approx(-f, abs=1e-12)

    def test_yaw_matches_longitude(self):
        yaw = 1.1
        f, _, _ = camera_basis(yaw, 0.0)
        u, v = direction_to_equirect(f)
        assert u == pytest.approx(yaw / (2 * np.pi))
        assert v == pytest.approx(0.5)


class TestBilinearSample:
    def test_constant_map_is_exact(self):
        img = np.full((7, 9), 0.5)
        rng = np.random.default_rng(0)
        out = bilinear_sample(img, rng.random(50), rng.random(50))
        assert (out == 0.5).all()

    def test_linear_ramp_midpoint(self):
        img = np.array([[0.0, 1.0]])
        # halfway between the two texel centers
        assert bilinear_sample(img, np.array(0.5), np.array(0.5)) == pytest.approx(0.5)

    def test_horizontal_wrap(self):
        img = np.array([[0.0, 1.0, 2.0, 3.0]])
        # u=0 sits half a texel left of texel 0: blend of texel 3 and 0
        assert bilinear_sample(img, np.array(0.0), np.array(0.5)) == pytest.approx(1.5)


class TestBuildSphere:
    def test_vertex_count(self):
        mesh = build_sphere_mesh(4, 6, 1.0)
        assert mesh.directions.shape == (5 * 7, 3)
        assert mesh.triangles.shape == (4 * 6 * 2, 3)

    def test_equator_vertex_on_x_axis(self):
        mesh = build_sphere_mesh(2, 4, 1.0)
        # row 1 is the equator; column 0 is longitude zero
        v = mesh.positions.reshape(3, 5, 3)[1, 0]
        assert v == pytest.approx([1.0, 0.0, 0.0], abs=1e-12)

    def test_all_radii_equal_base(self):
        mesh = build_sphere_mesh(8, 12, 2.5)
        assert np.abs(np.linalg.norm(mesh.positions, axis=1) - 2.5).max() < 1e-12

    def test_pole_rows_collapse_but_keep_uvs(self):
        mesh = build_sphere_mesh(4, 8, 1.0)
        dirs = mesh.directions.reshape(5, 9, 3)
        uvs = mesh.uvs.reshape(5, 9, 2)
        assert np.abs(dirs[0] - [0, 1, 0]).max() < 1e-12
        assert len(np.unique(uvs[0][:, 0])) == 9

    def test_triangle_indices_valid(self):
        mesh = build_sphere_mesh(5, 7, 1.0)
        assert mesh.triangles.min() >= 0
        assert mesh.triangles.max() < mesh.directions.shape[0]

    @pytest.mark.parametrize("rows,cols,r", [(1, 4, 1.0), (2, 2, 1.0), (2, 4, 0.0)])
    def test_invalid_tessellation(self, rows, cols, r):
        with pytest.raises(InvalidTessellation):
            build_sphere_mesh(rows, cols, r)


class TestDisplacement:
    def test_half_depth_is_bitwise_identity(self):
        mesh = build_sphere_mesh(16, 32, 2.0)
        displaced = displace_vertices(mesh, np.full((32, 64), 0.5), 1.3)
        assert np.array_equal(displaced.radii, mesh.radii)

    def test_full_depth_halves_radius(self):
        mesh = build_sphere_mesh(8, 12, 2.0)
        displaced = displace_vertices(mesh, np.ones((16, 32)), 0.5)
        assert displaced.radii == pytest.approx(np.full_like(mesh.radii, 1.0))

    def test_zero_depth_grows_radius(self):
        mesh = build_sphere_mesh(8, 12, 2.0)
        displaced = displace_vertices(mesh, np.zeros((16, 32)), 0.5)
        assert displaced.radii == pytest.approx(np.full_like(mesh.radii, 3.0))

    def test_monotone_in_depth(self):
        mesh = build_sphere_mesh(8, 12, 1.0)
        radii = [
            displace_vertices(mesh, np.full((4, 8), d), 0.8).radii.mean()
            for d in (0.0, 0.25, 0.5, 0.75, 1.0)
        ]
        assert all(a > b for a, b in zip(radii, radii[1:]))

    def test_clamp_prevents_inversion(self):
        mesh = build_sphere_mesh(8, 12, 2.0)
        displaced = displace_vertices(mesh, np.ones((4, 8)), 10.0)
        assert displaced.radii.min() == pytest.approx(0.05 * 2.0)

    def test_directions_unchanged(self):
        mesh = build_sphere_mesh(8, 12, 1.0)
        rng = np.random.default_rng(0)
        displaced = displace_vertices(mesh, rng.random((16, 32)), 0.7)
        assert np.array_equal(displaced.directions, mesh.directions)

    def test_uint16_depth_map_accepted(self):
        mesh = build_sphere_mesh(8, 12, 1.0)
        depth = DepthMap16(np.full((16, 32), 65535, np.uint16))
        displaced = displace_vertices(mesh, depth, 0.5)
        assert displaced.radii == pytest.approx(np.full_like(mesh.radii, 0.5))


class TestRenderView:
    def test_origin_matches_ray_oracle(self):
        tex = smooth_texture()
        mesh = build_sphere_mesh(96, 192, 2.0)
        vp = Viewpoint(position=np.zeros(3), yaw=0.9, pitch=-0.3, width=160, height=160)
        got = render_view(mesh, tex, vp).pixels.astype(float)
        want = render_equirect_oracle(tex, vp).pixels.astype(float)
        err = np.abs(got - want) / 255.0
        assert err.mean() < 2 / 255
        assert err.max() < 16 / 255

    def test_origin_invariant_to_displacement_strength(self):
        tex = smooth_texture()
        base = build_sphere_mesh(96, 192, 2.0)
        u = (np.arange(128) + 0.5) / 128
        v = (np.arange(64) + 0.5) / 64
        uu, vv = np.meshgrid(u, v)
        depth = 0.5 + 0.3 * np.sin(4 * np.pi * uu) * np.cos(2 * np.pi * vv)
        vp = Viewpoint(position=np.zeros(3), yaw=0.4, pitch=0.1, width=128, height=128)
        frames = []
        for k in (0.0, 0.4):
            mesh = displace_vertices(base, depth, k)
            frames.append(render_view(mesh, tex, vp).pixels.astype(float))
        assert np.abs(frames[0] - frames[1]).mean() / 255 < 2 / 255

    def test_solid_texture_gives_solid_frame(self):
        tex = RgbImage(np.full((64, 128, 3), 77, np.uint8))
        mesh = build_sphere_mesh(32, 64, 1.0)
        vp = Viewpoint(position=np.array([0.2, -0.1, 0.3]), yaw=2.0, pitch=0.5,
                       width=96, height=64)
        frame = render_view(mesh, tex, vp)
        assert (frame.pixels == 77).all()

    def test_viewpoint_outside_rejected(self):
        mesh = build_sphere_mesh(8, 12, 1.0)
        tex = smooth_texture(64, 32)
        vp = Viewpoint(position=np.array([1.0, 0.0, 0.0]))
        with pytest.raises(ViewpointOutsideMesh):
            render_view(mesh, tex, vp)

    def test_viewpoint_must_be_inside_displaced_surface(self):
        mesh = displace_vertices(build_sphere_mesh(8, 12, 1.0), np.ones((4, 8)), 0.5)
        tex = smooth_texture(64, 32)
        # radius shrank to 0.5 everywhere, so 0.8 is now outside
        with pytest.raises(ViewpointOutsideMesh):
            render_view(mesh, tex, Viewpoint(position=np.array([0.0, 0.0, 0.8])))

    def test_determinism(self):
        tex = smooth_texture(128, 64)
        mesh = build_sphere_mesh(32, 64, 1.0)
        vp = Viewpoint(position=np.array([0.1, 0.05, -0.2]), yaw=1.0, pitch=-0.2,
                       width=80, height=60)
        a = render_view(mesh, tex, vp)
        b = render_view(mesh, tex, vp)
        assert np.array_equal(a.pixels, b.pixels)


def two_plane_scene(k=0.5):
    """Gray panorama with a red near patch and a blue far patch at the
    equator, either side of longitude zero."""
    width, height = 512, 256
    tex = np.full((height, width, 3), 128, np.uint8)
    depth = np.full((height, width), 0.5)
    rows = slice(int(0.45 * height), int(0.55 * height))
    red = slice(int(0.94 * width), int(0.97 * width))  # longitude -22..-11 deg
    blue = slice(int(0.03 * width), int(0.06 * width))  # longitude +11..+22 deg
    tex[rows, red] = [255, 0, 0]
    tex[rows, blue] = [0, 0, 255]
    depth[rows, red] = 0.9  # near
    depth[rows, blue] = 0.1  # far
    mesh = displace_vertices(build_sphere_mesh(128, 256, 2.0), depth, k)
    return mesh, RgbImage(tex)


def color_centroid_x(frame: RgbImage, color: str) -> float:
    px = frame.pixels.astype(float)
    if color == "red":
        mask = (px[:, :, 0] > 180) & (px[:, :, 1] < 90) & (px[:, :, 2] < 90)
    else:
        mask = (px[:, :, 2] > 180) & (px[:, :, 0] < 90) & (px[:, :, 1] < 90)
    ys, xs = np.nonzero(mask)
    assert xs.size > 0, f"no {color} pixels found"
    return float(xs.mean())


class TestStereo:
    def test_zero_ipd_identical(self):
        mesh, tex = two_plane_scene()
        vp = Viewpoint(position=np.zeros(3), fov_y=1.2, width=128, height=96)
        left, right = render_stereo_pair(mesh, tex, vp, ipd=0.0)
        assert np.array_equal(left.pixels, right.pixels)

    def test_near_feature_has_larger_disparity(self):
        mesh, tex = two_plane_scene()
        vp = Viewpoint(position=np.zeros(3), fov_y=1.2, width=320, height=200)
        left, right = render_stereo_pair(mesh, tex, vp, ipd=0.12)
        near_disp = color_centroid_x(left, "red") - color_centroid_x(right, "red")
        far_disp = color_centroid_x(left, "blue") - color_centroid_x(right, "blue")
        assert abs(near_disp) > abs(far_disp)

    def test_swapping_eyes_mirrors_disparity(self):
        mesh, tex = two_plane_scene()
        vp = Viewpoint(position=np.zeros(3), fov_y=1.2, width=320, height=200)
        left, right = render_stereo_pair(mesh, tex, vp, ipd=0.12)
        d_lr = color_centroid_x(left, "red") - color_centroid_x(right, "red")
        d_rl = color_centroid_x(right, "red") - color_centroid_x(left, "red")
        assert d_lr == pytest.approx(-d_rl)
        assert d_lr != 0.0


class TestOrbit:
    def _scene(self):
        return build_sphere_mesh(16, 32, 1.0), smooth_texture(128, 64)

    def test_one_frame(self, tmp_path):
        mesh, tex = self._scene()
        vp = Viewpoint(position=np.zeros(3), width=32, height=32)
        files = orbit_sequence(mesh, tex, [vp], tmp_path)
        assert [f.name for f in files] == ["frame_00000.png"]
        assert files[0].is_file()

    def test_identical_viewpoints_identical_bytes(self, tmp_path):
        mesh, tex = self._scene()
        vp = Viewpoint(position=np.array([0.1, 0.0, 0.0]), width=32, height=32)
        files = orbit_sequence(mesh, tex, [vp, vp, vp], tmp_path)
        blobs = [f.read_bytes() for f in files]
        assert blobs[0] == blobs[1] == blobs[2]

    def test_closed_path_endpoints_match(self, tmp_path):
        mesh, tex = self._scene()
        path = [
            Viewpoint(position=np.array([0.2 * np.cos(a), 0.0, -0.2 * np.sin(a)]),
                      yaw=a, width=32, height=32)
            for a in (0.0, np.pi / 2, np.pi, 3 * np.pi / 2, 0.0)
        ]
        files = orbit_sequence(mesh, tex, path, tmp_path)
        assert files[0].read_bytes() == files[-1].read_bytes()

    def test_invalid_viewpoint_aborts_with_index(self, tmp_path):
        mesh, tex = self._scene()
        good = Viewpoint(position=np.zeros(3), width=32, height=32)
        bad = Viewpoint(position=np.array([5.0, 0.0, 0.0]), width=32, height=32)
        with pytest.raises(ViewpointOutsideMesh, match="viewpoint 2"):
            orbit_sequence(mesh, tex, [good, good, bad], tmp_path)
        assert list(tmp_path.iterdir()) == []  # validated before writing


class TestSceneBundle:
    def _assets(self):
        rng = np.random.default_rng(0)
        tex = smooth_texture(128, 64)
        depth = DepthMap16(rng.integers(0, 65536, (64, 128)).astype(np.uint16))
        mesh = build_sphere_mesh(16, 32, 2.0)
        return mesh, tex, depth

    def test_roundtrip_reproduces_radii(self, tmp_path):
        mesh, tex, depth = self._assets()
        k = 0.35
        export_scene(mesh, tex, depth, tmp_path / "scene", k)
        bundle = load_scene(tmp_path / "scene")
        rebuilt = bundle.displaced_mesh()
        original = displace_vertices(mesh, depth, k)
        assert np.abs(rebuilt.radii - original.radii).max() < 1e-6

    def test_scene_json_has_version_one(self, tmp_path):
        mesh, tex, depth = self._assets()
        export_scene(mesh, tex, depth, tmp_path / "scene", 0.2)
        meta = json.loads((tmp_path / "scene" / "scene.json").read_text())
        assert meta["version"] == 1
        assert meta["axes"]["up"] == "+Y"

    def test_missing_depth_rejected(self, tmp_path):
        mesh, tex, _ = self._assets()
        with pytest.raises(MissingAsset):
            export_scene(mesh, tex, None, tmp_path / "scene", 0.2)

    def test_unknown_version_rejected(self, tmp_path):
        mesh, tex, depth = self._assets()
        export_scene(mesh, tex, depth, tmp_path / "scene", 0.2)
        path = tmp_path / "scene" / "scene.json"
        meta = json.loads(path.read_text())
        meta["version"] = 2
        path.write_text(json.dumps(meta))
        with pytest.raises(VersionMismatch):
            load_scene(tmp_path / "scene")

    def test_corrupt_json_rejected(self, tmp_path):
        mesh, tex, depth = self._assets()
        export_scene(mesh, tex, depth, tmp_path / "scene", 0.2)
        (tmp_path / "scene" / "scene.json").write_text("{not json")
        with pytest.raises(MalformedScene):
            load_scene(tmp_path / "scene")

    def test_missing_texture_file_rejected(self, tmp_path):
        mesh, tex, depth = self._assets()
        export_scene(mesh, tex, depth, tmp_path / "scene", 0.2)
        (tmp_path / "scene" / "texture.png").unlink()
        with pytest.raises(MissingAsset):
            load_scene(tmp_path / "scene")

    def test_render_from_bundle_matches_original(self, tmp_path):
        mesh, tex, depth = self._assets()
        export_scene(mesh, tex, depth, tmp_path / "scene", 0.3)
        bundle = load_scene(tmp_path / "scene")
        vp = Viewpoint(position=np.zeros(3), yaw=0.5, width=48, height=48)
        a = render_view(displace_vertices(mesh, depth, 0.3), tex, vp)
        b = render_view(bundle.displaced_mesh(), bundle.texture, vp)
        assert np.array_equal(a.pixels, b.pixels)
