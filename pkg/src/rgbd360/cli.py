"""Command-line entry point exposing every pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
stderr; results go to files or stdout. Every stochastic subcommand
requires --seed and is byte-deterministic given identical inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
import urllib.parse
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from . import depth_eval, fileio, gen_metrics, sphere_render, toy_diffusion
from .depth_codec import (
    DepthMap16,
    RgbdTensor,
    assemble_rgbd,
    pack_depth,
    split_rgbd,
    unpack_depth,
)
from .errors import Rgbd360Error
from .raster import Viewpoint


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _vec3(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return np.array([float(p) for p in parts])


def _float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p]


def _int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p]


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _read_disparity(path: str) -> np.ndarray:
    """16-bit PNG or .rgbd tensor to disparity in [0, 1]."""
    p = Path(path)
    if p.suffix == ".rgbd":
        _, d16 = split_rgbd(fileio.read_rgbd(p))
        return d16.values.astype(np.float64) / 65535.0
    return fileio.read_depth16_png(p).values.astype(np.float64) / 65535.0


# ---------------------------------------------------------------------------
# codec commands


def _cmd_pack(args) -> None:
    d = fileio.read_depth16_png(args.input)
    fileio.write_packed_png(pack_depth(d), args.output)


def _cmd_unpack(args) -> None:
    p = fileio.read_packed_png(args.input)
    fileio.write_depth16_png(unpack_depth(p), args.output)


def _cmd_assemble(args) -> None:
    rgb = fileio.read_rgb_png(args.rgb)
    packed = fileio.read_packed_png(args.packed)
    fileio.write_rgbd(assemble_rgbd(rgb, packed), args.output)


def _cmd_split(args) -> None:
    tensor = fileio.read_rgbd(args.input)
    rgb, depth = split_rgbd(tensor)
    fileio.write_rgb_png(rgb, args.rgb_out)
    fileio.write_depth16_png(depth, args.depth_out)


# ---------------------------------------------------------------------------
# depth evaluation commands


def _pair_paths(est: str, ref: str) -> list[tuple[str, Path, Path]]:
    est_p, ref_p = Path(est), Path(ref)
    if est_p.is_dir() != ref_p.is_dir():
        raise ValueError("--est and --ref must both be files or both be directories")
    if not est_p.is_dir():
        return [(est_p.name, est_p, ref_p)]
    names = sorted(p.name for p in est_p.iterdir() if p.is_file())
    pairs = []
    for name in names:
        other = ref_p / name
        if other.is_file():
            pairs.append((name, est_p / name, other))
    if not pairs:
        raise ValueError("no filename overlap between the two directories")
    return pairs


def _cmd_align(args) -> None:
    pairs = _pair_paths(args.est, args.ref)
    per_image = {}
    for name, est_path, ref_path in pairs:
        result = depth_eval.evaluate_pair(
            _read_disparity(str(est_path)),
            _read_disparity(str(ref_path)),
            seed=args.seed,
            n_points=args.points,
        )
        per_image[name] = result
    if len(per_image) == 1:
        payload = next(iter(per_image.values())).to_dict()
    else:
        payload = {
            "images": {k: v.to_dict() for k, v in sorted(per_image.items())},
            "summary": depth_eval.summarize(per_image),
        }
    _emit_json(payload, args.output)
    if args.csv:
        with open(args.csv, "w") as f:
            f.write("name,scale,shift,abs_rel,rmse,n_valid\n")
            for name in sorted(per_image):
                r = per_image[name]
                f.write(
                    f"{name},{r.scale!r},{r.shift!r},{r.abs_rel!r},{r.rmse!r},{r.n_valid}\n"
                )


def _cmd_depth_metrics(args) -> None:
    pred = fileio.read_depth16_png(args.pred).values.astype(np.float64) * args.scale
    ref = fileio.read_depth16_png(args.ref).values.astype(np.float64) * args.scale
    mask = ref > 0
    m = depth_eval.depth_metrics(pred, ref, mask)
    _emit_json(
        {"abs_rel": m.abs_rel, "rmse": m.rmse, "n_valid": m.n_valid}, args.output
    )


# ---------------------------------------------------------------------------
# generative metric commands


def _cmd_fid(args) -> None:
    a = gen_metrics.gaussian_stats(fileio.read_features(args.a))
    b = gen_metrics.gaussian_stats(fileio.read_features(args.b))
    _emit_json({"fid": gen_metrics.frechet_distance(a, b)}, args.output)


def _cmd_is(args) -> None:
    rows = fileio.read_features(args.probs)
    if args.softmax:
        rows = rows - rows.max(axis=1, keepdims=True)
        rows = np.exp(rows)
        rows /= rows.sum(axis=1, keepdims=True)
    mean, std = gen_metrics.inception_score(rows, splits=args.splits)
    _emit_json({"is_mean": mean, "is_std": std}, args.output)


def _cmd_clipsim(args) -> None:
    mean, std = gen_metrics.clip_similarity(
        fileio.read_features(args.img), fileio.read_features(args.txt)
    )
    _emit_json({"clip_mean": mean, "clip_std": std}, args.output)


# ---------------------------------------------------------------------------
# rendering commands


def _load_mesh_and_texture(args):
    if getattr(args, "scene", None):
        bundle = sphere_render.load_scene(args.scene)
        k = args.strength if args.strength is not None else bundle.strength
        mesh = bundle.displaced_mesh(k)
        return mesh, bundle.texture
    if not args.texture:
        raise ValueError("either --scene or --texture is required")
    tex = fileio.read_rgb_png(args.texture)
    mesh = sphere_render.build_sphere_mesh(args.rows, args.cols, args.radius)
    if args.depth:
        depth = fileio.read_depth16_png(args.depth)
        mesh = sphere_render.displace_vertices(
            mesh, depth, args.strength if args.strength is not None else 0.0
        )
    return mesh, tex


def _viewpoint(args) -> Viewpoint:
    return Viewpoint(
        position=args.pos,
        yaw=args.yaw,
        pitch=args.pitch,
        fov_y=args.fov,
        width=args.width,
        height=args.height,
    )


def _add_scene_source(p: _Parser) -> None:
    p.add_argument("--scene", help="scene bundle directory (alternative to --texture)")
    p.add_argument("--texture", help="equirectangular RGB PNG")
    p.add_argument("--depth", help="16-bit depth PNG for vertex displacement")
    p.add_argument("--strength", type=float, default=None, help="displacement strength k")
    p.add_argument("--rows", type=_positive_int, default=256, help="tessellation rows")
    p.add_argument("--cols", type=_positive_int, default=512, help="tessellation cols")
    p.add_argument("--radius", type=float, default=2.0, help="sphere base radius")


def _add_camera(p: _Parser) -> None:
    p.add_argument("--pos", type=_vec3, default=np.zeros(3), help="camera x,y,z")
    p.add_argument("--yaw", type=float, default=0.0, help="yaw in radians")
    p.add_argument("--pitch", type=float, default=0.0, help="pitch in radians")
    p.add_argument("--fov", type=float, default=np.pi / 3, help="vertical fov in radians")
    p.add_argument("--width", type=_positive_int, default=512, help="frame width")
    p.add_argument("--height", type=_positive_int, default=512, help="frame height")


def _cmd_mesh(args) -> None:
    mesh = sphere_render.build_sphere_mesh(args.rows, args.cols, args.radius)
    if args.depth:
        depth = fileio.read_depth16_png(args.depth)
        mesh = sphere_render.displace_vertices(
            mesh, depth, args.strength if args.strength is not None else 0.0
        )
    positions = mesh.positions
    with open(args.output, "w") as f:
        f.write(f"# lat-long sphere {mesh.rows}x{mesh.cols} radius {mesh.base_radius!r}\n")
        for p in positions:
            f.write(f"v {p[0]!r} {p[1]!r} {p[2]!r}\n")
        for uv in mesh.uvs:
            f.write(f"vt {uv[0]!r} {1.0 - uv[1]!r}\n")
        for tri in mesh.triangles:
            a, b, c = (int(i) + 1 for i in tri)
            f.write(f"f {a}/{a} {b}/{b} {c}/{c}\n")


def _cmd_render(args) -> None:
    mesh, tex = _load_mesh_and_texture(args)
    frame = sphere_render.render_view(mesh, tex, _viewpoint(args))
    fileio.write_rgb_png(frame, args.output)


def _cmd_stereo(args) -> None:
    mesh, tex = _load_mesh_and_texture(args)
    left, right = sphere_render.render_stereo_pair(
        mesh, tex, _viewpoint(args), args.ipd
    )
    fileio.write_rgb_png(left, args.left_out)
    fileio.write_rgb_png(right, args.right_out)


def _cmd_orbit(args) -> None:
    mesh, tex = _load_mesh_and_texture(args)
    path = []
    for i in range(args.frames):
        angle = 2.0 * np.pi * i / args.frames
        pos = np.array(
            [
                args.orbit_radius * np.cos(angle),
                args.elevation,
                -args.orbit_radius * np.sin(angle),
            ]
        )
        path.append(
            Viewpoint(
                position=pos,
                yaw=angle,
                pitch=args.pitch,
                fov_y=args.fov,
                width=args.width,
                height=args.height,
            )
        )
    files = sphere_render.orbit_sequence(mesh, tex, path, args.out_dir)
    print(f"wrote {len(files)} frames to {args.out_dir}", file=sys.stderr)


def _cmd_export_scene(args) -> None:
    mesh = sphere_render.build_sphere_mesh(args.rows, args.cols, args.radius)
    tex = fileio.read_rgb_png(args.texture)
    depth = fileio.read_depth16_png(args.depth) if args.depth else None
    sphere_render.export_scene(mesh, tex, depth, args.out_dir, args.strength)


# ---------------------------------------------------------------------------
# toy training / sampling commands


def _cmd_toy_train_ae(args) -> None:
    patches = []
    for path in args.data:
        tensor = fileio.read_rgbd(path)
        blocks, _, _ = toy_diffusion.image_to_blocks(tensor.data.astype(np.float64))
        patches.append(blocks)
    model = toy_diffusion.train_toy_autoencoder(
        np.concatenate(patches, axis=0),
        lr=args.lr,
        steps=args.steps,
        reg_weight=args.reg_weight,
        seed=args.seed,
    )
    toy_diffusion.save_autoencoder(model, args.output)
    hist = model.loss_history
    print(f"loss {hist[0]:.6g} -> {hist[-1]:.6g}", file=sys.stderr)


def _schedule(args) -> toy_diffusion.NoiseSchedule:
    return toy_diffusion.make_noise_schedule(args.T, args.beta_min, args.beta_max)


def _cmd_toy_train_denoiser(args) -> None:
    if args.synthetic:
        rng = np.random.default_rng(args.seed + 1)
        latents = rng.standard_normal(
            (args.synthetic, args.latent_h, args.latent_w, toy_diffusion.LATENT_CHANNELS)
        )
    else:
        if not args.data or not args.ae:
            raise ValueError("need --synthetic N, or --data files with --ae model")
        ae = toy_diffusion.load_model(args.ae)
        latents = np.stack(
            [
                ae.encode_image(fileio.read_rgbd(p).data.astype(np.float64))
                for p in args.data
            ]
        )
    sch = _schedule(args)
    model = toy_diffusion.train_toy_denoiser(
        latents,
        sch,
        lr=args.lr,
        steps=args.steps,
        seed=args.seed,
        batch_size=args.batch,
    )
    toy_diffusion.save_denoiser(model, args.output)
    hist = model.loss_history
    print(f"loss {hist[0]:.6g} -> {hist[-1]:.6g}", file=sys.stderr)


def _cmd_toy_sample(args) -> None:
    model = toy_diffusion.load_model(args.model)
    if not isinstance(model, toy_diffusion.DenoiserModel):
        raise ValueError(f"{args.model} is not a denoiser checkpoint")
    sch = toy_diffusion.make_noise_schedule(model.T, args.beta_min, args.beta_max)
    cfg = toy_diffusion.GuidanceConfig(scale=args.scale, ddim_steps=args.ddim_steps)
    rng = np.random.default_rng(args.seed)
    z_T = rng.standard_normal(model.latent_shape)
    latent = toy_diffusion.ddim_sample(model, sch, cfg, z_T, cond=args.cond)
    if args.ae:
        ae = toy_diffusion.load_model(args.ae)
        image = np.clip(ae.decode_image(latent), 0.0, 1.0)
        fileio.write_rgbd(RgbdTensor(image.astype(np.float32)), args.output)
    else:
        np.save(args.output, latent)


def _cmd_sweep(args) -> None:
    model = toy_diffusion.load_model(args.model)
    if not isinstance(model, toy_diffusion.DenoiserModel):
        raise ValueError(f"{args.model} is not a denoiser checkpoint")
    sch = toy_diffusion.make_noise_schedule(model.T, args.beta_min, args.beta_max)
    ref = gen_metrics.gaussian_stats(fileio.read_features(args.ref))

    def eval_fn(samples: np.ndarray) -> float:
        flat = samples.reshape(samples.shape[0], -1)
        return gen_metrics.frechet_distance(ref, gen_metrics.gaussian_stats(flat))

    toy_diffusion.sweep_harness(
        model,
        sch,
        args.scales,
        args.steps_list,
        eval_fn,
        n_samples=args.n_samples,
        seed=args.seed,
        cond=args.cond,
        csv_path=args.output,
    )


# ---------------------------------------------------------------------------
# static file server


def make_bundle_server(
    bundle_dir: str, viewer_dir: str | None, host: str, port: int
) -> ThreadingHTTPServer:
    """Static file server: scene bundle under /scene/, viewer assets at /."""
    bundle = Path(bundle_dir).resolve()
    if not (bundle / "scene.json").is_file():
        raise ValueError(f"{bundle} does not contain scene.json")
    viewer = Path(viewer_dir).resolve() if viewer_dir else None

    class Handler(SimpleHTTPRequestHandler):
        def translate_path(self, path: str) -> str:
            path = urllib.parse.unquote(path.split("?", 1)[0].split("#", 1)[0])
            parts = [p for p in path.split("/") if p and p not in (".", "..")]
            if parts and parts[0] == "scene":
                root, parts = bundle, parts[1:]
            elif viewer is not None:
                root = viewer
            else:
                root = bundle
            full = root.joinpath(*parts)
            if full.is_dir():
                full = full / "index.html"
            return str(full)

        def log_message(self, fmt, *log_args):
            sys.stderr.write(fmt % log_args + "\n")

    return ThreadingHTTPServer((host, port), Handler)


def _cmd_serve(args) -> None:
    server = make_bundle_server(args.bundle, args.viewer, args.host, args.port)
    print(
        f"serving bundle {args.bundle} on "
        f"http://{args.host}:{server.server_address[1]}/scene/",
        file=sys.stderr,
    )
    if args.viewer:
        print(f"viewer root {args.viewer} at /", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> _Parser:
    parser = _Parser(prog="rgbd360", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="subcommand")

    p = sub.add_parser("pack", help="pack a 16-bit depth PNG into 3 8-bit channels")
    p.add_argument("--in", dest="input", required=True, help="16-bit grayscale PNG")
    p.add_argument("--out", dest="output", required=True, help="packed 3-channel PNG")
    p.set_defaults(func=_cmd_pack)

    p = sub.add_parser("unpack", help="recover a 16-bit depth PNG from packed channels")
    p.add_argument("--in", dest="input", required=True, help="packed 3-channel PNG")
    p.add_argument("--out", dest="output", required=True, help="16-bit grayscale PNG")
    p.set_defaults(func=_cmd_unpack)

    p = sub.add_parser("assemble", help="concatenate RGB + packed depth into a .rgbd tensor")
    p.add_argument("--rgb", required=True, help="RGB PNG")
    p.add_argument("--packed", required=True, help="packed depth PNG")
    p.add_argument("--out", dest="output", required=True, help=".rgbd output")
    p.set_defaults(func=_cmd_assemble)

    p = sub.add_parser("split", help="split a .rgbd tensor into RGB PNG + 16-bit depth PNG")
    p.add_argument("--in", dest="input", required=True, help=".rgbd input")
    p.add_argument("--rgb-out", required=True, help="RGB PNG output")
    p.add_argument("--depth-out", required=True, help="16-bit depth PNG output")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("align", help="scale/shift align disparity and report AbsRel/RMSE")
    p.add_argument("--est", required=True, help="estimated disparity (16-bit PNG, .rgbd, or dir)")
    p.add_argument("--ref", required=True, help="reference disparity (16-bit PNG, .rgbd, or dir)")
    p.add_argument("--seed", type=int, required=True, help="fit-point sampling seed")
    p.add_argument("--points", type=_positive_int, default=depth_eval.DEFAULT_FIT_POINTS,
                   help="number of fit points")
    p.add_argument("--out", dest="output", default=None, help="JSON output (default stdout)")
    p.add_argument("--csv", default=None, help="optional per-image CSV")
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("depth-metrics", help="AbsRel/RMSE between two stored depth maps")
    p.add_argument("--pred", required=True, help="predicted depth 16-bit PNG")
    p.add_argument("--ref", required=True, help="reference depth 16-bit PNG")
    p.add_argument("--scale", type=float, default=1.0 / 65535.0,
                   help="meters per stored unit")
    p.add_argument("--out", dest="output", default=None, help="JSON output (default stdout)")
    p.set_defaults(func=_cmd_depth_metrics)

    p = sub.add_parser("fid", help="Frechet distance between two feature sets")
    p.add_argument("--a", required=True, help="first .feat file")
    p.add_argument("--b", required=True, help="second .feat file")
    p.add_argument("--out", dest="output", default=None, help="JSON output (default stdout)")
    p.set_defaults(func=_cmd_fid)

    p = sub.add_parser("is", help="Inception Score over class probability rows")
    p.add_argument("--probs", required=True, help=".feat file of per-sample class rows")
    p.add_argument("--splits", type=_positive_int, default=10, help="number of splits")
    p.add_argument("--softmax", action="store_true", help="treat rows as logits")
    p.add_argument("--out", dest="output", default=None, help="JSON output (default stdout)")
    p.set_defaults(func=_cmd_is)

    p = sub.add_parser("clipsim", help="scaled cosine similarity between paired features")
    p.add_argument("--img", required=True, help="image features .feat")
    p.add_argument("--txt", required=True, help="text features .feat")
    p.add_argument("--out", dest="output", default=None, help="JSON output (default stdout)")
    p.set_defaults(func=_cmd_clipsim)

    p = sub.add_parser("mesh", help="write the (optionally displaced) sphere as OBJ")
    p.add_argument("--rows", type=_positive_int, default=256)
    p.add_argument("--cols", type=_positive_int, default=512)
    p.add_argument("--radius", type=float, default=2.0)
    p.add_argument("--depth", default=None, help="16-bit depth PNG")
    p.add_argument("--strength", type=float, default=None, help="displacement strength k")
    p.add_argument("--out", dest="output", required=True, help="OBJ output path")
    p.set_defaults(func=_cmd_mesh)

    p = sub.add_parser("render", help="render one frame from inside the sphere")
    _add_scene_source(p)
    _add_camera(p)
    p.add_argument("--out", dest="output", required=True, help="PNG output")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("stereo", help="render a stereoscopic pair")
    _add_scene_source(p)
    _add_camera(p)
    p.add_argument("--ipd", type=float, required=True, help="inter-pupillary distance")
    p.add_argument("--left-out", required=True, help="left eye PNG")
    p.add_argument("--right-out", required=True, help="right eye PNG")
    p.set_defaults(func=_cmd_stereo)

    p = sub.add_parser("orbit", help="render frames along a circular camera path")
    _add_scene_source(p)
    p.add_argument("--frames", type=_positive_int, required=True)
    p.add_argument("--orbit-radius", type=float, default=0.0, help="path radius")
    p.add_argument("--elevation", type=float, default=0.0, help="camera height")
    p.add_argument("--pitch", type=float, default=0.0)
    p.add_argument("--fov", type=float, default=np.pi / 3)
    p.add_argument("--width", type=_positive_int, default=512)
    p.add_argument("--height", type=_positive_int, default=512)
    p.add_argument("--out-dir", required=True, help="frame output directory")
    p.set_defaults(func=_cmd_orbit)

    p = sub.add_parser("export-scene", help="write a viewer scene bundle")
    p.add_argument("--texture", required=True, help="equirectangular RGB PNG")
    p.add_argument("--depth", required=True, help="16-bit depth PNG")
    p.add_argument("--rows", type=_positive_int, default=256)
    p.add_argument("--cols", type=_positive_int, default=512)
    p.add_argument("--radius", type=float, default=2.0)
    p.add_argument("--strength", type=float, default=0.3, help="displacement strength k")
    p.add_argument("--out-dir", required=True, help="bundle directory")
    p.set_defaults(func=_cmd_export_scene)

    p = sub.add_parser("toy-train-ae", help="train the linear block autoencoder")
    p.add_argument("--data", nargs="+", required=True, help=".rgbd training files")
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--steps", type=_positive_int, default=2000)
    p.add_argument("--reg-weight", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", dest="output", required=True, help=".toymodel output")
    p.set_defaults(func=_cmd_toy_train_ae)

    p = sub.add_parser("toy-train-denoiser", help="train the linear noise predictor")
    p.add_argument("--synthetic", type=int, default=0,
                   help="train on N synthetic Gaussian latents")
    p.add_argument("--latent-h", type=_positive_int, default=4)
    p.add_argument("--latent-w", type=_positive_int, default=4)
    p.add_argument("--data", nargs="*", default=None, help=".rgbd files to encode")
    p.add_argument("--ae", default=None, help="autoencoder .toymodel for encoding --data")
    p.add_argument("--T", type=_positive_int, default=1000, help="schedule length")
    p.add_argument("--beta-min", type=float, default=1e-4)
    p.add_argument("--beta-max", type=float, default=0.02)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--steps", type=_positive_int, default=400)
    p.add_argument("--batch", type=_positive_int, default=16)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", dest="output", required=True, help=".toymodel output")
    p.set_defaults(func=_cmd_toy_train_denoiser)

    p = sub.add_parser("toy-sample", help="draw one DDIM sample from a trained denoiser")
    p.add_argument("--model", required=True, help="denoiser .toymodel")
    p.add_argument("--ae", default=None, help="decode through this autoencoder to .rgbd")
    p.add_argument("--ddim-steps", type=_positive_int, default=50)
    p.add_argument("--scale", type=float, default=1.0, help="guidance scale")
    p.add_argument("--cond", type=float, default=1.0, help="condition flag value")
    p.add_argument("--beta-min", type=float, default=1e-4)
    p.add_argument("--beta-max", type=float, default=0.02)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", dest="output", required=True, help=".npy latent or .rgbd output")
    p.set_defaults(func=_cmd_toy_sample)

    p = sub.add_parser("sweep", help="guidance-scale x DDIM-steps sweep to CSV")
    p.add_argument("--model", required=True, help="denoiser .toymodel")
    p.add_argument("--ref", required=True, help="reference .feat for the toy FID score")
    p.add_argument("--scales", type=_float_list, required=True, help="e.g. 1,5,10")
    p.add_argument("--steps-list", type=_int_list, required=True, help="e.g. 10,50")
    p.add_argument("--n-samples", type=_positive_int, default=32)
    p.add_argument("--cond", type=float, default=1.0)
    p.add_argument("--beta-min", type=float, default=1e-4)
    p.add_argument("--beta-max", type=float, default=0.02)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", dest="output", required=True, help="CSV output")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("serve", help="static file server for a scene bundle + viewer")
    p.add_argument("--bundle", required=True, help="scene bundle directory, served at /scene/")
    p.add_argument("--viewer", default=None, help="viewer assets directory, served at /")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # --help prints and exits 0
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        args.func(args)
    except (Rgbd360Error, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
