#!/usr/bin/env python3
"""Train a toy denoiser on structured synthetic latents, then sweep the
classifier-free guidance scale and DDIM step count, scoring each cell
with a toy Frechet distance against the training distribution.

Reproduces the sweep *structure* of guidance/step ablations at desk
scale; the resulting curve is model-specific, not a reference value.

Usage: python scripts/run_guidance_sweep.py --seed 0 --out sweep.csv
"""

import argparse
import sys

import numpy as np

from rgbd360 import toy_diffusion as td
from rgbd360.gen_metrics import frechet_distance, gaussian_stats


def structured_latents(n: int, h: int, w: int, seed: int) -> np.ndarray:
    """Correlated Gaussian latents: a random low-rank basis plus noise,
    so the denoiser has structure worth learning."""
    rng = np.random.default_rng(seed)
    d = h * w * td.LATENT_CHANNELS
    basis = rng.standard_normal((d, 3))
    source = rng.standard_normal((n, 3))
    flat = source @ basis.T / np.sqrt(3) + 0.1 * rng.standard_normal((n, d))
    return flat.reshape(n, h, w, td.LATENT_CHANNELS)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n-train", type=int, default=128)
    parser.add_argument("--latent-size", type=int, default=4, help="latent h and w")
    parser.add_argument("--T", type=int, default=200)
    parser.add_argument("--train-steps", type=int, default=3000)
    parser.add_argument("--scales", type=float, nargs="+",
                        default=[0.0, 1.0, 2.0, 5.0, 10.0])
    parser.add_argument("--steps-list", type=int, nargs="+", default=[5, 20, 50])
    parser.add_argument("--n-samples", type=int, default=64)
    parser.add_argument("--out", default="sweep.csv")
    args = parser.parse_args()

    h = w = args.latent_size
    latents = structured_latents(args.n_train, h, w, args.seed)
    sch = td.make_noise_schedule(args.T)
    print(f"training denoiser: {args.n_train} latents of {h}x{w}x4, "
          f"T={args.T}, {args.train_steps} steps", file=sys.stderr)
    model = td.train_toy_denoiser(
        latents, sch, lr=0.05, steps=args.train_steps, seed=args.seed,
        cond_labels=np.ones(args.n_train),
    )
    hist = model.loss_history
    print(f"loss {hist[:20].mean():.4f} -> {hist[-20:].mean():.4f}", file=sys.stderr)

    ref = gaussian_stats(latents.reshape(args.n_train, -1))

    def toy_fid(samples: np.ndarray) -> float:
        return frechet_distance(ref, gaussian_stats(samples.reshape(samples.shape[0], -1)))

    rows = td.sweep_harness(
        model, sch, args.scales, args.steps_list, toy_fid,
        n_samples=args.n_samples, seed=args.seed + 1, csv_path=args.out,
    )
    print(f"{'scale':>8} {'steps':>6} {'toy FID':>12}")
    for scale, steps, score in rows:
        print(f"{scale:>8.2f} {steps:>6d} {score:>12.5f}")
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
