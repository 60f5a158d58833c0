"""Desk-scale diffusion and autoencoder objective math.

Linear models stand in for the production networks: the autoencoder maps
8x8x6 pixel blocks to a 4-dim latent through a pair of weight matrices,
and the denoiser predicts injected noise from the flattened noisy latent
plus a normalized-time feature and a condition flag. Both are trained by
(stochastic) gradient descent with analytic gradients, so every objective
here is checkable against finite differences without a deep-learning
dependency.

Noise-prediction loss convention: mean over elements of the squared
difference, not the sum, so the loss scale is independent of latent size.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigInvalid, EmptyDataset, InvalidRange, ShapeMismatch

LATENT_CHANNELS = 4
AE_PATCH = 8
AE_CHANNELS = 6


# ---------------------------------------------------------------------------
# schedule and forward process


@dataclass(frozen=True)
class NoiseSchedule:
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray

    @property
    def T(self) -> int:
        return self.betas.shape[0]


def make_noise_schedule(
    T: int = 1000, beta_min: float = 1e-4, beta_max: float = 0.02
) -> NoiseSchedule:
    """Linear beta schedule with cumulative-product alpha bars."""
    if T < 1:
        raise InvalidRange(f"T must be >= 1, got {T}")
    if not (0.0 < beta_min <= beta_max < 1.0):
        raise InvalidRange(
            f"need 0 < beta_min <= beta_max < 1, got ({beta_min}, {beta_max})"
        )
    betas = np.linspace(beta_min, beta_max, T)
    alphas = 1.0 - betas
    alpha_bars = np.cumprod(alphas)
    return NoiseSchedule(betas=betas, alphas=alphas, alpha_bars=alpha_bars)


def forward_diffuse(
    z0: np.ndarray, t: int, eps: np.ndarray, sch: NoiseSchedule
) -> np.ndarray:
    """z_t = sqrt(alpha_bar_t) * z0 + sqrt(1 - alpha_bar_t) * eps."""
    z0 = np.asarray(z0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if z0.shape != eps.shape:
        raise ShapeMismatch(f"z0 shape {z0.shape} != eps shape {eps.shape}")
    if not (0 <= t < sch.T):
        raise InvalidRange(f"t={t} outside [0, {sch.T})")
    ab = sch.alpha_bars[t]
    return np.sqrt(ab) * z0 + np.sqrt(1.0 - ab) * eps


# ---------------------------------------------------------------------------
# objective terms


def noise_prediction_loss(eps_pred: np.ndarray, eps: np.ndarray) -> float:
    """Mean squared difference between predicted and injected noise."""
    eps_pred = np.asarray(eps_pred, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if eps_pred.shape != eps.shape:
        raise ShapeMismatch(f"shapes differ: {eps_pred.shape} vs {eps.shape}")
    diff = eps_pred - eps
    return float(np.mean(diff * diff))


def kl_regularization(mu: np.ndarray, logvar: np.ndarray) -> float:
    """KL(N(mu, exp(logvar)) || N(0, 1)) summed over dimensions:
    0.5 * sum(mu^2 + exp(logvar) - 1 - logvar).

    exp(logvar) - 1 goes through expm1 so the term stays non-negative
    for tiny logvar instead of rounding below zero.
    """
    mu = np.asarray(mu, dtype=np.float64)
    logvar = np.asarray(logvar, dtype=np.float64)
    if mu.shape != logvar.shape:
        raise ShapeMismatch(f"shapes differ: {mu.shape} vs {logvar.shape}")
    return float(0.5 * np.sum(mu * mu + np.expm1(logvar) - logvar))


def _log_sigmoid(x: float) -> float:
    # stable log(1 / (1 + exp(-x)))
    return -np.logaddexp(0.0, -x)


def autoencoder_loss(
    rec: float,
    adv: float,
    disc_logit: float,
    reg: float,
    reg_weight: float,
) -> float:
    """Two-stage objective combinator with pluggable term values:
    rec - adv + log(sigmoid(disc_logit)) + reg_weight * reg."""
    return float(rec - adv + _log_sigmoid(disc_logit) + reg_weight * reg)


# ---------------------------------------------------------------------------
# linear autoencoder


@dataclass
class LinearAutoencoder:
    """Linear VAE-style codec over 8x8 blocks of 6-channel images.

    enc_mu and enc_logvar are (4, 384) maps from a flattened block to the
    latent mean and log-variance; dec is the (384, 4) map back. The
    spatial downsample factor is fixed at 8.
    """

    enc_mu: np.ndarray
    enc_logvar: np.ndarray
    dec: np.ndarray
    loss_history: np.ndarray | None = field(default=None, repr=False)

    @property
    def block_dim(self) -> int:
        return self.dec.shape[0]

    @property
    def latent_dim(self) -> int:
        return self.dec.shape[1]

    def encode_blocks(self, blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(n, 8, 8, 6) blocks -> ((n, 4) means, (n, 4) logvars)."""
        x = blocks.reshape(blocks.shape[0], -1)
        return x @ self.enc_mu.T, x @ self.enc_logvar.T

    def decode_blocks(self, z: np.ndarray) -> np.ndarray:
        """(n, 4) latents -> (n, 8, 8, 6) blocks."""
        x = z @ self.dec.T
        return x.reshape(z.shape[0], AE_PATCH, AE_PATCH, AE_CHANNELS)

    def encode_image(self, img: np.ndarray) -> np.ndarray:
        """(H, W, 6) image -> (H/8, W/8, 4) latent of block means."""
        blocks, gh, gw = image_to_blocks(img)
        mu, _ = self.encode_blocks(blocks)
        return mu.reshape(gh, gw, self.latent_dim)

    def decode_image(self, latent: np.ndarray) -> np.ndarray:
        """(h, w, 4) latent -> (8h, 8w, 6) image."""
        h, w, c = latent.shape
        blocks = self.decode_blocks(latent.reshape(h * w, c))
        return blocks_to_image(blocks, h, w)


def image_to_blocks(img: np.ndarray) -> tuple[np.ndarray, int, int]:
    """Cut an (H, W, 6) image into non-overlapping 8x8 blocks."""
    img = np.asarray(img, dtype=np.float64)
    h, w, c = img.shape
    if c != AE_CHANNELS or h % AE_PATCH or w % AE_PATCH:
        raise ShapeMismatch(
            f"image must be (8k, 8m, 6) for block coding, got {img.shape}"
        )
    gh, gw = h // AE_PATCH, w // AE_PATCH
    blocks = (
        img.reshape(gh, AE_PATCH, gw, AE_PATCH, c)
        .transpose(0, 2, 1, 3, 4)
        .reshape(gh * gw, AE_PATCH, AE_PATCH, c)
    )
    return blocks, gh, gw


def blocks_to_image(blocks: np.ndarray, gh: int, gw: int) -> np.ndarray:
    n, ph, pw, c = blocks.shape
    if n != gh * gw:
        raise ShapeMismatch(f"{n} blocks cannot tile a {gh}x{gw} grid")
    return (
        blocks.reshape(gh, gw, ph, pw, c)
        .transpose(0, 2, 1, 3, 4)
        .reshape(gh * ph, gw * pw, c)
    )


def ae_loss_and_grads(
    enc_mu: np.ndarray,
    enc_logvar: np.ndarray,
    dec: np.ndarray,
    x: np.ndarray,
    reg_weight: float,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Loss and analytic gradients of the linear-AE objective on a batch.

    Objective: mean over elements of the squared reconstruction residual
    plus reg_weight times the mean per-sample KL term. Reconstruction
    decodes the latent mean directly (no sampling), keeping the pass
    deterministic.
    """
    n, p = x.shape
    mu = x @ enc_mu.T  # (n, k)
    lv = x @ enc_logvar.T
    rec = mu @ dec.T  # (n, p)
    resid = rec - x
    mse = float(np.mean(resid * resid))
    elv1 = np.expm1(lv)
    kl = float(0.5 * np.sum(mu * mu + elv1 - lv) / n)
    loss = mse + reg_weight * kl

    d_dec = (2.0 / (n * p)) * resid.T @ mu
    d_mu = (2.0 / (n * p)) * resid @ dec + (reg_weight / n) * mu
    d_lv = (reg_weight / n) * 0.5 * elv1
    d_enc_mu = d_mu.T @ x
    d_enc_logvar = d_lv.T @ x
    return loss, d_enc_mu, d_enc_logvar, d_dec


def train_toy_autoencoder(
    data: np.ndarray,
    lr: float = 0.5,
    steps: int = 2000,
    reg_weight: float = 0.0,
    seed: int = 0,
) -> LinearAutoencoder:
    """Full-batch gradient descent on (n, 8, 8, 6) patches."""
    data = np.asarray(data, dtype=np.float64)
    if data.size == 0:
        raise EmptyDataset("no training patches")
    if data.ndim != 4 or data.shape[1:] != (AE_PATCH, AE_PATCH, AE_CHANNELS):
        raise ShapeMismatch(
            f"patches must be (n, {AE_PATCH}, {AE_PATCH}, {AE_CHANNELS}), got {data.shape}"
        )
    x = data.reshape(data.shape[0], -1)
    p = x.shape[1]
    k = LATENT_CHANNELS
    rng = np.random.default_rng(seed)
    enc_mu = 0.01 * rng.standard_normal((k, p))
    enc_logvar = 0.01 * rng.standard_normal((k, p))
    dec = 0.01 * rng.standard_normal((p, k))

    losses = np.empty(steps)
    for i in range(steps):
        loss, g_mu, g_lv, g_dec = ae_loss_and_grads(enc_mu, enc_logvar, dec, x, reg_weight)
        losses[i] = loss
        enc_mu -= lr * g_mu
        enc_logvar -= lr * g_lv
        dec -= lr * g_dec
    return LinearAutoencoder(
        enc_mu=enc_mu, enc_logvar=enc_logvar, dec=dec, loss_history=losses
    )


# ---------------------------------------------------------------------------
# linear denoiser


@dataclass
class DenoiserModel:
    """Linear noise predictor over (flattened latent, t/T, condition flag)."""

    weights: np.ndarray  # (D, D + 2)
    latent_shape: tuple[int, int, int]
    T: int
    loss_history: np.ndarray | None = field(default=None, repr=False)

    def predict(self, z: np.ndarray, t: int, cond: float) -> np.ndarray:
        """Predicted noise for one latent at integer step t."""
        d = int(np.prod(self.latent_shape))
        f = np.empty(d + 2)
        f[:d] = np.asarray(z, dtype=np.float64).ravel()
        f[d] = t / self.T
        f[d + 1] = cond
        return (self.weights @ f).reshape(self.latent_shape)


def denoiser_loss_and_grad(
    weights: np.ndarray, feats: np.ndarray, eps: np.ndarray
) -> tuple[float, np.ndarray]:
    """Noise-prediction loss and its analytic weight gradient on a batch.

    feats is (n, D+2) with the time and condition features appended;
    eps is the (n, D) injected noise the model should recover.
    """
    n, d = eps.shape
    pred = feats @ weights.T
    resid = pred - eps
    loss = float(np.mean(resid * resid))
    grad = (2.0 / (n * d)) * resid.T @ feats
    return loss, grad


def train_toy_denoiser(
    latents: np.ndarray,
    sch: NoiseSchedule,
    lr: float = 0.05,
    steps: int = 400,
    seed: int = 0,
    cond_labels: np.ndarray | None = None,
    batch_size: int = 16,
    uncond_prob: float = 0.1,
) -> DenoiserModel:
    """SGD over random (sample, t, eps) draws.

    When cond_labels are supplied, each draw keeps its label except for a
    uncond_prob fraction forced to the null flag, which is what makes
    classifier-free guidance possible at sampling time. Without labels
    every pass is unconditional.
    """
    latents = np.asarray(latents, dtype=np.float64)
    if latents.size == 0:
        raise EmptyDataset("no training latents")
    if latents.ndim != 4:
        raise ShapeMismatch(f"latents must be (n, h, w, c), got {latents.shape}")
    n, h, w, c = latents.shape
    if cond_labels is not None:
        cond_labels = np.asarray(cond_labels, dtype=np.float64)
        if cond_labels.shape != (n,):
            raise ShapeMismatch(f"cond_labels must be ({n},), got {cond_labels.shape}")
    d = h * w * c
    flat = latents.reshape(n, d)
    rng = np.random.default_rng(seed)
    weights = 0.01 * rng.standard_normal((d, d + 2))

    sqrt_ab = np.sqrt(sch.alpha_bars)
    sqrt_1mab = np.sqrt(1.0 - sch.alpha_bars)
    losses = np.empty(steps)
    for i in range(steps):
        idx = rng.integers(0, n, size=batch_size)
        t = rng.integers(0, sch.T, size=batch_size)
        eps = rng.standard_normal((batch_size, d))
        zt = sqrt_ab[t, None] * flat[idx] + sqrt_1mab[t, None] * eps
        if cond_labels is None:
            cond = np.zeros(batch_size)
        else:
            cond = cond_labels[idx].copy()
            cond[rng.random(batch_size) < uncond_prob] = 0.0
        feats = np.concatenate([zt, (t / sch.T)[:, None], cond[:, None]], axis=1)
        loss, grad = denoiser_loss_and_grad(weights, feats, eps)
        losses[i] = loss
        weights -= lr * grad
    return DenoiserModel(
        weights=weights, latent_shape=(h, w, c), T=sch.T, loss_history=losses
    )


# ---------------------------------------------------------------------------
# DDIM sampling with classifier-free guidance


@dataclass(frozen=True)
class GuidanceConfig:
    """Sampling knobs: guidance scale, DDIM step count, eta fixed at 0."""

    scale: float = 1.0
    ddim_steps: int = 50
    eta: float = 0.0

    def __post_init__(self):
        if self.scale < 0:
            raise ConfigInvalid(f"guidance scale must be >= 0, got {self.scale}")
        if self.ddim_steps < 1:
            raise ConfigInvalid(f"ddim_steps must be >= 1, got {self.ddim_steps}")
        if self.eta != 0.0:
            raise ConfigInvalid("only deterministic sampling (eta=0) is supported")


def _guided_eps(model, z: np.ndarray, t: int, cond: float, scale: float) -> np.ndarray:
    # eps_hat = eps_uncond + s * (eps_cond - eps_uncond); the s=1 and s=0
    # branches skip the redundant pass and keep the identity bitwise
    if scale == 1.0:
        return model.predict(z, t, cond)
    if scale == 0.0:
        return model.predict(z, t, 0.0)
    e_u = model.predict(z, t, 0.0)
    e_c = model.predict(z, t, cond)
    return e_u + scale * (e_c - e_u)


def ddim_timesteps(T: int, ddim_steps: int) -> np.ndarray:
    """Evenly spaced descending step subsequence from T-1 to 0."""
    if ddim_steps > T:
        raise ConfigInvalid(f"ddim_steps={ddim_steps} exceeds schedule length {T}")
    if ddim_steps == 1:
        return np.array([T - 1], dtype=np.int64)
    return np.round(np.linspace(T - 1, 0, ddim_steps)).astype(np.int64)


def ddim_sample(
    model: DenoiserModel,
    sch: NoiseSchedule,
    cfg: GuidanceConfig,
    z_T: np.ndarray,
    cond: float = 1.0,
) -> np.ndarray:
    """Deterministic DDIM trajectory from z_T down to the clean latent."""
    z = np.asarray(z_T, dtype=np.float64)
    if z.shape != tuple(model.latent_shape):
        raise ConfigInvalid(
            f"z_T shape {z.shape} does not match model latent shape {model.latent_shape}"
        )
    steps = ddim_timesteps(sch.T, cfg.ddim_steps)
    for i, t in enumerate(steps):
        ab_t = sch.alpha_bars[t]
        ab_prev = sch.alpha_bars[steps[i + 1]] if i + 1 < len(steps) else 1.0
        eps = _guided_eps(model, z, int(t), cond, cfg.scale)
        x0 = (z - np.sqrt(1.0 - ab_t) * eps) / np.sqrt(ab_t)
        z = np.sqrt(ab_prev) * x0 + np.sqrt(1.0 - ab_prev) * eps
    return z


# ---------------------------------------------------------------------------
# sweep harness


def sweep_harness(
    model: DenoiserModel,
    sch: NoiseSchedule,
    scales: list[float],
    steps_list: list[int],
    eval_fn,
    n_samples: int = 32,
    seed: int = 0,
    cond: float = 1.0,
    csv_path: str | Path | None = None,
) -> list[tuple[float, int, float]]:
    """Score every (scale, steps) combination with eval_fn over a shared
    batch of initial noise draws; rows come out in cartesian order."""
    if not scales or not steps_list:
        raise EmptySet("scales and steps_list must be non-empty")
    rng = np.random.default_rng(seed)
    z_T = rng.standard_normal((n_samples, *model.latent_shape))
    rows = []
    for s in scales:
        for st in steps_list:
            cfg = GuidanceConfig(scale=s, ddim_steps=st)
            samples = np.stack(
                [ddim_sample(model, sch, cfg, z_T[i], cond) for i in range(n_samples)]
            )
            rows.append((float(s), int(st), float(eval_fn(samples))))
    if csv_path is not None:
        with open(csv_path, "w") as f:
            f.write("scale,steps,score\n")
            for s, st, score in rows:
                f.write(f"{s},{st},{score!r}\n")
    return rows


# ---------------------------------------------------------------------------
# checkpoints: JSON header line + little-endian f32 weight blob


def save_denoiser(model: DenoiserModel, path: str | Path) -> None:
    header = {
        "kind": "denoiser",
        "latent_shape": list(model.latent_shape),
        "T": model.T,
        "weights_shape": list(model.weights.shape),
    }
    _write_checkpoint(path, header, [model.weights])


def save_autoencoder(model: LinearAutoencoder, path: str | Path) -> None:
    header = {
        "kind": "autoencoder",
        "enc_mu_shape": list(model.enc_mu.shape),
        "enc_logvar_shape": list(model.enc_logvar.shape),
        "dec_shape": list(model.dec.shape),
    }
    _write_checkpoint(path, header, [model.enc_mu, model.enc_logvar, model.dec])


def load_model(path: str | Path) -> DenoiserModel | LinearAutoencoder:
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise ValueError(f"{path}: missing checkpoint header")
    header = json.loads(raw[:nl].decode("utf-8"))
    blob = np.frombuffer(raw, dtype="<f4", offset=nl + 1).astype(np.float64)
    if header["kind"] == "denoiser":
        shape = tuple(header["weights_shape"])
        weights = _take(blob, 0, shape)
        return DenoiserModel(
            weights=weights,
            latent_shape=tuple(header["latent_shape"]),
            T=int(header["T"]),
        )
    if header["kind"] == "autoencoder":
        s_mu = tuple(header["enc_mu_shape"])
        s_lv = tuple(header["enc_logvar_shape"])
        s_dec = tuple(header["dec_shape"])
        off = 0
        enc_mu = _take(blob, off, s_mu)
        off += int(np.prod(s_mu))
        enc_logvar = _take(blob, off, s_lv)
        off += int(np.prod(s_lv))
        dec = _take(blob, off, s_dec)
        return LinearAutoencoder(enc_mu=enc_mu, enc_logvar=enc_logvar, dec=dec)
    raise ValueError(f"{path}: unknown checkpoint kind {header['kind']!r}")


def _take(blob: np.ndarray, offset: int, shape: tuple[int, ...]) -> np.ndarray:
    size = int(np.prod(shape))
    if offset + size > blob.size:
        raise ValueError("checkpoint blob shorter than its header promises")
    return blob[offset : offset + size].reshape(shape)


def _write_checkpoint(path: str | Path, header: dict, arrays: list[np.ndarray]) -> None:
    with open(path, "wb") as f:
        f.write(json.dumps(header, separators=(",", ":")).encode("utf-8"))
        f.write(b"\n")
        for a in arrays:
            f.write(np.ascontiguousarray(a, dtype="<f4").tobytes())
