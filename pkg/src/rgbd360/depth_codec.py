"""Bit-exact packing of 16-bit depth maps into 8-bit channel triples and
assembly/splitting of 6-channel RGBD tensors.

Byte layout is big-endian within a 24-bit frame: channel 0 carries bits
23-16 (always zero for 16-bit sources, reserved for future 24-bit data),
channel 1 bits 15-8, channel 2 bits 7-0. Normalization is per 8-bit
channel (divide by 255), and dequantization rounds half away from zero so
the round trip is bit-exact.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonZeroHighChannel


def _require_2d(values: np.ndarray, dtype, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D grid, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class DepthMap16:
    """Relative disparity-space depth grid stored as 16-bit unsigned ints."""

    values: np.ndarray  # (H, W) uint16

    def __post_init__(self):
        object.__setattr__(self, "values", _require_2d(self.values, np.uint16, "values"))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class PackedDepthImage:
    """Three 8-bit planes holding a big-endian 24-bit depth layout."""

    channels: np.ndarray  # (H, W, 3) uint8

    def __post_init__(self):
        arr = np.asarray(self.channels, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"channels must have shape (H, W, 3), got {arr.shape}")
        object.__setattr__(self, "channels", arr)

    @property
    def height(self) -> int:
        return self.channels.shape[0]

    @property
    def width(self) -> int:
        return self.channels.shape[1]


@dataclass(frozen=True)
class RgbImage:
    """Plain 8-bit 3-channel image."""

    pixels: np.ndarray  # (H, W, 3) uint8

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"pixels must have shape (H, W, 3), got {arr.shape}")
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class RgbdTensor:
    """H x W x 6 float tensor in [0, 1].

    Channel order: [R, G, B, D_hi, D_mid, D_lo] where the depth channels
    are the packed 24-bit planes normalized by 255.
    """

    data: np.ndarray  # (H, W, 6) float32

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 3 or arr.shape[2] != 6 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"data must have shape (H, W, 6), got {arr.shape}")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def pack_depth(d: DepthMap16) -> PackedDepthImage:
    """Split 16-bit depth values into (0, high byte, low byte) planes."""
    v = d.values
    channels = np.empty((d.height, d.width, 3), dtype=np.uint8)
    channels[:, :, 0] = 0
    channels[:, :, 1] = v >> 8
    channels[:, :, 2] = v & 0xFF
    return PackedDepthImage(channels)


def unpack_depth(p: PackedDepthImage) -> DepthMap16:
    """Reassemble 16-bit depth as channel1*256 + channel2.

    Warns with NonZeroHighChannel if channel 0 carries data (a 24-bit
    source truncated to 16 bits); the high channel is always ignored.
    """
    ch = p.channels
    if np.any(ch[:, :, 0] != 0):
        warnings.warn(
            "packed depth has non-zero high channel; 24-bit data truncated to 16-bit",
            NonZeroHighChannel,
            stacklevel=2,
        )
    values = ch[:, :, 1].astype(np.uint16) << 8 | ch[:, :, 2].astype(np.uint16)
    return DepthMap16(values)


def assemble_rgbd(rgb: RgbImage, packed: PackedDepthImage) -> RgbdTensor:
    """Concatenate RGB and packed depth along channels, normalized to [0, 1]."""
    if (rgb.height, rgb.width) != (packed.height, packed.width):
        raise DimensionMismatch(
            f"rgb is {rgb.width}x{rgb.height} but packed depth is "
            f"{packed.width}x{packed.height}"
        )
    data = np.empty((rgb.height, rgb.width, 6), dtype=np.float32)
    data[:, :, :3] = rgb.pixels.astype(np.float32) / 255.0
    data[:, :, 3:] = packed.channels.astype(np.float32) / 255.0
    return RgbdTensor(data)


def _quantize(x: np.ndarray) -> np.ndarray:
    """Map [0,1] floats to bytes, rounding half away from zero."""
    clipped = np.clip(x.astype(np.float64), 0.0, 1.0)
    return np.floor(clipped * 255.0 + 0.5).astype(np.uint8)


def split_rgbd(t: RgbdTensor) -> tuple[RgbImage, DepthMap16]:
    """Invert assemble_rgbd: requantize channels and unpack the depth planes.

    Out-of-range values are clamped to [0, 1] before quantization, so the
    function is total; split(assemble(r, p)) == (r, unpack(p)) exactly.
    """
    rgb = RgbImage(_quantize(t.data[:, :, :3]))
    packed = PackedDepthImage(_quantize(t.data[:, :, 3:]))
    return rgb, unpack_depth(packed)
