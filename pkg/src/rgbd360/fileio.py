"""File formats: PNG images, raw `.rgbd` tensors, `.feat` feature sets.

`.rgbd` layout: 8-byte header of width then height as little-endian
32-bit unsigned ints, followed by H*W*6 little-endian 32-bit floats in
row-major order, channel-last.

`.feat` comes in two variants sharing the extension: a text form whose
first line is `n d` followed by n whitespace-separated rows, and a binary
form mirroring the `.rgbd` header (n then d as u32 LE, then n*d f32 LE).
Reads sniff the variant from the first line.
"""

from __future__ import annotations

import re
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .depth_codec import DepthMap16, PackedDepthImage, RgbImage, RgbdTensor

_RGBD_HEADER = struct.Struct("<II")


def read_depth16_png(path: str | Path) -> DepthMap16:
    """Read a 16-bit single-channel grayscale PNG."""
    img = Image.open(path)
    if img.mode not in ("I", "I;16", "I;16B", "L"):
        raise ValueError(f"{path}: expected grayscale PNG, got mode {img.mode}")
    arr = np.asarray(img)
    if arr.dtype == np.uint8:
        # 8-bit fallback: widen into the 16-bit range
        arr = arr.astype(np.uint16) << 8
    if np.any(arr < 0) or np.any(arr > 0xFFFF):
        raise ValueError(f"{path}: pixel values outside the 16-bit range")
    return DepthMap16(arr.astype(np.uint16))


def write_depth16_png(d: DepthMap16, path: str | Path) -> None:
    Image.fromarray(d.values).save(path, format="PNG")


def read_rgb_png(path: str | Path) -> RgbImage:
    img = Image.open(path).convert("RGB")
    return RgbImage(np.asarray(img, dtype=np.uint8))


def write_rgb_png(img: RgbImage, path: str | Path) -> None:
    Image.fromarray(img.pixels).save(path, format="PNG")


def read_packed_png(path: str | Path) -> PackedDepthImage:
    img = Image.open(path).convert("RGB")
    return PackedDepthImage(np.asarray(img, dtype=np.uint8))


def write_packed_png(p: PackedDepthImage, path: str | Path) -> None:
    Image.fromarray(p.channels).save(path, format="PNG")


def read_rgbd(path: str | Path) -> RgbdTensor:
    raw = Path(path).read_bytes()
    if len(raw) < _RGBD_HEADER.size:
        raise ValueError(f"{path}: truncated .rgbd header")
    width, height = _RGBD_HEADER.unpack_from(raw)
    expected = _RGBD_HEADER.size + width * height * 6 * 4
    if len(raw) != expected:
        raise ValueError(
            f"{path}: expected {expected} bytes for {width}x{height}x6, got {len(raw)}"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=_RGBD_HEADER.size)
    return RgbdTensor(data.reshape(height, width, 6).copy())


def write_rgbd(t: RgbdTensor, path: str | Path) -> None:
    with open(path, "wb") as f:
        f.write(_RGBD_HEADER.pack(t.width, t.height))
        f.write(np.ascontiguousarray(t.data, dtype="<f4").tobytes())


_TEXT_HEADER_RE = re.compile(rb"^\s*(\d+)\s+(\d+)\s*$")


def read_features(path: str | Path) -> np.ndarray:
    """Read a .feat file (text or binary variant) as an (n, d) float64 array."""
    raw = Path(path).read_bytes()
    newline = raw.find(b"\n")
    first_line = raw[:newline] if newline >= 0 else raw
    m = _TEXT_HEADER_RE.match(first_line)
    if m:
        n, d = int(m.group(1)), int(m.group(2))
        body = raw[newline + 1 :].split()
        if len(body) != n * d:
            raise ValueError(f"{path}: header says {n}x{d} but found {len(body)} values")
        rows = np.array([float(x) for x in body], dtype=np.float64).reshape(n, d)
        return rows
    if len(raw) < 8:
        raise ValueError(f"{path}: not a recognizable .feat file")
    n, d = struct.unpack_from("<II", raw)
    expected = 8 + n * d * 4
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for {n}x{d}, got {len(raw)}")
    return np.frombuffer(raw, dtype="<f4", offset=8).astype(np.float64).reshape(n, d)


def write_features(rows: np.ndarray, path: str | Path, binary: bool = False) -> None:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise ValueError(f"feature rows must be 2-D, got shape {rows.shape}")
    n, d = rows.shape
    if binary:
        with open(path, "wb") as f:
            f.write(struct.pack("<II", n, d))
            f.write(rows.astype("<f4").tobytes())
    else:
        with open(path, "w") as f:
            f.write(f"{n} {d}\n")
            for row in rows:
                f.write(" ".join(repr(float(x)) for x in row))
                f.write("\n")
