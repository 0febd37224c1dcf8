"""Bit-exact binary containers and PNG output.

All multi-byte values are little-endian. Formats:

GBUF (rendered view)::

    magic      4s   = b"GBUF"
    version    u32  = 1
    width      u32
    height     u32
    channels   u32                      # number of channel entries
    per channel: name_len u32, name utf-8, arity u32
    camera     position 3*f64, look_at 3*f64, up 3*f64, fov f64
    payload    planar f32: for each channel, `arity` planes of
               height*width values, row-major

FEAT (descriptor map)::

    magic      4s   = b"FEAT"
    version    u32  = 1
    width      u32
    height     u32
    dim        u32  >= 1
    provenance u32 length + utf-8 bytes
    payload    f32, row-major per-pixel descriptors (h*w*dim values)

CMAP (correspondence)::

    magic      4s   = b"CMAP"
    version    u32  = 1
    target_count u32, source_count u32
    payload    mapped source index u32 * target_count,
               similarity score f32 * target_count

PNG output quantizes v in [0,1] to round-half-up bytes round(v*255).
"""

from __future__ import annotations

import struct
from io import BufferedReader

import numpy as np
from PIL import Image

from .features import FeatureMap
from .scene import CameraPose, GBufferView

GBUF_MAGIC = b"GBUF"
FEAT_MAGIC = b"FEAT"
CMAP_MAGIC = b"CMAP"
CONTAINER_VERSION = 1

GBUF_CHANNELS = (
    ("position", 3),
    ("normal", 3),
    ("view_direction", 3),
    ("rgb", 3),
    ("alpha", 1),
)


class ContainerError(ValueError):
    """Malformed container: the message names the offending field."""


def _read_exact(fh: BufferedReader, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise ContainerError(f"truncated file while reading {what}")
    return data


def _read_u32(fh, what: str) -> int:
    return struct.unpack("<I", _read_exact(fh, 4, what))[0]


def _check_magic(fh, expected: bytes) -> None:
    got = _read_exact(fh, 4, "magic")
    if got != expected:
        raise ContainerError(f"bad magic: expected {expected!r}, got {got!r}")


def _check_version(fh) -> None:
    version = _read_u32(fh, "version")
    if version != CONTAINER_VERSION:
        raise ContainerError(f"unsupported version {version}")


def _plane_stack(arr: np.ndarray) -> np.ndarray:
    # (H, W, arity) -> (arity, H, W); (H, W) passes through as one plane
    if arr.ndim == 2:
        return arr[None]
    return np.moveaxis(arr, -1, 0)


def write_gbuf(view: GBufferView, path) -> None:
    """Serialize a rendered view; round-trips bit-exactly."""
    h, w = view.alpha.shape
    planes = {
        "position": view.position,
        "normal": view.normal,
        "view_direction": view.view_dir,
        "rgb": view.rgb,
        "alpha": view.alpha,
    }
    cam = view.camera
    with open(path, "wb") as fh:
        fh.write(GBUF_MAGIC)
        fh.write(struct.pack("<III", CONTAINER_VERSION, w, h))
        fh.write(struct.pack("<I", len(GBUF_CHANNELS)))
        for name, arity in GBUF_CHANNELS:
            raw = name.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", arity))
        fh.write(
            struct.pack(
                "<10d",
                *cam.position,
                *cam.look_at,
                *cam.up,
                cam.fov_y,
            )
        )
        for name, _ in GBUF_CHANNELS:
            stack = _plane_stack(np.ascontiguousarray(planes[name], dtype=np.float32))
            fh.write(stack.astype("<f4").tobytes())


def read_gbuf(path) -> GBufferView:
    with open(path, "rb") as fh:
        _check_magic(fh, GBUF_MAGIC)
        _check_version(fh)
        w = _read_u32(fh, "width")
        h = _read_u32(fh, "height")
        n_channels = _read_u32(fh, "channel count")
        channels = []
        seen = set()
        for i in range(n_channels):
            name_len = _read_u32(fh, f"channel {i} name length")
            name = _read_exact(fh, name_len, f"channel {i} name").decode("utf-8")
            arity = _read_u32(fh, f"channel {i} arity")
            if name in seen:
                raise ContainerError(f"duplicate channel name {name!r}")
            seen.add(name)
            channels.append((name, arity))
        cam_vals = struct.unpack("<10d", _read_exact(fh, 80, "camera block"))
        payload = fh.read()

    total = sum(arity for _, arity in channels)
    expected = w * h * total * 4
    if len(payload) != expected:
        raise ContainerError(
            f"payload length mismatch: expected {expected} bytes, got {len(payload)}"
        )
    for name, _ in GBUF_CHANNELS:
        if name not in seen:
            raise ContainerError(f"missing channel {name!r}")

    data = np.frombuffer(payload, dtype="<f4")
    planes = {}
    offset = 0
    for name, arity in channels:
        count = w * h * arity
        block = data[offset : offset + count].reshape(arity, h, w)
        offset += count
        planes[name] = np.moveaxis(block, 0, -1) if arity > 1 else block[0]

    camera = CameraPose(
        position=tuple(cam_vals[0:3]),
        look_at=tuple(cam_vals[3:6]),
        up=tuple(cam_vals[6:9]),
        fov_y=cam_vals[9],
        width=w,
        height=h,
    )
    return GBufferView(
        camera=camera,
        position=np.ascontiguousarray(planes["position"]),
        normal=np.ascontiguousarray(planes["normal"]),
        view_dir=np.ascontiguousarray(planes["view_direction"]),
        rgb=np.ascontiguousarray(planes["rgb"]),
        alpha=np.ascontiguousarray(planes["alpha"]),
    )


def write_feat(fmap: FeatureMap, path) -> None:
    with open(path, "wb") as fh:
        fh.write(FEAT_MAGIC)
        fh.write(
            struct.pack("<IIII", CONTAINER_VERSION, fmap.width, fmap.height, fmap.dim)
        )
        raw = fmap.provenance.encode("utf-8")
        fh.write(struct.pack("<I", len(raw)))
        fh.write(raw)
        fh.write(np.ascontiguousarray(fmap.data, dtype="<f4").tobytes())


def read_feat(path) -> FeatureMap:
    with open(path, "rb") as fh:
        _check_magic(fh, FEAT_MAGIC)
        _check_version(fh)
        w = _read_u32(fh, "width")
        h = _read_u32(fh, "height")
        dim = _read_u32(fh, "dim")
        if dim < 1:
            raise ContainerError("dim must be >= 1")
        prov_len = _read_u32(fh, "provenance length")
        provenance = _read_exact(fh, prov_len, "provenance").decode("utf-8")
        payload = fh.read()
    expected = w * h * dim * 4
    if len(payload) != expected:
        raise ContainerError(
            f"payload length mismatch: expected {expected} bytes, got {len(payload)}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(h, w, dim)
    return FeatureMap(data=np.ascontiguousarray(data), provenance=provenance)


def write_correspondence(source_index: np.ndarray, score: np.ndarray, path) -> None:
    """CMAP file: per-target mapped source index and similarity score."""
    source_index = np.asarray(source_index)
    score = np.asarray(score)
    if source_index.shape != score.shape or source_index.ndim != 1:
        raise ValueError("index and score arrays must be 1-D and equal length")
    m = source_index.shape[0]
    n = int(source_index.max()) + 1 if m else 0
    with open(path, "wb") as fh:
        fh.write(CMAP_MAGIC)
        fh.write(struct.pack("<III", CONTAINER_VERSION, m, n))
        fh.write(source_index.astype("<u4").tobytes())
        fh.write(score.astype("<f4").tobytes())


def read_correspondence(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, "rb") as fh:
        _check_magic(fh, CMAP_MAGIC)
        _check_version(fh)
        m = _read_u32(fh, "target count")
        _read_u32(fh, "source count")
        payload = fh.read()
    expected = m * 8
    if len(payload) != expected:
        raise ContainerError(
            f"payload length mismatch: expected {expected} bytes, got {len(payload)}"
        )
    idx = np.frombuffer(payload[: m * 4], dtype="<u4").astype(np.int64)
    score = np.frombuffer(payload[m * 4 :], dtype="<f4").astype(np.float64)
    return idx, score


def write_image(values: np.ndarray, path) -> None:
    """8-bit PNG of values in [0, 1]; (H, W) writes grayscale, (H, W, 3)
    writes rgb. Quantization is round-half-up: byte = floor(v*255 + 0.5)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim not in (2, 3):
        raise ValueError("expected (H, W) or (H, W, 3) values")
    quant = np.floor(np.clip(arr, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    mode = "L" if arr.ndim == 2 else "RGB"
    Image.fromarray(quant, mode=mode).save(path, format="PNG")


def read_image(path) -> np.ndarray:
    """PNG back to float values in [0, 1]."""
    img = Image.open(path)
    arr = np.asarray(img, dtype=np.float64) / 255.0
    return arr


def inspect_header(path) -> dict:
    """Parsed header of a GBUF / FEAT / CMAP / NFLD file."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == GBUF_MAGIC:
        view = read_gbuf(path)
        return {
            "format": "GBUF",
            "width": view.width,
            "height": view.height,
            "channels": [list(c) for c in GBUF_CHANNELS],
            "camera_position": list(view.camera.position),
            "camera_look_at": list(view.camera.look_at),
            "fov_y": view.camera.fov_y,
        }
    if magic == FEAT_MAGIC:
        fmap = read_feat(path)
        return {
            "format": "FEAT",
            "width": fmap.width,
            "height": fmap.height,
            "dim": fmap.dim,
            "provenance": fmap.provenance,
        }
    if magic == CMAP_MAGIC:
        idx, score = read_correspondence(path)
        return {
            "format": "CMAP",
            "target_count": int(idx.shape[0]),
            "score_min": float(score.min()) if idx.size else None,
            "score_max": float(score.max()) if idx.size else None,
        }
    from . import field as field_mod

    if magic == field_mod.CHECKPOINT_MAGIC:
        return field_mod.checkpoint_header(path)
    raise ContainerError(f"bad magic: unknown container {magic!r}")
