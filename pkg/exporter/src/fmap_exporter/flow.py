"""Optical flow between consecutive frames and the 3-channel motion encoding.

The classical estimator is Horn-Schunck with the textbook Jacobi update:
each sweep replaces (u, v) by the neighborhood average pulled back onto the
data constraint Ix*u + Iy*v + It = 0. Positive u means the pattern moves
toward +x between the two frames.

Motion images pack flow into 8-bit channels (x, y, magnitude) as
round(128 + gain*u), round(128 + gain*v), round(gain*|flow|), clipped to
[0, 255]. Zero flow therefore encodes exactly (128, 128, 0).
"""

from __future__ import annotations

import os
import struct

import cv2
import numpy as np

__all__ = [
    "horn_schunck",
    "encode_motion_image",
    "compute_flow_images",
    "read_flo",
    "FLOW_GAIN",
]

FLOW_GAIN = 16.0

_AVG_KERNEL = np.array(
    [[1 / 12, 1 / 6, 1 / 12], [1 / 6, 0.0, 1 / 6], [1 / 12, 1 / 6, 1 / 12]],
    np.float64,
)


def _to_gray(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img, np.float64)
    if arr.ndim == 3:
        arr = arr @ np.array([0.299, 0.587, 0.114])
    return arr


def horn_schunck(prev, cur, smoothness: float = 0.5, iters: int = 400):
    """Estimate dense flow prev -> cur. Returns (u, v) float64 arrays."""
    prev = _to_gray(prev)
    cur = _to_gray(cur)
    if prev.shape != cur.shape:
        raise ValueError(f"frame shapes differ: {prev.shape} vs {cur.shape}")
    if smoothness <= 0 or iters < 1:
        raise ValueError("smoothness must be > 0 and iters >= 1")

    avg = 0.5 * (prev + cur)
    pad = np.pad(avg, 1, mode="edge")
    ix = 0.5 * (pad[1:-1, 2:] - pad[1:-1, :-2])
    iy = 0.5 * (pad[2:, 1:-1] - pad[:-2, 1:-1])
    it = cur - prev

    denom = smoothness + ix * ix + iy * iy
    u = np.zeros_like(prev)
    v = np.zeros_like(prev)
    for _ in range(iters):
        u_bar = cv2.filter2D(u, -1, _AVG_KERNEL, borderType=cv2.BORDER_REPLICATE)
        v_bar = cv2.filter2D(v, -1, _AVG_KERNEL, borderType=cv2.BORDER_REPLICATE)
        t = (ix * u_bar + iy * v_bar + it) / denom
        u = u_bar - ix * t
        v = v_bar - iy * t
    return u, v


def encode_motion_image(u: np.ndarray, v: np.ndarray, gain: float = FLOW_GAIN) -> np.ndarray:
    """Pack a flow field into an 8-bit (x, y, magnitude) image."""
    if gain <= 0:
        raise ValueError("gain must be positive")
    u = np.asarray(u, np.float64)
    v = np.asarray(v, np.float64)
    if u.shape != v.shape or u.ndim != 2:
        raise ValueError("u and v must be 2-D arrays of equal shape")
    mag = np.sqrt(u * u + v * v)
    ch0 = np.clip(np.rint(128.0 + gain * u), 0, 255)
    ch1 = np.clip(np.rint(128.0 + gain * v), 0, 255)
    ch2 = np.clip(np.rint(gain * mag), 0, 255)
    return np.stack([ch0, ch1, ch2], axis=2).astype(np.uint8)


def read_flo(path: str):
    """Read a Middlebury .flo file. Returns (u, v) float64 arrays."""
    with open(path, "rb") as fh:
        magic = struct.unpack("<f", fh.read(4))[0]
        if abs(magic - 202021.25) > 1e-3:
            raise ValueError(f"{path}: not a .flo file (magic {magic})")
        w, h = struct.unpack("<2i", fh.read(8))
        data = np.frombuffer(fh.read(8 * w * h), np.float32).reshape(h, w, 2)
    return data[:, :, 0].astype(np.float64), data[:, :, 1].astype(np.float64)


def _list_frames(seq_dir: str):
    img_dir = os.path.join(seq_dir, "img")
    if not os.path.isdir(img_dir):
        raise FileNotFoundError(f"missing frame folder: {img_dir}")
    names = sorted(
        n for n in os.listdir(img_dir)
        if n.lower().endswith((".png", ".jpg", ".jpeg", ".bmp"))
    )
    if len(names) < 2:
        raise ValueError(f"{seq_dir}: need at least 2 frames, found {len(names)}")
    return [os.path.join(img_dir, n) for n in names]


def _read_frame(path: str) -> np.ndarray:
    img = cv2.imread(path, cv2.IMREAD_COLOR)
    if img is None:
        raise IOError(f"cannot decode frame: {path}")
    return img[:, :, ::-1]  # RGB


def compute_flow_images(seq_dir: str, out_dir: str, method: str = "classical",
                        gain: float = FLOW_GAIN, smoothness: float = 0.5,
                        iters: int = 400):
    """Write one motion image per frame of a sequence.

    Frame k encodes the flow from frame k-1 to frame k; frame 0 has no
    predecessor and encodes zero flow. ``method`` is either "classical"
    (Horn-Schunck on consecutive frames) or "external" (precomputed .flo
    fields in ``<seq_dir>/flow/``, sorted, one per frame after the first).
    Returns the list of files written.
    """
    frames = _list_frames(seq_dir)
    os.makedirs(out_dir, exist_ok=True)
    if method == "external":
        flo_dir = os.path.join(seq_dir, "flow")
        if not os.path.isdir(flo_dir):
            raise FileNotFoundError(f"missing flow folder: {flo_dir}")
        flo_paths = sorted(
            os.path.join(flo_dir, n) for n in os.listdir(flo_dir)
            if n.endswith(".flo")
        )
        if len(flo_paths) != len(frames) - 1:
            raise ValueError(
                f"{flo_dir}: {len(flo_paths)} flow files for {len(frames)} frames"
            )
    elif method != "classical":
        raise ValueError(f"unknown flow method {method!r}")

    written = []
    prev = None
    for k, frame_path in enumerate(frames):
        cur = _read_frame(frame_path)
        if k == 0:
            u = np.zeros(cur.shape[:2])
            v = np.zeros(cur.shape[:2])
        elif method == "external":
            u, v = read_flo(flo_paths[k - 1])
            if u.shape != cur.shape[:2]:
                raise ValueError(
                    f"{flo_paths[k - 1]}: flow shape {u.shape} does not match "
                    f"frame shape {cur.shape[:2]}"
                )
        else:
            u, v = horn_schunck(prev, cur, smoothness=smoothness, iters=iters)
        img = encode_motion_image(u, v, gain=gain)
        name = os.path.splitext(os.path.basename(frame_path))[0] + ".png"
        out_path = os.path.join(out_dir, name)
        if not cv2.imwrite(out_path, img[:, :, ::-1]):
            raise IOError(f"cannot write motion image: {out_path}")
        written.append(out_path)
        prev = cur
    return written
