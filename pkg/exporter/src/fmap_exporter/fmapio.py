"""FMAP binary writer.

Layout (little endian):

    magic   4 bytes  b"FMAP"
    u32     version (1)
    u32     frame_count
    u32     d        channels per frame
    u32     M        rows
    u32     N        cols
    u32     stride   pixels per cell on the source patch
    f32[frame_count * d * M * N]  payload, frame -> channel -> row major
"""

import struct

import numpy as np

MAGIC = b"FMAP"
VERSION = 1
_HEADER = struct.Struct("<4s6I")

__all__ = ["write_fmap", "MAGIC", "VERSION"]


def write_fmap(path: str, frames: np.ndarray, stride: int) -> None:
    frames = np.ascontiguousarray(frames, dtype=np.float32)
    if frames.ndim != 4:
        raise ValueError(f"expected (frames, d, M, N), got shape {frames.shape}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if not np.isfinite(frames).all():
        raise ValueError("non-finite feature values")
    count, d, m, n = frames.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, count, d, m, n, stride))
        fh.write(frames.tobytes())
