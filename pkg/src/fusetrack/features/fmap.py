"""Binary container for precomputed feature maps.

Layout (little-endian):

    bytes 0..3    magic "FMAP"
    u32           version (currently 1)
    u32           frame_count
    u32           d, M, N
    u32           stride
    float32[...]  frame_count * d * M * N values,
                  frame-major, then channel-major, then row-major

Values survive a write/load cycle bit-exactly.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .base import FeatureMap

__all__ = [
    "FmapError",
    "BadMagicError",
    "UnsupportedVersionError",
    "TruncatedFileError",
    "FrameIndexError",
    "FmapHeader",
    "read_fmap_header",
    "write_fmap",
    "load_fmap",
]

MAGIC = b"FMAP"
VERSION = 1
_HEADER = struct.Struct("<4s6I")


class FmapError(Exception):
    """Base class for feature-map file problems."""


class BadMagicError(FmapError):
    pass


class UnsupportedVersionError(FmapError):
    pass


class TruncatedFileError(FmapError):
    pass


class FrameIndexError(FmapError, IndexError):
    pass


@dataclass(frozen=True)
class FmapHeader:
    frame_count: int
    channels: int
    height: int
    width: int
    stride: int

    @property
    def frame_values(self) -> int:
        return self.channels * self.height * self.width


def write_fmap(path: str, frames: np.ndarray, stride: int) -> None:
    """Write a (frame_count, d, M, N) float array as an FMAP file."""
    frames = np.asarray(frames)
    if frames.ndim != 4:
        raise ValueError(f"expected (frames, d, M, N) array, got shape {frames.shape}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    fc, d, m, n = frames.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, fc, d, m, n, stride))
        fh.write(np.ascontiguousarray(frames, dtype="<f4").tobytes())


def read_fmap_header(path: str) -> FmapHeader:
    if not os.path.isfile(path):
        raise FileNotFoundError(f"feature-map file not found: {path}")
    size = os.path.getsize(path)
    if size < _HEADER.size:
        raise TruncatedFileError(f"{path}: {size} bytes is too short for a header")
    with open(path, "rb") as fh:
        magic, version, fc, d, m, n, stride = _HEADER.unpack(fh.read(_HEADER.size))
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: version {version}, expected {VERSION}")
    header = FmapHeader(fc, d, m, n, stride)
    if d < 1 or m < 1 or n < 1 or stride < 1:
        raise FmapError(f"{path}: degenerate header {header}")
    expected = _HEADER.size + 4 * fc * header.frame_values
    if size < expected:
        raise TruncatedFileError(f"{path}: {size} bytes, header implies {expected}")
    if size > expected:
        raise FmapError(f"{path}: {size - expected} trailing bytes after payload")
    return header


def load_fmap(path: str, frame_index: int) -> FeatureMap:
    """Read one frame's tensor; values come back bit-exact as float32."""
    header = read_fmap_header(path)
    if not 0 <= frame_index < header.frame_count:
        raise FrameIndexError(
            f"{path}: frame {frame_index} out of range [0, {header.frame_count})"
        )
    count = header.frame_values
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size + 4 * frame_index * count)
        raw = np.frombuffer(fh.read(4 * count), dtype="<f4")
    values = raw.reshape(header.channels, header.height, header.width)
    return FeatureMap(values, stride=header.stride)
