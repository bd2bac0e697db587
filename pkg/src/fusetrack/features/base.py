"""Feature map container and the small extractors that need no own module."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["FeatureMap", "apply_window", "extract_gray", "to_gray"]


@dataclass
class FeatureMap:
    """A d-channel grid of feature values sampled on a regular cell lattice.

    values has shape (d, M, N). ``stride`` is the pixel distance between
    adjacent cells in the source patch; the center of cell (0, 0) sits at
    patch pixel ``origin_offset = (stride - 1) / 2`` in each axis.
    """

    values: np.ndarray
    stride: int

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim != 3 or self.values.shape[0] < 1:
            raise ValueError(f"expected (d, M, N) values, got shape {self.values.shape}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values contain non-finite entries")

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]

    @property
    def origin_offset(self) -> float:
        return (self.stride - 1) / 2.0


def to_gray(image) -> np.ndarray:
    """Collapse an RGB image to luma; pass 2-D images through as float."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        return image
    if image.ndim == 3 and image.shape[2] == 3:
        return image[:, :, 0] * 0.299 + image[:, :, 1] * 0.587 + image[:, :, 2] * 0.114
    raise ValueError(f"expected HxW or HxWx3 image, got shape {image.shape}")


def _pool_cells(grid: np.ndarray, cell: int) -> np.ndarray:
    h, w = grid.shape
    if h % cell or w % cell:
        raise ValueError(f"patch size {h}x{w} not divisible by cell {cell}")
    return grid.reshape(h // cell, cell, w // cell, cell).mean(axis=(1, 3))


def extract_gray(patch, cell: int = 4) -> FeatureMap:
    """Single-channel mean-pooled intensity, centered into [-0.5, 0.5]."""
    gray = to_gray(patch)
    pooled = _pool_cells(gray, cell) / 255.0 - 0.5
    return FeatureMap(pooled[None], stride=cell)


def apply_window(x: FeatureMap) -> FeatureMap:
    """Taper every channel with a separable 2-D Hann window."""
    win = np.hanning(x.height)[:, None] * np.hanning(x.width)[None, :]
    return FeatureMap(x.values * win[None], stride=x.stride)
