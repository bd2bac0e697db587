"""Color-name probabilities from a quantized RGB lookup table.

The table maps each 5-bit-quantized RGB triple to probabilities over 11
color terms (alphabetical: black, blue, brown, gray, green, orange, pink,
purple, red, white, yellow). It ships as a little-endian float32 binary
asset of 32768 rows x 11 columns.
"""

from __future__ import annotations

import os

import numpy as np

from .base import FeatureMap

__all__ = ["CNTable", "load_cn_table", "extract_cn", "CN_NAMES"]

CN_NAMES = [
    "black", "blue", "brown", "gray", "green", "orange",
    "pink", "purple", "red", "white", "yellow",
]

TABLE_ROWS = 32 * 32 * 32
TABLE_COLS = len(CN_NAMES)

_DEFAULT_PATH = os.path.join(os.path.dirname(__file__), "assets", "cn_table.bin")


class CNTable:
    """Immutable 32768 x 11 probability table indexed by quantized RGB."""

    def __init__(self, probs: np.ndarray):
        probs = np.asarray(probs, dtype=np.float32)
        if probs.shape != (TABLE_ROWS, TABLE_COLS):
            raise ValueError(f"expected {TABLE_ROWS}x{TABLE_COLS} table, got {probs.shape}")
        if probs.min() < 0 or probs.max() > 1:
            raise ValueError("table entries must lie in [0, 1]")
        self.probs = probs
        self.probs.flags.writeable = False

    def lookup(self, rgb: np.ndarray) -> np.ndarray:
        """Rows for an (..., 3) uint8 RGB array, shape (..., 11)."""
        rgb = np.asarray(rgb)
        idx = (rgb[..., 0] >> 3).astype(np.int64)
        idx += 32 * (rgb[..., 1] >> 3).astype(np.int64)
        idx += 1024 * (rgb[..., 2] >> 3).astype(np.int64)
        return self.probs[idx]


def load_cn_table(path: str | None = None) -> CNTable:
    """Load a color-name table; with no path, the shipped asset is used."""
    path = path or _DEFAULT_PATH
    if not os.path.isfile(path):
        raise FileNotFoundError(f"color-name table not found: {path}")
    raw = np.fromfile(path, dtype="<f4")
    if raw.size != TABLE_ROWS * TABLE_COLS:
        raise ValueError(
            f"color-name table has {raw.size} values, expected {TABLE_ROWS * TABLE_COLS}"
        )
    return CNTable(raw.reshape(TABLE_ROWS, TABLE_COLS))


def extract_cn(patch, table: CNTable, cell: int = 4) -> FeatureMap:
    """Per-pixel color-name probabilities, mean-pooled over cells."""
    patch = np.asarray(patch)
    if patch.ndim != 3 or patch.shape[2] != 3:
        raise ValueError(f"expected HxWx3 RGB patch, got shape {patch.shape}")
    h, w = patch.shape[:2]
    if h % cell or w % cell:
        raise ValueError(f"patch size {h}x{w} not divisible by cell {cell}")
    probs = table.lookup(patch.astype(np.uint8)).astype(np.float64)
    m, n = h // cell, w // cell
    pooled = probs.reshape(m, cell, n, cell, TABLE_COLS).mean(axis=(1, 3))
    return FeatureMap(pooled.transpose(2, 0, 1), stride=cell)
