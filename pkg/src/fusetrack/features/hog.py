"""31-channel HOG descriptor in the Felzenszwalb et al. layout.

Per cell: 18 contrast-sensitive orientation channels, 9 contrast-insensitive
channels, and 4 texture-energy channels. Gradients vote bilinearly into the
cell grid and are normalized against the four overlapping 2x2 cell blocks
with clipping at 0.2.
"""

from __future__ import annotations

import numpy as np

from .base import FeatureMap

__all__ = ["extract_hog"]

ORIENTS = 9
TRUNC = 0.2
EPS = 1e-10
TEXTURE_SCALE = 0.2357  # ~ 1/sqrt(18)

# direction prototypes spanning [0, pi), gradients snap to the best dot product
_UU = np.cos(np.arange(ORIENTS) * np.pi / ORIENTS)
_VV = np.sin(np.arange(ORIENTS) * np.pi / ORIENTS)


def _gradients(patch: np.ndarray):
    """Centered differences with replicated borders; color picks, per pixel,
    the channel with the largest gradient magnitude."""
    padded = np.pad(patch, ((1, 1), (1, 1), (0, 0)), mode="edge")
    dx = padded[1:-1, 2:] - padded[1:-1, :-2]
    dy = padded[2:, 1:-1] - padded[:-2, 1:-1]
    mag2 = dx**2 + dy**2
    pick = mag2.argmax(axis=2)
    ii, jj = np.indices(pick.shape)
    return dx[ii, jj, pick], dy[ii, jj, pick], np.sqrt(mag2[ii, jj, pick])


def extract_hog(patch, cell: int = 4) -> FeatureMap:
    patch = np.asarray(patch, dtype=np.float64)
    if patch.ndim == 2:
        patch = patch[:, :, None]
    h, w = patch.shape[:2]
    if h % cell or w % cell:
        raise ValueError(f"patch size {h}x{w} not divisible by cell {cell}")
    m, n = h // cell, w // cell

    gx, gy, mag = _gradients(patch)

    # snap each gradient to one of 18 signed orientation bins
    dots = gx[..., None] * _UU + gy[..., None] * _VV
    k = np.abs(dots).argmax(axis=2)
    signed = np.take_along_axis(dots, k[..., None], axis=2)[..., 0]
    bins = np.where(signed >= 0, k, k + ORIENTS)

    # bilinear vote of each pixel into the four surrounding cells
    ii, jj = np.indices((h, w))
    xp = (jj + 0.5) / cell - 0.5
    yp = (ii + 0.5) / cell - 0.5
    ix = np.floor(xp).astype(int)
    iy = np.floor(yp).astype(int)
    vx1 = xp - ix
    vy1 = yp - iy

    hist = np.zeros((m, n, 2 * ORIENTS))
    for di, wy in ((0, 1.0 - vy1), (1, vy1)):
        for dj, wx in ((0, 1.0 - vx1), (1, vx1)):
            ci = iy + di
            cj = ix + dj
            ok = (ci >= 0) & (ci < m) & (cj >= 0) & (cj < n)
            np.add.at(hist, (ci[ok], cj[ok], bins[ok]), (mag * wy * wx)[ok])

    # gradient energy per cell from the contrast-insensitive sums
    folded = hist[:, :, :ORIENTS] + hist[:, :, ORIENTS:]
    energy = (folded**2).sum(axis=2)

    # the four 2x2 blocks around each cell, edges replicated
    s = np.pad(energy, 1, mode="edge")
    blocks = np.stack(
        [
            s[0:m, 0:n] + s[0:m, 1 : n + 1] + s[1 : m + 1, 0:n] + s[1 : m + 1, 1 : n + 1],
            s[0:m, 1 : n + 1] + s[0:m, 2 : n + 2] + s[1 : m + 1, 1 : n + 1] + s[1 : m + 1, 2 : n + 2],
            s[1 : m + 1, 0:n] + s[1 : m + 1, 1 : n + 1] + s[2 : m + 2, 0:n] + s[2 : m + 2, 1 : n + 1],
            s[1 : m + 1, 1 : n + 1] + s[1 : m + 1, 2 : n + 2] + s[2 : m + 2, 1 : n + 1] + s[2 : m + 2, 2 : n + 2],
        ]
    )
    inv = 1.0 / np.sqrt(blocks + EPS)

    normed = np.minimum(hist[None] * inv[:, :, :, None], TRUNC)
    folded_normed = np.minimum(folded[None] * inv[:, :, :, None], TRUNC)
    sensitive = 0.5 * normed.sum(axis=0)
    insensitive = 0.5 * folded_normed.sum(axis=0)
    texture = TEXTURE_SCALE * normed.sum(axis=3).transpose(1, 2, 0)

    out = np.concatenate([sensitive, insensitive, texture], axis=2)
    return FeatureMap(out.transpose(2, 0, 1), stride=cell)
