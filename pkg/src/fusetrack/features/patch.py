"""Square region sampling with border replication and canonical resizing."""

from __future__ import annotations

import cv2
import numpy as np

__all__ = ["sample_patch"]


def sample_patch(frame, center, region_side: float, canonical_side: int) -> np.ndarray:
    """Resample a square of side ``region_side`` centered at ``center``.

    Coordinates are continuous: pixel (i, j) occupies the unit square whose
    corner is (j, i), so its center sits at (j + 0.5, i + 0.5). The window
    [cx - side/2, cx + side/2) x [cy - side/2, cy + side/2) is mapped onto a
    canonical_side-squared grid by bilinear interpolation with replicated
    borders. When the window is axis-aligned on whole pixels and needs no
    rescaling, the result equals the plain sub-image.
    """
    frame = np.asarray(frame)
    if frame.size == 0:
        raise ValueError("empty frame")
    if region_side <= 0 or canonical_side <= 0:
        raise ValueError("region_side and canonical_side must be positive")
    if frame.dtype == np.float64:  # remap has no 64-bit path
        frame = frame.astype(np.float32)
    cx, cy = float(center[0]), float(center[1])
    scale = region_side / canonical_side
    # source position of each output pixel center, in index coordinates
    grid = (np.arange(canonical_side) + 0.5) * scale - 0.5
    map_x = np.broadcast_to(
        (cx - region_side / 2.0 + grid)[None, :].astype(np.float32),
        (canonical_side, canonical_side),
    )
    map_y = np.broadcast_to(
        (cy - region_side / 2.0 + grid)[:, None].astype(np.float32),
        (canonical_side, canonical_side),
    )
    return cv2.remap(
        frame,
        np.ascontiguousarray(map_x),
        np.ascontiguousarray(map_y),
        interpolation=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_REPLICATE,
    )
