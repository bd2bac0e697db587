"""Patch cropping shared conventions.

A pixel at index (i, j) covers the unit square whose top-left corner is
(j, i); a box's center is x + w/2. Patches are resampled bilinearly with
border replication so feature grids line up with the tracker's own crops.
"""

import cv2
import numpy as np

__all__ = ["crop_patch", "read_boxes"]


def crop_patch(frame: np.ndarray, center, region_side: float, out_side: int) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.size == 0:
        raise ValueError("empty frame")
    if region_side <= 0 or out_side <= 0:
        raise ValueError("patch sides must be positive")
    if frame.dtype == np.float64:
        frame = frame.astype(np.float32)
    scale = region_side / out_side
    grid = (np.arange(out_side) + 0.5) * scale - 0.5
    map_x = (center[0] - region_side / 2.0 + grid)[None, :].astype(np.float32)
    map_y = (center[1] - region_side / 2.0 + grid)[:, None].astype(np.float32)
    return cv2.remap(
        frame,
        np.ascontiguousarray(np.broadcast_to(map_x, (out_side, out_side))),
        np.ascontiguousarray(np.broadcast_to(map_y, (out_side, out_side))),
        interpolation=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_REPLICATE,
    )


def read_boxes(path: str, one_based: bool = False):
    """Read x,y,w,h lines (comma/tab/space separated) into float tuples."""
    shift = 1.0 if one_based else 0.0
    boxes = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = [p for p in line.replace(",", " ").replace("\t", " ").split() if p]
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields")
            try:
                x, y, w, h = (float(p) for p in parts)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric field") from None
            boxes.append((x - shift, y - shift, w, h))
    if not boxes:
        raise ValueError(f"{path}: no boxes")
    return boxes
