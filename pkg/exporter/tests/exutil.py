"""Shared helpers for exporter tests: tiny on-disk sequences."""

import os

import cv2
import numpy as np


def make_sequence(root, n_frames=2, size=(120, 160), seed=0, shift=3):
    """Write a small sequence: img/000k.png frames plus box files.

    Frames are a band-limited texture rolled ``shift`` px right per frame.
    Returns (sequence_dir, zero_based_boxes_path). A 1-based
    groundtruth_rect.txt with the same boxes is written alongside.
    """
    rng = np.random.default_rng(seed)
    img_dir = os.path.join(root, "img")
    os.makedirs(img_dir, exist_ok=True)
    raw = rng.integers(0, 256, size=(size[0], size[1], 3)).astype(np.float64)
    base = np.clip(cv2.GaussianBlur(raw, (0, 0), 2.0), 0, 255).astype(np.uint8)
    boxes = []
    for k in range(n_frames):
        frame = np.roll(base, shift * k, axis=1)
        assert cv2.imwrite(os.path.join(img_dir, f"{k + 1:04d}.png"), frame[:, :, ::-1])
        boxes.append((40.0 + shift * k, 30.0, 36.0, 28.0))
    boxes_path = os.path.join(root, "boxes.txt")
    with open(boxes_path, "w", encoding="utf-8") as fh:
        for x, y, w, h in boxes:
            fh.write(f"{x},{y},{w},{h}\n")
    with open(os.path.join(root, "groundtruth_rect.txt"), "w", encoding="utf-8") as fh:
        for x, y, w, h in boxes:
            fh.write(f"{x + 1},{y + 1},{w},{h}\n")
    return root, boxes_path
