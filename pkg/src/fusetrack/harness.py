"""Sequence I/O, evaluation metrics, and synthetic test sequences.

Sequences follow the common benchmark layout: a directory with an ``img/``
folder of frames (sorted lexicographically) and a ``groundtruth_rect.txt``
holding one "x,y,w,h" line per frame in 1-based coordinates. Trajectory
files produced by the tracker use the same line syntax but 0-based
coordinates, and round-trip losslessly.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

import cv2
import numpy as np

__all__ = [
    "Rect",
    "SequenceSpec",
    "SuccessCurve",
    "iou",
    "overlap_precision",
    "auc_success",
    "load_sequence",
    "load_frame",
    "save_trajectory",
    "load_trajectory",
    "gen_synthetic",
    "write_sequence",
]

IMAGE_EXTS = (".png", ".jpg", ".jpeg", ".bmp")


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w < 0 or self.h < 0:
            raise ValueError(f"negative rect size: w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass
class SequenceSpec:
    frame_paths: list
    groundtruth: list
    fmap_paths: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.frame_paths and len(self.frame_paths) != len(self.groundtruth):
            raise ValueError(
                f"{len(self.frame_paths)} frames but {len(self.groundtruth)} "
                "ground-truth rects"
            )
        if not self.groundtruth:
            raise ValueError("sequence has no ground truth")
        first = self.groundtruth[0]
        if first.area <= 0:
            raise ValueError("first ground-truth rect must have positive area")


@dataclass
class SuccessCurve:
    thresholds: np.ndarray
    op: np.ndarray  # percentage at each threshold


def iou(a: Rect, b: Rect) -> float:
    ix = max(0.0, min(a.x + a.w, b.x + b.w) - max(a.x, b.x))
    iy = max(0.0, min(a.y + a.h, b.y + b.h) - max(a.y, b.y))
    inter = ix * iy
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return inter / union


def overlap_precision(traj, gt, threshold: float) -> float:
    """Percentage of frames whose overlap strictly exceeds the threshold."""
    if len(traj) != len(gt) or not traj:
        raise ValueError(f"length mismatch: {len(traj)} tracked vs {len(gt)} truth")
    hits = sum(1 for a, b in zip(traj, gt) if iou(a, b) > threshold)
    return 100.0 * hits / len(traj)


def auc_success(traj, gt):
    """Success curve at 21 uniform thresholds and its mean/100 as AUC."""
    thresholds = np.linspace(0.0, 1.0, 21)
    op = [overlap_precision(traj, gt, t) for t in thresholds]
    return sum(op) / len(op) / 100.0, SuccessCurve(thresholds=thresholds, op=np.array(op))


def _parse_rect_line(line: str, lineno: int, one_based: bool) -> Rect:
    parts = [p for p in re.split(r"[,\t ]+", line.strip()) if p]
    if len(parts) != 4:
        raise ValueError(f"line {lineno}: expected 4 fields, got {line.strip()!r}")
    try:
        x, y, w, h = (float(p) for p in parts)
    except ValueError:
        raise ValueError(f"line {lineno}: non-numeric field in {line.strip()!r}") from None
    if one_based:
        x, y = x - 1.0, y - 1.0
    return Rect(x, y, w, h)


def load_sequence(seq_dir: str) -> SequenceSpec:
    img_dir = os.path.join(seq_dir, "img")
    gt_path = os.path.join(seq_dir, "groundtruth_rect.txt")
    if not os.path.isfile(gt_path):
        raise FileNotFoundError(f"missing ground truth: {gt_path}")
    if not os.path.isdir(img_dir):
        raise FileNotFoundError(f"missing frame folder: {img_dir}")
    frames = sorted(
        os.path.join(img_dir, name)
        for name in os.listdir(img_dir)
        if name.lower().endswith(IMAGE_EXTS)
    )
    rects = []
    with open(gt_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                rects.append(_parse_rect_line(line, lineno, one_based=True))
    if len(frames) != len(rects):
        raise ValueError(
            f"{seq_dir}: {len(frames)} frames but {len(rects)} ground-truth lines"
        )
    fmaps = {
        os.path.splitext(name)[0]: os.path.join(seq_dir, name)
        for name in sorted(os.listdir(seq_dir))
        if name.endswith(".fmap")
    }
    return SequenceSpec(frame_paths=frames, groundtruth=rects, fmap_paths=fmaps)


def load_frame(path: str) -> np.ndarray:
    bgr = cv2.imread(path, cv2.IMREAD_COLOR)
    if bgr is None:
        raise IOError(f"cannot decode frame: {path}")
    return bgr[:, :, ::-1].copy()  # RGB


def save_trajectory(path: str, rects) -> None:
    """One 0-based "x,y,w,h" line per rect; floats written exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in rects:
            vals = ",".join(repr(float(v)) for v in (r.x, r.y, r.w, r.h))
            fh.write(vals + "\n")


def load_trajectory(path: str):
    rects = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                rects.append(_parse_rect_line(line, lineno, one_based=False))
    if not rects:
        raise ValueError(f"{path}: no rects")
    return rects


def _smooth_texture(rng, h, w, lo, hi, sigma):
    # band-limited: raw iid noise aliases badly under sub-pixel resampling
    raw = rng.integers(lo, hi, size=(h, w, 3)).astype(np.float64)
    return np.clip(cv2.GaussianBlur(raw, (0, 0), sigma), 0, 255).astype(np.uint8)


def _render_target(bg, texture, x_left, y_top, size):
    """Composite ``texture`` scaled to ``size`` px at a sub-pixel position."""
    s = size / texture.shape[1]
    mat = np.array(
        [[s, 0.0, x_left - 0.5 + 0.5 * s], [0.0, s, y_top - 0.5 + 0.5 * s]]
    )
    h_bg, w_bg = bg.shape[:2]
    warped = cv2.warpAffine(
        texture.astype(np.float32), mat, (w_bg, h_bg),
        flags=cv2.INTER_LINEAR, borderMode=cv2.BORDER_CONSTANT, borderValue=0,
    )
    alpha = cv2.warpAffine(
        np.ones(texture.shape[:2], np.float32), mat, (w_bg, h_bg),
        flags=cv2.INTER_LINEAR, borderMode=cv2.BORDER_CONSTANT, borderValue=0,
    )
    out = bg.astype(np.float32) * (1.0 - alpha[..., None]) + warped
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def gen_synthetic(kind: str, frames: int, seed: int):
    """Deterministic test sequences with exact ground truth.

    ``translate``: a textured 40x40 square moves (5, 3) px per frame over a
    darker textured background. ``zoom``: the square grows by 1.02 per frame
    about its fixed center, rendered at sub-pixel size so the drawn target
    matches the real-valued ground truth. Returns (SequenceSpec with empty
    paths, frames).
    """
    if frames < 2:
        raise ValueError("need at least 2 frames")
    if kind not in ("translate", "zoom"):
        raise ValueError(f"unknown synthetic kind {kind!r}")
    rng = np.random.default_rng(seed)
    size = 40
    if kind == "translate":
        height, width = 360, 480
        x0, y0, vx, vy = 40, 30, 5, 3
        texture = _smooth_texture(rng, size, size, 60, 256, 3.0)
    else:
        height, width = 288, 352
        cx, cy = 176.0, 144.0
        # oversampled texture, rescaled to the exact target size per frame
        texture = _smooth_texture(rng, 128, 128, 60, 256, 3.0)
    background = _smooth_texture(rng, height, width, 0, 70, 2.0)

    images, rects = [], []
    for k in range(frames):
        if kind == "translate":
            x, y = float(x0 + vx * k), float(y0 + vy * k)
            w = float(size)
        else:
            w = size * 1.02**k
            x, y = cx - w / 2.0, cy - w / 2.0
        images.append(_render_target(background, texture, x, y, w))
        rects.append(Rect(x, y, w, w))
    return SequenceSpec(frame_paths=[], groundtruth=rects), images


def write_sequence(seq_dir: str, spec: SequenceSpec, images) -> SequenceSpec:
    """Write frames and 1-based ground truth, then reload from disk."""
    img_dir = os.path.join(seq_dir, "img")
    os.makedirs(img_dir, exist_ok=True)
    for k, frame in enumerate(images):
        path = os.path.join(img_dir, f"{k + 1:04d}.png")
        if not cv2.imwrite(path, np.asarray(frame)[:, :, ::-1]):
            raise IOError(f"cannot write frame: {path}")
    with open(os.path.join(seq_dir, "groundtruth_rect.txt"), "w", encoding="utf-8") as fh:
        for r in spec.groundtruth:
            fh.write(f"{r.x + 1.0!r},{r.y + 1.0!r},{r.w!r},{r.h!r}\n")
    return load_sequence(seq_dir)
