"""The tracking loop: per-feature filters, fused multi-scale detection, update.

One filter is learned per feature type on a square training region whose
side is region_area_factor * sqrt(target area). Detection samples the region
at several scales, evaluates every filter, interpolates each confidence
spectrum to pixel resolution, and averages them; the global argmax over
(scale, row, col) gives the new state. The model is then updated at the new
state with exponentially decaying sample weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import FeatureSpec, TrackerConfig
from .features import (
    FeatureMap,
    apply_window,
    extract_cn,
    extract_gray,
    extract_hog,
    load_cn_table,
    load_fmap,
    read_fmap_header,
    sample_patch,
)
from .spectral import idft2, zero_pad_interp
from .srdcf import (
    Filter,
    LabelParams,
    TrainingMemory,
    apply_filter,
    make_labels,
    make_reg_weight,
    solve_filter,
    update_memory,
)

__all__ = [
    "TargetState",
    "ConfidenceMap",
    "TrackerState",
    "init_tracker",
    "fuse_scores",
    "detect_multiscale",
    "track_frame",
    "state_to_rect",
]


@dataclass
class TargetState:
    center: tuple  # (x, y) in frame pixels
    size: tuple  # (w, h) in frame pixels
    scale: float


@dataclass
class ConfidenceMap:
    """Pixel-dense fused scores on the sampled region.

    The grid matches the region's size in frame pixels (or the finest
    feature grid if that is finer). Grid index (r, c) means a circular
    displacement from the region center: indices past half the grid wrap
    to negative offsets. ``center`` is the frame point the region was
    sampled at and ``step`` converts one grid cell to frame pixels, so the
    map anchors scores to frame coordinates.
    """

    scores: np.ndarray
    center: tuple = (0.0, 0.0)
    step: float = 1.0


class _FeatureChannel:
    """Extractor plus learned state for one configured feature type."""

    def __init__(self, spec: FeatureSpec, cfg: TrackerConfig):
        self.spec = spec
        self.filter: Filter | None = None
        self.memory = TrainingMemory(learning_rate=cfg.learning_rate)
        self.labels: np.ndarray | None = None
        self.reg = None
        self._table = None
        if spec.kind == "cn":
            self._table = load_cn_table(cfg.cn_table)
        if spec.kind == "external":
            read_fmap_header(spec.path)  # fail fast: missing or malformed file

    def extract(self, patch: np.ndarray, frame_index: int) -> FeatureMap:
        kind = self.spec.kind
        if kind == "hog":
            fm = extract_hog(patch, cell=self.spec.cell)
        elif kind == "cn":
            fm = extract_cn(patch, self._table, cell=self.spec.cell)
        elif kind == "gray":
            fm = extract_gray(patch, cell=self.spec.cell)
        else:
            # precomputed maps cover the frame's region sample once; the same
            # map stands in for every scale hypothesis of that frame
            fm = load_fmap(self.spec.path, frame_index)
        return apply_window(fm)


@dataclass
class TrackerState:
    cfg: TrackerConfig
    target: TargetState
    base_size: tuple  # target (w, h) at scale 1
    region_base: float  # region side at scale 1
    channels: list
    frame_index: int = 0


def _scale_factors(cfg: TrackerConfig) -> np.ndarray:
    half = (cfg.scale_count - 1) / 2.0
    return cfg.scale_step ** (np.arange(cfg.scale_count) - half)


def _clamp_center(center, frame_shape):
    h, w = frame_shape[:2]
    return (
        float(np.clip(center[0], 0.0, w - 1.0)),
        float(np.clip(center[1], 0.0, h - 1.0)),
    )


def fuse_scores(confidences, rows: int, cols: int) -> ConfidenceMap:
    """Average per-feature confidences at pixel resolution.

    Each entry is (spectrum, stride). Every spectrum is zero-pad
    interpolated from its own grid up to rows x cols before averaging,
    which requires grid_size * stride to match the region size to within
    one stride.
    """
    confidences = list(confidences)
    if not confidences:
        raise ValueError("no confidences to fuse")
    acc = np.zeros((rows, cols))
    for spec, stride in confidences:
        spec = np.asarray(spec)
        m, n = spec.shape
        if abs(m * stride - rows) > stride or abs(n * stride - cols) > stride:
            raise ValueError(
                f"confidence grid {m}x{n} at stride {stride} does not cover "
                f"a {rows}x{cols} region"
            )
        acc += idft2(zero_pad_interp(spec, rows, cols))
    return ConfidenceMap(scores=acc / len(confidences))


def _sample_features(st: TrackerState, frame, center, region_side, frame_index):
    patch = sample_patch(frame, center, region_side, st.cfg.canonical_side)
    return [ch.extract(patch, frame_index) for ch in st.channels]


def init_tracker(frame, init_box, cfg: TrackerConfig) -> TrackerState:
    """Build per-feature models from the first frame's annotated box.

    init_box is (x, y, w, h) with 0-based top-left origin.
    """
    frame = np.asarray(frame)
    if not cfg.features:
        raise ValueError("feature list is empty")
    x, y, w, h = (float(v) for v in init_box)
    if w <= 0 or h <= 0:
        raise ValueError(f"degenerate init box: w={w}, h={h}")
    fh, fw = frame.shape[:2]
    if x < 0 or y < 0 or x + w > fw or y + h > fh:
        raise ValueError("init box lies outside the frame")

    center = (x + w / 2.0, y + h / 2.0)
    region_base = cfg.region_area_factor * float(np.sqrt(w * h))
    target = TargetState(center=center, size=(w, h), scale=1.0)
    channels = [_FeatureChannel(spec, cfg) for spec in cfg.features]
    st = TrackerState(
        cfg=cfg,
        target=target,
        base_size=(w, h),
        region_base=region_base,
        channels=channels,
    )

    resize = cfg.canonical_side / region_base
    maps = _sample_features(st, frame, center, region_base, frame_index=0)
    for ch, fm in zip(channels, maps):
        cells_h = h * resize / fm.stride
        cells_w = w * resize / fm.stride
        ch.labels = make_labels(
            fm.height, fm.width, (cells_h, cells_w), LabelParams(cfg.sigma_factor)
        )
        ch.reg = make_reg_weight(
            fm.height, fm.width, (cells_h, cells_w), mu_min=cfg.mu_min, eta=cfg.eta
        )
        ch.memory = update_memory(ch.memory, fm, ch.labels)
        ch.filter = solve_filter(ch.memory, ch.reg, cfg.first_frame_iters, cfg.tol)
    return st


def detect_multiscale(st: TrackerState, frame):
    """Score scale hypotheses around the current state and pick the argmax.

    Returns the new TargetState and the winning scale's fused confidence
    map. External feature maps are read for the upcoming frame index.
    """
    frame = np.asarray(frame)
    if frame.size == 0:
        raise ValueError("empty frame")
    cfg = st.cfg
    factors = _scale_factors(cfg)
    frame_index = st.frame_index + 1

    best = None  # (value, scale_idx, row, col, side, rows, conf)
    for k, factor in enumerate(factors):
        side = st.region_base * st.target.scale * factor
        maps = _sample_features(st, frame, st.target.center, side, frame_index)
        # pixel-dense scores over the region; never coarser than a feature grid
        rows = max(int(round(side)), 1, *(fm.height for fm in maps))
        conf = fuse_scores(
            [
                (apply_filter(ch.filter, fm), rows / fm.height)
                for ch, fm in zip(st.channels, maps)
            ],
            rows,
            rows,
        )
        idx = int(np.argmax(conf.scores))
        r, c = divmod(idx, rows)
        value = conf.scores[r, c]
        if best is None or value > best[0]:
            best = (value, k, r, c, side, rows, conf)

    _, k, r, c, side, rows, conf = best
    dr = r if r <= rows // 2 else r - rows
    dc = c if c <= rows // 2 else c - rows
    px_per_cell = side / rows
    new_center = _clamp_center(
        (st.target.center[0] + dc * px_per_cell, st.target.center[1] + dr * px_per_cell),
        frame.shape,
    )
    new_scale = float(st.target.scale * factors[k])
    new_size = (st.base_size[0] * new_scale, st.base_size[1] * new_scale)
    conf.center = st.target.center
    conf.step = px_per_cell
    return TargetState(center=new_center, size=new_size, scale=new_scale), conf


def track_frame(st: TrackerState, frame):
    """One detect-then-update step; returns (new target, updated state)."""
    new_target, _ = detect_multiscale(st, frame)
    st.target = new_target
    st.frame_index += 1

    side = st.region_base * new_target.scale
    maps = _sample_features(st, frame, new_target.center, side, st.frame_index)
    for ch, fm in zip(st.channels, maps):
        ch.memory = update_memory(ch.memory, fm, ch.labels)
        ch.filter = solve_filter(
            ch.memory,
            ch.reg,
            st.cfg.frame_iters,
            st.cfg.tol,
            init=ch.filter.spectra,
        )
    return new_target, st


def state_to_rect(target: TargetState) -> tuple:
    """(x, y, w, h) with 0-based top-left origin."""
    w, h = target.size
    return (target.center[0] - w / 2.0, target.center[1] - h / 2.0, w, h)
