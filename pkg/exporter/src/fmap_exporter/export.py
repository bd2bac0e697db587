"""Per-frame feature export: crop a patch around each box, run the network,
write one FMAP file for the whole sequence.

The patch side is region_factor * sqrt(w*h) of that frame's box, centered on
the box center, resampled to a square canonical side. The (d, stride) pair in
the FMAP header comes from the network-kind table, never from the tensor.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import cv2
import numpy as np

from .fmapio import write_fmap
from .nets import KIND_TABLE, FeatureNet
from .patches import crop_patch, read_boxes

__all__ = [
    "ExportSpec",
    "MissingFlowImageError",
    "export_rgb_features",
    "export_motion_features",
]


class MissingFlowImageError(FileNotFoundError):
    pass


@dataclass
class ExportSpec:
    sequence_dir: str
    kind: str
    boxes_path: str
    out_path: str
    weights: str = "untrained:0"
    canonical_side: int = 224
    region_factor: float = 5.0
    one_based: bool = False
    channels: int = field(init=False)
    stride: int = field(init=False)

    def __post_init__(self):
        if self.kind not in KIND_TABLE:
            raise ValueError(
                f"unknown network kind {self.kind!r}; "
                f"expected one of {sorted(KIND_TABLE)}"
            )
        if self.canonical_side < 32:
            raise ValueError("canonical_side must be >= 32")
        if self.region_factor <= 0:
            raise ValueError("region_factor must be positive")
        self.channels, self.stride = KIND_TABLE[self.kind][:2]


def _frame_paths(img_dir: str):
    if not os.path.isdir(img_dir):
        raise FileNotFoundError(f"missing frame folder: {img_dir}")
    names = sorted(
        n for n in os.listdir(img_dir)
        if n.lower().endswith((".png", ".jpg", ".jpeg", ".bmp"))
    )
    if not names:
        raise ValueError(f"no frames in {img_dir}")
    return [os.path.join(img_dir, n) for n in names]


def _read_image(path: str) -> np.ndarray:
    img = cv2.imread(path, cv2.IMREAD_COLOR)
    if img is None:
        raise IOError(f"cannot decode image: {path}")
    return img[:, :, ::-1]  # RGB


def _patch_geometry(box, region_factor):
    x, y, w, h = box
    if w <= 0 or h <= 0:
        raise ValueError(f"degenerate box {box}")
    center = (x + w / 2.0, y + h / 2.0)
    return center, region_factor * float(np.sqrt(w * h))


def _run_export(spec: ExportSpec, image_for_frame) -> np.ndarray:
    frames = _frame_paths(os.path.join(spec.sequence_dir, "img"))
    boxes = read_boxes(spec.boxes_path, one_based=spec.one_based)
    if len(boxes) != len(frames):
        raise ValueError(
            f"{len(frames)} frames but {len(boxes)} boxes in {spec.boxes_path}"
        )
    net = FeatureNet(spec.kind, spec.weights)
    out = []
    for k, frame_path in enumerate(frames):
        img = image_for_frame(k, frame_path)
        center, side = _patch_geometry(boxes[k], spec.region_factor)
        patch = crop_patch(img, center, side, spec.canonical_side)
        out.append(net(patch))
    stack = np.stack(out).astype(np.float32)
    if stack.shape[1] != spec.channels:
        raise RuntimeError(
            f"network produced {stack.shape[1]} channels, table says {spec.channels}"
        )
    write_fmap(spec.out_path, stack, spec.stride)
    return stack


def export_rgb_features(spec: ExportSpec) -> np.ndarray:
    """Export rgb_shallow or rgb_deep activations; returns the written tensor."""
    if KIND_TABLE[spec.kind][3] != "image":
        raise ValueError(f"{spec.kind!r} is not an RGB network kind")
    return _run_export(spec, lambda k, path: _read_image(path))


def export_motion_features(spec: ExportSpec, flow_dir: str) -> np.ndarray:
    """Export motion-network activations over per-frame motion images.

    ``flow_dir`` holds one 3-channel motion image per frame, named after the
    frame's basename (e.g. img/0007.png -> flow_dir/0007.png).
    """
    if KIND_TABLE[spec.kind][3] != "flow":
        raise ValueError(f"{spec.kind!r} is not a motion network kind")
    if not os.path.isdir(flow_dir):
        raise FileNotFoundError(f"missing motion-image folder: {flow_dir}")

    def motion_for_frame(k, frame_path):
        name = os.path.splitext(os.path.basename(frame_path))[0] + ".png"
        path = os.path.join(flow_dir, name)
        if not os.path.isfile(path):
            raise MissingFlowImageError(
                f"frame {k}: missing motion image {path}"
            )
        return _read_image(path)

    return _run_export(spec, motion_for_frame)
