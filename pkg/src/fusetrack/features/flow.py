"""Dense optical flow via Horn-Schunck, and the 3-channel flow encoding.

The flow solver minimizes

    E(u, v) = sum_p (Ix.u + Iy.v + It)^2
            + smoothness * sum_{4-neighbor pairs} ((u_p - u_q)^2 + (v_p - v_q)^2)

with It = cur - prev and Ix, Iy the centered differences of the frame
average (replicated edges). Pixels are updated in a red/black checkerboard
order, each update solving its 2x2 system exactly, so the energy never
increases across sweeps. Positive u means the pattern moves toward +x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import to_gray

__all__ = ["FlowField", "horn_schunck_flow", "flow_energy", "flow_to_motion_image"]


@dataclass
class FlowField:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        if self.u.shape != self.v.shape or self.u.ndim != 2:
            raise ValueError("u and v must be 2-D arrays of equal shape")
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))):
            raise ValueError("flow contains non-finite values")

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def width(self) -> int:
        return self.u.shape[1]


def _image_gradients(prev: np.ndarray, cur: np.ndarray):
    avg = 0.5 * (prev + cur)
    padded = np.pad(avg, 1, mode="edge")
    ix = 0.5 * (padded[1:-1, 2:] - padded[1:-1, :-2])
    iy = 0.5 * (padded[2:, 1:-1] - padded[:-2, 1:-1])
    return ix, iy, cur - prev


def _neighbor_sum(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    out[1:, :] += a[:-1, :]
    out[:-1, :] += a[1:, :]
    out[:, 1:] += a[:, :-1]
    out[:, :-1] += a[:, 1:]
    return out


def _neighbor_count(h: int, w: int) -> np.ndarray:
    cnt = np.full((h, w), 4.0)
    cnt[0, :] -= 1
    cnt[-1, :] -= 1
    cnt[:, 0] -= 1
    cnt[:, -1] -= 1
    return cnt


def horn_schunck_flow(prev, cur, smoothness: float, iters: int) -> FlowField:
    prev = to_gray(prev)
    cur = to_gray(cur)
    if prev.shape != cur.shape:
        raise ValueError(f"frame shapes differ: {prev.shape} vs {cur.shape}")
    if smoothness <= 0 or iters < 1:
        raise ValueError("smoothness must be > 0 and iters >= 1")

    ix, iy, it = _image_gradients(prev, cur)
    h, w = prev.shape
    cnt = _neighbor_count(h, w)
    lam_n = smoothness * cnt
    a11 = ix * ix + lam_n
    a22 = iy * iy + lam_n
    a12 = ix * iy
    det = a11 * a22 - a12 * a12

    rows, cols = np.indices((h, w))
    masks = [(rows + cols) % 2 == 0, (rows + cols) % 2 == 1]

    u = np.zeros((h, w))
    v = np.zeros((h, w))
    for _ in range(iters):
        for mask in masks:
            r1 = -ix * it + smoothness * _neighbor_sum(u)
            r2 = -iy * it + smoothness * _neighbor_sum(v)
            u_new = (a22 * r1 - a12 * r2) / det
            v_new = (a11 * r2 - a12 * r1) / det
            u[mask] = u_new[mask]
            v[mask] = v_new[mask]
    return FlowField(u, v)


def flow_energy(prev, cur, flow: FlowField, smoothness: float) -> float:
    """Objective the solver descends; exposed for verification."""
    prev = to_gray(prev)
    cur = to_gray(cur)
    ix, iy, it = _image_gradients(prev, cur)
    data = ((ix * flow.u + iy * flow.v + it) ** 2).sum()
    du_r = flow.u[:, 1:] - flow.u[:, :-1]
    dv_r = flow.v[:, 1:] - flow.v[:, :-1]
    du_d = flow.u[1:, :] - flow.u[:-1, :]
    dv_d = flow.v[1:, :] - flow.v[:-1, :]
    smooth = (du_r**2).sum() + (dv_r**2).sum() + (du_d**2).sum() + (dv_d**2).sum()
    return float(data + smoothness * smooth)


def flow_to_motion_image(flow: FlowField, gain: float = 16.0) -> np.ndarray:
    """Pack flow into an 8-bit 3-channel image: x, y, magnitude."""
    if gain <= 0:
        raise ValueError("gain must be positive")
    mag = np.sqrt(flow.u**2 + flow.v**2)
    ch0 = np.clip(np.rint(128.0 + gain * flow.u), 0, 255)
    ch1 = np.clip(np.rint(128.0 + gain * flow.v), 0, 255)
    ch2 = np.clip(np.rint(gain * mag), 0, 255)
    return np.stack([ch0, ch1, ch2], axis=2).astype(np.uint8)
