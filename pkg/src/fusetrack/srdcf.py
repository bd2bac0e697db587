"""Correlation filter learning with a spatial penalty on filter coefficients.

The training objective over a d-channel filter f is

    eps(f) = sum_k alpha_k || sum_l x_k^l * f^l  -  y_k ||^2
           + sum_l || w . f^l ||^2

with * circular convolution, . point-wise multiplication, and w a positive
penalty grid that grows away from the target center. Minimization happens in
the Fourier domain, where the data term diagonalizes per frequency and the
penalty couples frequencies through convolution with the spectrum of w. The
normal equations are solved by preconditioned conjugate gradient; training
samples enter only through running second-order accumulators, which realize
exponentially decaying sample weights with bounded state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import circ_conv_ref, dft2, idft2

__all__ = [
    "LabelParams",
    "RegWeight",
    "Filter",
    "TrainingMemory",
    "make_labels",
    "make_reg_weight",
    "update_memory",
    "solve_filter",
    "apply_filter",
    "objective_value",
    "fourier_objective",
]


@dataclass
class LabelParams:
    sigma_factor: float = 1.0 / 16.0

    def __post_init__(self):
        if self.sigma_factor <= 0:
            raise ValueError("sigma_factor must be positive")


@dataclass
class RegWeight:
    grid: np.ndarray
    mu_min: float
    eta: float

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        if self.grid.min() < self.mu_min or self.mu_min <= 0:
            raise ValueError("penalty grid must satisfy w >= mu_min > 0")


@dataclass
class Filter:
    """Learned filter stored as one spectrum per channel, plus its grid stride."""

    spectra: np.ndarray  # (d, M, N) complex
    stride: int

    @property
    def channels(self) -> int:
        return self.spectra.shape[0]

    def spatial(self) -> np.ndarray:
        return np.stack([idft2(s) for s in self.spectra])


def make_labels(m_count: int, n_count: int, target_cells, p: LabelParams) -> np.ndarray:
    """Gaussian score labels peaking at cell (0, 0) with circular distance.

    sigma = sigma_factor * sqrt(target height * width), both in cells. The
    peak sits at the origin because training patches are centered on the
    target: a filter response at (0, 0) then means "target at patch center".
    """
    th, tw = target_cells
    sigma = p.sigma_factor * float(np.sqrt(th * tw))
    m = np.arange(m_count)
    n = np.arange(n_count)
    moff = ((m + m_count // 2) % m_count) - m_count // 2
    noff = ((n + n_count // 2) % n_count) - n_count // 2
    return np.exp(-(moff[:, None] ** 2 + noff[None, :] ** 2) / (2.0 * sigma * sigma))


def make_reg_weight(
    m_count: int,
    n_count: int,
    target_cells,
    mu_min: float = 0.1,
    eta: float = 3.0,
) -> RegWeight:
    """Quadratic penalty bowl, minimum mu_min at the grid center.

    Offsets are measured from (M//2, N//2) and normalized by the target
    half-extent, so cells one half-target away from center pay mu_min + eta.
    """
    if mu_min <= 0 or eta < 0:
        raise ValueError("need mu_min > 0 and eta >= 0")
    th, tw = target_cells
    moff = np.arange(m_count) - m_count // 2
    noff = np.arange(n_count) - n_count // 2
    grid = mu_min + eta * (
        (moff[:, None] / (th / 2.0)) ** 2 + (noff[None, :] / (tw / 2.0)) ** 2
    )
    return RegWeight(grid, mu_min=mu_min, eta=eta)


@dataclass
class TrainingMemory:
    """Running Fourier-domain correlations of the training samples.

    auto[l, l'] accumulates conj(X^l) . X^l' and cross[l] accumulates
    conj(X^l) . Y, both weighted by exponentially decaying alpha_k. The
    first update copies the sample in with weight 1; every later update
    blends new = (1 - rate) * old + rate * sample, so the weights stay
    normalized to 1.
    """

    learning_rate: float = 0.01
    stride: int = 1
    auto: np.ndarray | None = None
    cross: np.ndarray | None = None
    weights: list = field(default_factory=list)

    def __post_init__(self):
        if not 0 < self.learning_rate < 1:
            raise ValueError("learning_rate must lie in (0, 1)")

    @property
    def count(self) -> int:
        return len(self.weights)

    @property
    def weight_total(self) -> float:
        return float(sum(self.weights))


def update_memory(mem: TrainingMemory, x, y) -> TrainingMemory:
    """Fold one (feature map, label grid) pair into the accumulators."""
    values = np.asarray(x.values, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    d = values.shape[0]
    if y.shape != values.shape[1:]:
        raise ValueError(f"label shape {y.shape} does not match sample {values.shape}")
    if mem.auto is not None and mem.auto.shape[2:] != y.shape:
        raise ValueError(
            f"sample {values.shape} does not match memory {mem.auto.shape}"
        )
    if mem.auto is not None and mem.auto.shape[0] != d:
        raise ValueError(f"channel count changed: {mem.auto.shape[0]} -> {d}")

    xhat = np.stack([dft2(values[l]) for l in range(d)])
    yhat = dft2(y)
    sample_auto = np.conj(xhat)[:, None] * xhat[None, :]
    sample_cross = np.conj(xhat) * yhat

    rate = mem.learning_rate
    if mem.auto is None:
        auto, cross = sample_auto, sample_cross
        weights = [1.0]
    else:
        auto = (1.0 - rate) * mem.auto + rate * sample_auto
        cross = (1.0 - rate) * mem.cross + rate * sample_cross
        weights = [w * (1.0 - rate) for w in mem.weights] + [rate]
    return TrainingMemory(
        learning_rate=rate,
        stride=x.stride,
        auto=auto,
        cross=cross,
        weights=weights,
    )


def _symmetrize(fhat: np.ndarray) -> np.ndarray:
    """Project spectra onto the conjugate-symmetric subspace (real filters).

    The exact CG iterates live there already; this only removes floating
    point drift so spatial filters stay real to machine precision.
    """
    mirror = np.conj(np.roll(fhat[:, ::-1, ::-1], (1, 1), axis=(1, 2)))
    return 0.5 * (fhat + mirror)


def _apply_system(auto: np.ndarray, w2: np.ndarray, fhat: np.ndarray) -> np.ndarray:
    """Normal-equations operator: data correlations plus the exact penalty.

    The penalty term is applied as DFT(w^2 . IDFT(fhat)) per channel, which
    is the exact Fourier form of ||w . f||^2's gradient (no truncation of
    the penalty spectrum).
    """
    out = np.einsum("lkmn,kmn->lmn", auto, fhat)
    spatial = np.fft.ifft2(fhat, axes=(-2, -1))
    out += np.fft.fft2(w2[None] * spatial, axes=(-2, -1))
    return out


def solve_filter(
    mem: TrainingMemory,
    w: RegWeight,
    iters: int,
    tol: float,
    init: np.ndarray | None = None,
    callback=None,
) -> Filter:
    """Minimize the training objective by preconditioned conjugate gradient.

    init warm-starts from a previous filter's spectra. callback, when given,
    receives a copy of the iterate's spectra after every CG step (used to
    observe convergence). Stops after ``iters`` steps or when the relative
    residual drops below ``tol``.
    """
    if mem.auto is None:
        raise ValueError("memory has no samples")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if not (np.all(np.isfinite(mem.auto.view(np.float64)))
            and np.all(np.isfinite(mem.cross.view(np.float64)))):
        raise ValueError("training accumulators contain non-finite values")

    w2 = w.grid**2
    b = mem.cross.astype(np.complex128)
    # diagonal preconditioner: per-frequency data energy plus the penalty's
    # diagonal, which is mean(w^2) for a multiply-in-space operator
    diag = np.einsum("llmn->lmn", mem.auto).real + w2.mean()

    x = np.zeros_like(b) if init is None else init.astype(np.complex128).copy()
    r = b - _apply_system(mem.auto, w2, x)
    b_norm = np.linalg.norm(b)
    if b_norm == 0:
        return Filter(spectra=x, stride=mem.stride)
    z = r / diag
    p = z.copy()
    rz = np.vdot(r, z)
    for _ in range(iters):
        if np.linalg.norm(r) <= tol * b_norm:
            break
        ap = _apply_system(mem.auto, w2, p)
        alpha = rz / np.vdot(p, ap)
        x = _symmetrize(x + alpha * p)
        r -= alpha * ap
        if callback is not None:
            callback(x.copy())
        z = r / diag
        rz_new = np.vdot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return Filter(spectra=x, stride=mem.stride)


def apply_filter(f: Filter, z) -> np.ndarray:
    """Confidence spectrum sum_l Z^l . F^l for a new sample z."""
    values = np.asarray(z.values, dtype=np.float64)
    if values.shape != f.spectra.shape:
        raise ValueError(f"sample shape {values.shape} does not match filter {f.spectra.shape}")
    out = np.zeros(f.spectra.shape[1:], dtype=np.complex128)
    for l in range(values.shape[0]):
        out += dft2(values[l]) * f.spectra[l]
    return out


def objective_value(f: Filter, samples, w: RegWeight) -> float:
    """Training objective evaluated entirely in the spatial domain.

    samples is a list of (FeatureMap, label grid, weight). Uses the direct
    summation convolution, so it shares no code path with the solver.
    """
    spatial = f.spatial()
    total = 0.0
    for x, y, alpha in samples:
        if alpha < 0:
            raise ValueError("sample weights must be nonnegative")
        values = np.asarray(x.values, dtype=np.float64)
        resp = np.zeros_like(np.asarray(y, dtype=np.float64))
        for l in range(values.shape[0]):
            resp += circ_conv_ref(values[l], spatial[l])
        total += alpha * ((resp - y) ** 2).sum()
    for l in range(spatial.shape[0]):
        total += ((w.grid * spatial[l]) ** 2).sum()
    return float(total)


def fourier_objective(f: Filter, samples, w: RegWeight) -> float:
    """The same objective evaluated without leaving the Fourier domain."""
    d, m_count, n_count = f.spectra.shape
    size = m_count * n_count
    total = 0.0
    for x, y, alpha in samples:
        values = np.asarray(x.values, dtype=np.float64)
        resp_hat = np.zeros((m_count, n_count), dtype=np.complex128)
        for l in range(d):
            resp_hat += dft2(values[l]) * f.spectra[l]
        total += alpha * (np.abs(resp_hat - dft2(y)) ** 2).sum() / size
    what = dft2(w.grid)
    for l in range(d):
        prod = np.fft.ifft2(np.fft.fft2(what) * np.fft.fft2(f.spectra[l])) / size
        total += (np.abs(prod) ** 2).sum() / size
    return float(total)
