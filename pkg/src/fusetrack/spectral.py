"""2-D DFT utilities, a reference circular convolution, and spectrum zero-padding.

Conventions used throughout the package:

* forward DFT is unnormalized, ``coeff(0, 0) == values.sum()``
* inverse DFT carries the ``1 / (M * N)`` factor
* real grids are 2-D float arrays, spectra are 2-D complex arrays of the
  same shape, stored with the DC coefficient at index ``(0, 0)``

Under these conventions Parseval reads ``sum(g**2) == sum(abs(dft2(g))**2) / (M*N)``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "AsymmetricSpectrumError",
    "dft2",
    "idft2",
    "circ_conv_ref",
    "zero_pad_interp",
    "conjugate_mirror",
]


class AsymmetricSpectrumError(ValueError):
    """Spectrum claimed to describe a real grid is not conjugate-symmetric."""


def _as_grid(g):
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] < 1 or g.shape[1] < 1:
        raise ValueError(f"expected a 2-D grid, got shape {g.shape}")
    return g


def conjugate_mirror(spec: np.ndarray) -> np.ndarray:
    """Return the array ``T(u, v) = conj(S((-u) mod M, (-v) mod N))``.

    For the spectrum of a real grid this equals the spectrum itself.
    """
    spec = _as_grid(spec)
    return np.conj(np.roll(spec[::-1, ::-1], (1, 1), axis=(0, 1)))


def dft2(grid) -> np.ndarray:
    """Unnormalized forward 2-D DFT of a real grid."""
    grid = _as_grid(grid)
    if not np.all(np.isfinite(grid)):
        raise ValueError("grid contains non-finite values")
    return np.fft.fft2(grid.astype(np.float64))


def idft2(spec, sym_tol: float = 1e-9) -> np.ndarray:
    """Inverse 2-D DFT with 1/(MN) normalization, returned as a real grid.

    The spectrum must be conjugate-symmetric within ``sym_tol`` relative to
    its largest magnitude, otherwise discarding the imaginary part of the
    inverse would silently lose signal.
    """
    spec = np.asarray(_as_grid(spec), dtype=np.complex128)
    peak = np.abs(spec).max()
    if peak > 0:
        asym = np.abs(spec - conjugate_mirror(spec)).max()
        if asym > sym_tol * peak:
            raise AsymmetricSpectrumError(
                f"spectrum is not conjugate-symmetric: residual {asym:.3e} "
                f"exceeds {sym_tol:.1e} * max |coeff| = {sym_tol * peak:.3e}"
            )
    return np.fft.ifft2(spec).real


def circ_conv_ref(a, b) -> np.ndarray:
    """Circular convolution by direct summation, O(M^2 N^2).

    Reference implementation used as the oracle for every FFT-based path;
    intentionally avoids the transform entirely.
    """
    a = _as_grid(np.asarray(a, dtype=np.float64))
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    m_count, n_count = a.shape
    rows, cols = np.indices(a.shape)
    out = np.empty_like(a)
    for m in range(m_count):
        for n in range(n_count):
            out[m, n] = (a * b[(m - rows) % m_count, (n - cols) % n_count]).sum()
    return out


def _axis_mapping(size: int, target: int):
    """Source index, destination index, and weight arrays for one axis.

    Signed frequencies in [-ceil(size/2)+1, floor(size/2)] are preserved.
    For even sizes the Nyquist bin is split in half between the two mirror
    positions; when ``target == size`` both halves land in the same bin, so
    the mapping degenerates to the identity.
    """
    src = list(range(size))
    dst = [u if u <= size // 2 else u - size for u in src]
    wts = [1.0] * size
    if size % 2 == 0:
        ny = size // 2
        wts[ny] = 0.5
        src.append(ny)
        dst.append(-ny)
        wts.append(0.5)
    return (
        np.asarray(src),
        np.asarray(dst) % target,
        np.asarray(wts),
    )


def zero_pad_interp(spec, rows: int, cols: int) -> np.ndarray:
    """Pad a spectrum to ``rows x cols`` by inserting zeros at high frequencies.

    Coefficients are rescaled by ``(rows * cols) / (M * N)`` so that the
    inverse DFT of the result samples the same trigonometric interpolant on
    the finer grid. Conjugate symmetry of the input is preserved (even-size
    Nyquist bins are halved into their mirror positions), so a real grid
    stays real after interpolation.
    """
    spec = np.asarray(_as_grid(spec), dtype=np.complex128)
    m_count, n_count = spec.shape
    if rows < m_count or cols < n_count:
        raise ValueError(
            f"cannot shrink a {m_count}x{n_count} spectrum to {rows}x{cols}"
        )
    r_src, r_dst, r_w = _axis_mapping(m_count, rows)
    c_src, c_dst, c_w = _axis_mapping(n_count, cols)
    scale = (rows * cols) / (m_count * n_count)
    block = (r_w[:, None] * c_w[None, :]) * spec[np.ix_(r_src, c_src)] * scale
    out = np.zeros((rows, cols), dtype=np.complex128)
    np.add.at(out, (r_dst[:, None], c_dst[None, :]), block)
    return out
