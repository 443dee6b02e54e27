"""Row-wise frequency analysis and high-band scaling of attention maps.

Each attention row is treated as a length-``F`` sequence and transformed
with the unnormalised DFT ``X[k] = sum_n x[n] exp(-2j pi k n / F)``. Bins
use the unshifted layout: DC at 0, Nyquist at ``F/2``. The high band is the
closed interval ``[F/2 - tau, F/2 + tau]``, which is symmetric about the
Nyquist bin, so scaling it keeps the inverse transform real; it never
contains the DC bin, so row sums are untouched.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .attention import AttnMapBatch, EnergyReport, as_batch, site_energies
from .errors import BtwWarning, InvalidParameterError, InvalidShapeError, SymmetryError

SYMMETRY_TOL = 1e-6
# Energy deficits and band energies below these relative levels are
# rounding noise; amplifying them would only inject noise.
DEFICIT_RTOL = 1e-12
EMPTY_BAND_RTOL = 1e-14


@dataclass(frozen=True)
class SpectrumBatch:
    data: np.ndarray
    spatial_dims: tuple[int, int, int]

    @property
    def frames(self) -> int:
        return self.data.shape[-1]


@dataclass(frozen=True)
class BandMask:
    """High-frequency band ``[F/2 - tau, F/2 + tau]`` for ``F`` frames.

    ``F`` must be even and ``1 <= tau <= F/2 - 1``.
    """

    tau: int
    frames: int

    def __post_init__(self):
        F, tau = self.frames, self.tau
        if F < 2 or F % 2:
            raise InvalidParameterError(f"frame count must be even, got F={F}")
        if int(tau) != tau or not 1 <= tau <= F // 2 - 1:
            raise InvalidParameterError(
                f"tau must satisfy 1 <= tau <= F/2 - 1 = {F // 2 - 1} for F={F}, got {tau}")
        object.__setattr__(self, "tau", int(tau))

    @property
    def high_indices(self) -> np.ndarray:
        c = self.frames // 2
        return np.arange(c - self.tau, c + self.tau + 1)

    @property
    def high(self) -> np.ndarray:
        """Boolean mask over the ``F`` bins, True inside the high band."""
        m = np.zeros(self.frames, dtype=bool)
        m[self.high_indices] = True
        return m


def _mask_for(mask, frames) -> BandMask:
    if isinstance(mask, BandMask):
        if mask.frames != frames:
            raise InvalidShapeError(
                f"band mask built for F={mask.frames}, map has F={frames}")
        return mask
    return BandMask(mask, frames)


def dft_rows(amap) -> SpectrumBatch:
    """DFT of every attention row along the softmax axis."""
    amap = as_batch(amap)
    return SpectrumBatch(np.fft.fft(amap.data, axis=-1), amap.spatial_dims)


def idft_rows(spectrum: SpectrumBatch) -> AttnMapBatch:
    """Inverse of :func:`dft_rows`.

    Raises
    ------
    SymmetryError
        If the spectrum is not conjugate symmetric, i.e. the inverse would
        have a non-negligible imaginary part.
    """
    X = np.asarray(spectrum.data)
    F = X.shape[-1]
    mirror = np.conj(X[..., (-np.arange(F)) % F])
    scale = max(1.0, float(np.max(np.abs(X), initial=0.0)))
    err = float(np.max(np.abs(X - mirror), initial=0.0))
    if err > SYMMETRY_TOL * scale:
        raise SymmetryError(
            f"spectrum is not conjugate symmetric (max mismatch {err:.3g})")
    x = np.fft.ifft(X, axis=-1).real
    return AttnMapBatch(x, spectrum.spatial_dims, False)


def band_energies(amap, mask) -> EnergyReport:
    """Split the energy of ``amap`` into high and low frequency parts.

    Per row the band energy is ``(1/F) * sum_k |X[k]|**2`` over the band's
    bins; rows are combined into site energies as in :func:`energy` and
    sites are averaged.
    """
    amap = as_batch(amap)
    F = amap.frames
    mask = _mask_for(mask, F)
    power = np.abs(dft_rows(amap).data) ** 2
    high_site = power[..., mask.high].sum(axis=(-1, -2)) / (F * F)
    low_site = power[..., ~mask.high].sum(axis=(-1, -2)) / (F * F)
    per_site = site_energies(amap)
    return EnergyReport(
        total=float(np.mean(per_site)),
        high=float(np.mean(high_site)),
        low=float(np.mean(low_site)),
        per_site=per_site,
    )


def scale_bands(amap, mask, high: float = 1.0, low: float = 1.0) -> AttnMapBatch:
    """Multiply the high band by ``high`` and every other bin by ``low``.

    ``low != 1`` also rescales the DC bin and so changes row sums; it exists
    for the high-pass ablation. Use :func:`scale_high` for the
    sum-preserving transform.
    """
    amap = as_batch(amap)
    mask = _mask_for(mask, amap.frames)
    a = amap.data
    proj = band_projector(mask.tau, mask.frames)
    if low == 1.0:
        out = a + (high - 1.0) * (a @ proj)
    else:
        out = low * a + (high - low) * (a @ proj)
    return amap.with_data(out, False)


@lru_cache(maxsize=None)
def band_projector(tau: int, frames: int) -> np.ndarray:
    """Real matrix ``P`` with ``x @ P`` = inverse DFT of the high band of ``x``.

    Scaling the band by ``beta`` and inverting is then ``x + (beta - 1) * x @ P``,
    one small matmul per batch instead of a forward and inverse transform.
    ``P`` is symmetric, idempotent and annihilates constant rows.
    """
    mask = BandMask(tau, frames)
    n = np.arange(frames)
    k = mask.high_indices
    W = np.exp(-2j * np.pi * np.outer(k, n) / frames)  # band rows of the DFT matrix
    proj = (W.conj().T @ W).real / frames
    proj.setflags(write=False)
    return proj


def scale_high(amap, beta: float, mask) -> AttnMapBatch:
    """Scale the high-frequency band of every row by ``beta``.

    Row sums are preserved exactly (up to rounding) for any ``beta >= 0``.
    Energy changes by ``(beta**2 - 1)`` times the high-band energy. Entries
    may turn negative and are not clamped, so the result is never flagged
    stochastic.
    """
    if not beta >= 0:
        raise InvalidParameterError(f"beta must be >= 0, got {beta}")
    return scale_bands(amap, mask, high=beta, low=1.0)


def critical_beta(e1: float, e2_high: float, e2_low: float) -> float:
    """Smallest ``beta`` with ``beta**2 * e2_high + e2_low >= e1``.

    Returns 0 when no amplification is needed and ``inf`` when the high
    band is empty but energy is still short. Deficits and band energies at
    rounding level are treated as zero.
    """
    deficit = e1 - e2_low
    if deficit <= DEFICIT_RTOL * abs(e1):
        return 0.0
    if e2_high <= EMPTY_BAND_RTOL * (e2_high + e2_low):
        return math.inf
    return math.sqrt(deficit / e2_high)


def adaptive_beta(e1: float, e2_high: float, e2_low: float, beta0: float) -> float:
    """``max(beta0, beta_c)`` so that scaling restores at least ``e1`` energy.

    When the high band carries no energy, no ``beta`` can help; ``beta0`` is
    returned and a :class:`BtwWarning` is issued.
    """
    if not beta0 > 0:
        raise InvalidParameterError(f"beta0 must be > 0, got {beta0}")
    if e2_high < 0 or e2_low < 0:
        raise InvalidParameterError(
            f"band energies must be >= 0, got high={e2_high}, low={e2_low}")
    beta_c = critical_beta(e1, e2_high, e2_low)
    if math.isinf(beta_c):
        warnings.warn("high band is empty; energy cannot be restored, using beta0",
                      BtwWarning, stacklevel=2)
        beta_c = 0.0
    return max(float(beta0), beta_c)
