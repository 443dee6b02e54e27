"""Temporal attention map batches and the metrics defined on them.

A temporal attention map holds one ``F x F`` matrix per spatial site. Sites
are the flattened ``B * H * W`` grid in row-major order, so the data array
has shape ``(S, F, F)``. Row ``i`` of a site's matrix gives the weights frame
``i`` places on every frame; for softmax output each row sums to one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidShapeError

ROW_SUM_TOL = 1e-5
NEGATIVE_SLACK = 1e-7


@dataclass(frozen=True)
class AttnMapBatch:
    """Batch of ``F x F`` temporal attention maps over ``B * H * W`` sites.

    Parameters
    ----------
    data : array_like, shape (S, F, F)
        Attention weights. Stored as float64.
    spatial_dims : tuple of int, optional
        ``(B, H, W)`` with ``B * H * W == S``. Defaults to ``(1, 1, S)``.
    stochastic : bool
        True only when the rows are known to be probability vectors.
        Transforms that can produce negative entries clear it.
    """

    data: np.ndarray
    spatial_dims: tuple[int, int, int] | None = None
    stochastic: bool = False

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[1] != data.shape[2]:
            raise InvalidShapeError(
                f"attention data must have shape (S, F, F), got {data.shape}")
        S, F = data.shape[0], data.shape[1]
        if S == 0 or F < 2:
            raise InvalidShapeError(
                f"attention data needs S >= 1 and F >= 2, got S={S}, F={F}")
        dims = self.spatial_dims
        if dims is None:
            dims = (1, 1, S)
        dims = tuple(int(d) for d in dims)
        if len(dims) != 3 or min(dims) < 1 or dims[0] * dims[1] * dims[2] != S:
            raise InvalidShapeError(
                f"spatial_dims {dims} do not multiply to S={S}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "spatial_dims", dims)
        object.__setattr__(self, "stochastic", bool(self.stochastic))

    @property
    def sites(self) -> int:
        return self.data.shape[0]

    @property
    def frames(self) -> int:
        return self.data.shape[1]

    def grid(self) -> np.ndarray:
        """View of the data as ``(B, H, W, F, F)``."""
        return self.data.reshape(*self.spatial_dims, self.frames, self.frames)

    def with_data(self, data, stochastic=False) -> "AttnMapBatch":
        return AttnMapBatch(data, self.spatial_dims, stochastic)

    @classmethod
    def checked(cls, data, spatial_dims=None, tol=ROW_SUM_TOL) -> "AttnMapBatch":
        """Build a batch and set ``stochastic`` from :func:`validate`."""
        amap = cls(data, spatial_dims)
        return amap.with_data(amap.data, validate(amap, tol).stochastic)


def as_batch(amap) -> AttnMapBatch:
    if isinstance(amap, AttnMapBatch):
        return amap
    return AttnMapBatch(amap)


@dataclass(frozen=True)
class ValidationResult:
    stochastic: bool
    max_row_sum_deviation: float
    bad_rows: int
    negative_entries: int
    nonfinite_entries: int
    min_entry: float = field(default=float("nan"))


def validate(amap, tol: float = ROW_SUM_TOL) -> ValidationResult:
    """Check whether every row of ``amap`` is a probability vector.

    Never raises on bad values; the result lists what was found. Rows
    containing non-finite entries count as bad rows.
    """
    amap = as_batch(amap)
    a = amap.data
    finite = np.isfinite(a)
    nonfinite = int(a.size - np.count_nonzero(finite))
    dev = np.abs(a.sum(axis=-1) - 1.0)
    dev = np.where(np.all(finite, axis=-1), dev, np.inf)
    bad_rows = int(np.count_nonzero(~(dev <= tol)))
    negative = int(np.count_nonzero(a[finite] < -NEGATIVE_SLACK))
    finite_dev = dev[np.isfinite(dev)]
    return ValidationResult(
        stochastic=(bad_rows == 0 and negative == 0 and nonfinite == 0),
        max_row_sum_deviation=float(finite_dev.max()) if finite_dev.size else float("nan"),
        bad_rows=bad_rows,
        negative_entries=negative,
        nonfinite_entries=nonfinite,
        min_entry=float(a[finite].min()) if nonfinite < a.size else float("nan"),
    )


@dataclass(frozen=True)
class EnergyReport:
    """Energy of a batch, optionally split into high and low frequency bands.

    ``total`` is measured in the time domain; ``high`` and ``low`` come from
    the spectrum, so ``high + low == total`` is a Parseval check rather than
    a definition.
    """

    total: float
    high: float = float("nan")
    low: float = float("nan")
    per_site: np.ndarray | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {"total": self.total, "high": self.high, "low": self.low}


def site_energies(amap) -> np.ndarray:
    """Per-site energy ``(1/F) * sum_ij A_ij**2``, shape ``(S,)``."""
    amap = as_batch(amap)
    a = amap.data
    return np.einsum("sij,sij->s", a, a) / amap.frames


def energy(amap) -> float:
    """Spatially averaged energy of a temporal attention map.

    The identity map has energy 1 and the uniform map ``1/F``, the minimum
    over row-stochastic maps.
    """
    return float(np.mean(site_energies(amap)))


def disparity(map_a, map_b) -> float:
    """Mean over sites of the Frobenius distance between two batches."""
    map_a, map_b = as_batch(map_a), as_batch(map_b)
    if map_a.data.shape != map_b.data.shape:
        raise InvalidShapeError(
            f"disparity needs equal shapes, got {map_a.data.shape} and {map_b.data.shape}")
    diff = map_a.data - map_b.data
    return float(np.mean(np.sqrt(np.einsum("sij,sij->s", diff, diff))))


def uniform_map(sites: int, frames: int, spatial_dims=None) -> AttnMapBatch:
    return AttnMapBatch(np.full((sites, frames, frames), 1.0 / frames), spatial_dims, True)


def identity_map(sites: int, frames: int, spatial_dims=None) -> AttnMapBatch:
    data = np.broadcast_to(np.eye(frames), (sites, frames, frames))
    return AttnMapBatch(data, spatial_dims, True)


def random_map(sites: int, frames: int, rng=None, spatial_dims=None,
               concentration: float = 1.0) -> AttnMapBatch:
    """Random stochastic batch: each row is a softmax of Gaussian logits."""
    rng = np.random.default_rng(rng)
    logits = concentration * rng.standard_normal((sites, frames, frames))
    return AttnMapBatch(softmax(logits), spatial_dims, True)


def softmax(x, axis=-1):
    x = np.asarray(x, dtype=np.float64)
    z = np.exp(x - x.max(axis=axis, keepdims=True))
    return z / z.sum(axis=axis, keepdims=True)
