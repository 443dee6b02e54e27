"""Temporal self-guidance: pull a block's attention toward an anchor block.

The anchor block usually runs at a coarser spatial resolution than the
blocks it guides, so its maps are first resampled onto the guided grid and
then blended in with ratio ``alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attention import AttnMapBatch, as_batch
from .errors import InvalidParameterError, InvalidShapeError

UPSAMPLE_MODES = ("bilinear", "nearest")


@dataclass(frozen=True)
class GuidanceConfig:
    """Which block guides which, and how strongly.

    Block indices are positions in the caller's ordered list of decoder
    blocks. The defaults follow the usual four-block video U-Net decoder:
    block 1 anchors blocks 2 and 3.
    """

    alpha: float = 0.6
    anchor_block: int = 1
    guided_blocks: tuple[int, ...] = (2, 3)
    upsample: str = "bilinear"

    def __post_init__(self):
        check_alpha(self.alpha)
        object.__setattr__(self, "guided_blocks", tuple(int(b) for b in self.guided_blocks))
        if self.anchor_block in self.guided_blocks:
            raise InvalidParameterError(
                f"anchor block {self.anchor_block} cannot also be guided")
        if self.upsample not in UPSAMPLE_MODES:
            raise InvalidParameterError(
                f"upsample must be one of {UPSAMPLE_MODES}, got {self.upsample!r}")


def check_alpha(alpha):
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameterError(f"alpha must lie in [0, 1], got {alpha}")


def _axis_weights(n_in, n_out, mode):
    """Source indices and interpolation weights for one axis.

    Corner-aligned: output sample 0 sits on input 0 and the last output
    sample on the last input.
    """
    if n_out == 1 or n_in == 1:
        pos = np.zeros(n_out)
    else:
        pos = np.arange(n_out) * (n_in - 1) / (n_out - 1)
    if mode == "nearest":
        idx = np.floor(pos + 0.5).astype(int)
        return idx, idx, np.zeros(n_out)
    lo = np.minimum(np.floor(pos).astype(int), n_in - 1)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, pos - lo


def upsample_spatial(anchor, target_hw, mode: str = "bilinear") -> AttnMapBatch:
    """Resample ``anchor`` onto a finer ``(H, W)`` grid.

    Every ``(i, j)`` attention entry is interpolated independently over the
    spatial grid. Bilinear weights are convex, so stochastic rows stay
    stochastic.
    """
    anchor = as_batch(anchor)
    if mode not in UPSAMPLE_MODES:
        raise InvalidParameterError(f"unknown upsample mode {mode!r}")
    B, H1, W1 = anchor.spatial_dims
    H2, W2 = (int(v) for v in target_hw)
    if H2 < H1 or W2 < W1:
        raise InvalidShapeError(
            f"cannot downsample from {(H1, W1)} to {(H2, W2)}")
    if (H1, W1) == (H2, W2):
        return anchor

    g = anchor.grid()
    lo, hi, t = _axis_weights(H1, H2, mode)
    t = t[None, :, None, None, None]
    g = (1.0 - t) * g[:, lo] + t * g[:, hi]
    lo, hi, t = _axis_weights(W1, W2, mode)
    t = t[None, None, :, None, None]
    g = (1.0 - t) * g[:, :, lo] + t * g[:, :, hi]

    F = anchor.frames
    return AttnMapBatch(g.reshape(B * H2 * W2, F, F), (B, H2, W2), anchor.stochastic)


def blend(guided, anchor_up, alpha: float) -> AttnMapBatch:
    """Convex blend ``(1 - alpha) * guided + alpha * anchor_up``.

    The distance to the anchor shrinks by exactly ``1 - alpha``.
    """
    guided, anchor_up = as_batch(guided), as_batch(anchor_up)
    check_alpha(alpha)
    if guided.data.shape != anchor_up.data.shape:
        raise InvalidShapeError(
            f"blend needs equal shapes, got {guided.data.shape} and {anchor_up.data.shape}")
    out = (1.0 - alpha) * guided.data + alpha * anchor_up.data
    return guided.with_data(out, guided.stochastic and anchor_up.stochastic)


def self_guide(guided, anchor, alpha: float, mode: str = "bilinear") -> AttnMapBatch:
    """Upsample ``anchor`` to the grid of ``guided`` and blend."""
    guided, anchor = as_batch(guided), as_batch(anchor)
    if guided.spatial_dims[0] != anchor.spatial_dims[0]:
        raise InvalidShapeError(
            f"batch sizes differ: {guided.spatial_dims[0]} vs {anchor.spatial_dims[0]}")
    if guided.frames != anchor.frames:
        raise InvalidShapeError(
            f"frame counts differ: {guided.frames} vs {anchor.frames}")
    anchor_up = upsample_spatial(anchor, guided.spatial_dims[1:], mode)
    return blend(guided, anchor_up, alpha)
