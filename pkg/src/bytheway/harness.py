"""Synthetic videos and toy attention for checking motion/energy behaviour.

Nothing here needs a trained model. Videos are periodic patterns translated
with wrap-around, attention maps are softmaxed dot products of local
patches, and motion is measured by exhaustive block matching.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import spearmanr

from .attention import AttnMapBatch, as_batch, energy, softmax
from .errors import InvalidParameterError, InvalidShapeError

PATTERNS = ("gaussian_blob", "sinusoidal_grating", "checker")


@dataclass(frozen=True)
class SyntheticVideo:
    frames: np.ndarray  # (F, H, W), values in [0, 1]
    velocity: tuple[float, float]  # (vx, vy) pixels per frame
    pattern: str

    @property
    def shape(self):
        return self.frames.shape


@dataclass(frozen=True)
class FlowField:
    """Block-matching displacements.

    ``vectors`` has shape ``(F - 1, n_blocks_y, n_blocks_x, 2)`` holding
    ``(dx, dy)`` from frame ``t`` to frame ``t + 1`` in pixels.
    """

    vectors: np.ndarray
    block_size: int
    search_radius: int

    @property
    def magnitudes(self) -> np.ndarray:
        return np.hypot(self.vectors[..., 0], self.vectors[..., 1])

    @property
    def mean_magnitude(self) -> float:
        return float(self.magnitudes.mean())


def _pattern(name, u, v, H, W, rng):
    """Evaluate a pattern at (possibly fractional) wrapped coordinates."""
    if name == "sinusoidal_grating":
        # one period across the frame in each axis, so features never
        # repeat within a sweep and block matching has no aliasing
        px, py = rng.uniform(0, 2 * np.pi, size=2)
        return (0.5 + 0.25 * np.sin(2 * np.pi * u / W + px)
                + 0.25 * np.sin(2 * np.pi * v / H + py))
    if name == "gaussian_blob":
        cx, cy = rng.uniform(0, W), rng.uniform(0, H)
        sigma = rng.uniform(0.1, 0.2) * min(H, W)
        dx = np.abs(u - cx)
        dx = np.minimum(dx, W - dx)
        dy = np.abs(v - cy)
        dy = np.minimum(dy, H - dy)
        return np.exp(-(dx ** 2 + dy ** 2) / (2 * sigma ** 2))
    if name == "checker":
        n = int(rng.integers(2, 5))
        cx, cy = W / (2 * n), H / (2 * n)
        return ((np.floor(u / cx) + np.floor(v / cy)) % 2).astype(float)
    raise InvalidParameterError(f"unknown pattern {name!r}; choose from {PATTERNS}")


def gen_video(pattern: str, H: int, W: int, F: int, velocity=(1.0, 0.0),
              seed: int = 0) -> SyntheticVideo:
    """Render ``pattern`` translated by ``t * velocity`` at frame ``t``.

    Coordinates wrap, so for integer velocities frame ``t`` is exactly
    ``np.roll`` of frame 0.
    """
    if H < 16 or W < 16:
        raise InvalidParameterError(f"frames must be at least 16x16, got {H}x{W}")
    if F < 2 or F % 2:
        raise InvalidParameterError(f"frame count must be even and >= 2, got {F}")
    vx, vy = (float(c) for c in velocity)
    if np.hypot(vx, vy) > min(H, W) / F:
        raise InvalidParameterError(
            f"|velocity| = {np.hypot(vx, vy):.3g} exceeds min(H, W)/F = {min(H, W) / F:.3g}")
    y, x = np.mgrid[0:H, 0:W].astype(float)
    frames = np.empty((F, H, W))
    for t in range(F):
        rng = np.random.default_rng(seed)
        u = np.mod(x - t * vx, W)
        v = np.mod(y - t * vy, H)
        frames[t] = _pattern(pattern, u, v, H, W, rng)
    return SyntheticVideo(np.clip(frames, 0.0, 1.0), (vx, vy), pattern)


def _frames(video) -> np.ndarray:
    arr = video.frames if isinstance(video, SyntheticVideo) else np.asarray(video, dtype=float)
    if arr.ndim != 3 or arr.shape[0] < 2:
        raise InvalidShapeError(f"video must have shape (F, H, W) with F >= 2, got {arr.shape}")
    return arr


def patch_features(video, patch_radius: int = 1) -> np.ndarray:
    """Wrapped ``(2r+1)**2`` patches around every pixel, shape ``(F, H, W, d)``."""
    frames = _frames(video)
    r = int(patch_radius)
    if r < 0 or 2 * r + 1 > min(frames.shape[1:]):
        raise InvalidShapeError(f"patch radius {r} does not fit a {frames.shape[1:]} frame")
    offsets = [(dy, dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1)]
    return np.stack([np.roll(frames, (-dy, -dx), axis=(1, 2)) for dy, dx in offsets], axis=-1)


def toy_temporal_attention(video, patch_radius: int = 1,
                           temperature: float = 0.2) -> AttnMapBatch:
    """Temporal attention from patch features at each pixel.

    ``A[s, i, j] = softmax_j(f_i . f_j / (sqrt(d) * temperature))`` where
    ``f_t`` is the patch around site ``s`` in frame ``t``. A static video
    gives exactly uniform rows.
    """
    if not temperature > 0:
        raise InvalidParameterError(f"temperature must be > 0, got {temperature}")
    feats = patch_features(video, patch_radius)
    F, H, W, d = feats.shape
    feats = feats.reshape(F, H * W, d).transpose(1, 0, 2)
    logits = feats @ feats.transpose(0, 2, 1) / (np.sqrt(d) * temperature)
    return AttnMapBatch(softmax(logits), (1, H, W), True)


def _search_offsets(radius):
    """Offsets inside a disk, ordered by the tie-break rule."""
    cand = [(dy, dx) for dy in range(-radius, radius + 1)
            for dx in range(-radius, radius + 1) if dy * dy + dx * dx <= radius * radius]
    cand.sort(key=lambda o: (o[0] ** 2 + o[1] ** 2, o[0], o[1]))
    return cand


def block_matching_flow(video, block_size: int = 8, search_radius: int = 4) -> FlowField:
    """Exhaustive SAD block matching between consecutive frames.

    Frames are tiled into non-overlapping ``block_size`` squares (partial
    edge blocks are dropped). For each block the displacement within a disk
    of ``search_radius`` that minimises the sum of absolute differences is
    kept; ties go to the smallest magnitude, then the smallest ``(dy, dx)``.
    Matching wraps around the frame edges like the synthetic videos do.
    """
    frames = _frames(video)
    F, H, W = frames.shape
    b = int(block_size)
    if not 1 <= b <= min(H, W):
        raise InvalidShapeError(f"block size {b} does not fit a {H}x{W} frame")
    nby, nbx = H // b, W // b
    offsets = _search_offsets(int(search_radius))
    vectors = np.zeros((F - 1, nby, nbx, 2))
    for t in range(F - 1):
        ref = frames[t, :nby * b, :nbx * b]
        sad = np.empty((len(offsets), nby, nbx))
        for k, (dy, dx) in enumerate(offsets):
            moved = np.roll(frames[t + 1], (-dy, -dx), axis=(0, 1))[:nby * b, :nbx * b]
            sad[k] = np.abs(moved - ref).reshape(nby, b, nbx, b).sum(axis=(1, 3))
        best = np.argmin(sad, axis=0)  # first minimum = preferred offset
        off = np.asarray(offsets, dtype=float)[best]
        vectors[t, ..., 0] = off[..., 1]
        vectors[t, ..., 1] = off[..., 0]
    return FlowField(vectors, b, int(search_radius))


def reconstruct(amap, video) -> np.ndarray:
    """Apply attention to per-pixel intensities.

    Output frame ``i`` at site ``s`` is ``sum_j A[s, i, j] * frame_j[s]``.
    """
    amap = as_batch(amap)
    frames = _frames(video)
    F, H, W = frames.shape
    if amap.frames != F or amap.sites != H * W:
        raise InvalidShapeError(
            f"map with S={amap.sites}, F={amap.frames} does not match video {frames.shape}")
    x = frames.reshape(F, H * W).T[:, :, None]
    return (amap.data @ x)[:, :, 0].T.reshape(F, H, W)


def temporal_variation(video) -> float:
    """Mean absolute difference between consecutive frames."""
    frames = _frames(video)
    return float(np.mean(np.abs(np.diff(frames, axis=0))))


@dataclass(frozen=True)
class SweepResult:
    velocities: list
    pairs: list  # (flow magnitude, energy) per velocity
    spearman: float

    def as_dict(self) -> dict:
        return {
            "velocities": [list(v) for v in self.velocities],
            "pairs": [list(p) for p in self.pairs],
            "spearman": None if np.isnan(self.spearman) else self.spearman,
        }


def _as_velocity(v):
    if np.ndim(v) == 0:
        return (float(v), 0.0)
    vx, vy = v
    return (float(vx), float(vy))


def energy_motion_sweep(velocities, pattern: str = "sinusoidal_grating", seed: int = 0,
                        size=(64, 64), frames: int = 16, patch_radius: int = 1,
                        temperature: float = 0.2, block_size: int = 8,
                        search_radius: int | None = None) -> SweepResult:
    """Measure flow magnitude and attention energy across velocities.

    Scalars in ``velocities`` are horizontal speeds. The same pattern and
    seed are used for every velocity.
    """
    vels = [_as_velocity(v) for v in velocities]
    if len(vels) < 5:
        raise InvalidParameterError(f"a sweep needs at least 5 velocities, got {len(vels)}")
    H, W = size
    if search_radius is None:
        search_radius = int(np.ceil(max(np.hypot(*v) for v in vels))) + 1
    pairs = []
    for v in vels:
        video = gen_video(pattern, H, W, frames, v, seed)
        flow = block_matching_flow(video, block_size, search_radius)
        amap = toy_temporal_attention(video, patch_radius, temperature)
        pairs.append((flow.mean_magnitude, energy(amap)))
    mags, energies = np.array(pairs).T
    if np.ptp(mags) == 0 or np.ptp(energies) == 0:
        rho = float("nan")
    else:
        rho = float(spearmanr(mags, energies)[0])
    return SweepResult(vels, pairs, rho)
