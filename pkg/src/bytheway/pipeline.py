"""Per-step composition of self-guidance and high-band energy scaling.

For each guided block the order is fixed:

1. ``e1`` is the energy of the guided block before anything is changed.
2. The anchor block is upsampled and blended in with ratio ``alpha``.
3. The blended map's energy is split into high and low bands.
4. ``beta = max(beta0, beta_c)`` is chosen so the scaled map gets back at
   least ``e1`` energy.
5. The high band of the blended map is scaled by ``beta``.

The pipeline keeps no state between steps; callers pass the maps of the
current denoising step.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from types import MappingProxyType

from .attention import as_batch, disparity, energy
from .errors import InvalidParameterError, InvalidShapeError
from .fourier import BandMask, adaptive_beta, band_energies, critical_beta, scale_high
from .guidance import GuidanceConfig, blend, check_alpha, upsample_spatial

ENERGY_TOL = 1e-6


@dataclass(frozen=True)
class BtwParams:
    alpha: float = 0.6
    beta0: float = 1.5
    tau: int = 7
    step_fraction: float = 0.2
    anchor_block: int = 1
    guided_blocks: tuple[int, ...] = (2, 3)
    upsample: str = "bilinear"
    guidance: GuidanceConfig = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        check_alpha(self.alpha)
        if not self.beta0 > 0:
            raise InvalidParameterError(f"beta0 must be > 0, got {self.beta0}")
        if int(self.tau) != self.tau or self.tau < 1:
            raise InvalidParameterError(f"tau must be an integer >= 1, got {self.tau}")
        if not 0 < self.step_fraction <= 1:
            raise InvalidParameterError(
                f"step_fraction must lie in (0, 1], got {self.step_fraction}")
        guidance = GuidanceConfig(self.alpha, self.anchor_block,
                                  self.guided_blocks, self.upsample)
        object.__setattr__(self, "tau", int(self.tau))
        object.__setattr__(self, "guided_blocks", guidance.guided_blocks)
        object.__setattr__(self, "guidance", guidance)

    def band(self, frames: int) -> BandMask:
        return BandMask(self.tau, frames)

    def with_overrides(self, **kw) -> "BtwParams":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("guidance")
        d["guided_blocks"] = list(self.guided_blocks)
        return d


PRESETS = MappingProxyType({
    "animatediff": BtwParams(alpha=0.6, beta0=1.5, tau=7),
    "videocrafter2": BtwParams(alpha=0.1, beta0=10.0, tau=7),
})


def preset(name: str) -> BtwParams:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise InvalidParameterError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class BlockTrace:
    """Energies and distances recorded while processing one guided block.

    ``disparity_after`` is measured right after blending, before the
    frequency scaling. ``beta_critical`` is None when no finite ``beta``
    could restore ``e1``.
    """

    e1: float
    e2: float
    e2_high: float
    e2_low: float
    beta_used: float
    beta_critical: float | None
    e3: float
    disparity_before: float
    disparity_after: float

    @property
    def energy_guaranteed(self) -> bool:
        return self.beta_critical is not None and self.beta_used >= self.beta_critical

    def as_dict(self) -> dict:
        return asdict(self)


def apply_block(guided, anchor, params: BtwParams):
    """Run self-guidance then high-band scaling on one guided block.

    Returns
    -------
    out : AttnMapBatch
        Transformed map, flagged non-stochastic.
    trace : BlockTrace
    """
    guided, anchor = as_batch(guided), as_batch(anchor)
    mask = params.band(guided.frames)
    if guided.spatial_dims[0] != anchor.spatial_dims[0] or guided.frames != anchor.frames:
        raise InvalidShapeError(
            f"anchor {anchor.spatial_dims}xF={anchor.frames} is incompatible with "
            f"guided {guided.spatial_dims}xF={guided.frames}")

    e1 = energy(guided)
    anchor_up = upsample_spatial(anchor, guided.spatial_dims[1:], params.upsample)
    blended = blend(guided, anchor_up, params.alpha)
    bands = band_energies(blended, mask)
    beta_c = critical_beta(e1, bands.high, bands.low)
    beta = adaptive_beta(e1, bands.high, bands.low, params.beta0)
    out = scale_high(blended, beta, mask)

    trace = BlockTrace(
        e1=e1,
        e2=bands.total,
        e2_high=bands.high,
        e2_low=bands.low,
        beta_used=beta,
        beta_critical=None if math.isinf(beta_c) else beta_c,
        e3=energy(out),
        disparity_before=disparity(guided, anchor_up),
        disparity_after=disparity(blended, anchor_up),
    )
    return out, trace


def active_steps(total_steps: int, step_fraction: float) -> int:
    # round first so that e.g. 0.07 * 100 does not ceil to 8
    return math.ceil(round(step_fraction * total_steps, 9))


def should_apply(step_index: int, total_steps: int, step_fraction: float = 0.2) -> bool:
    """True for the first ``ceil(step_fraction * total_steps)`` steps."""
    if total_steps < 1 or not 0 <= step_index < total_steps:
        raise InvalidParameterError(
            f"need 0 <= step_index < total_steps, got {step_index} and {total_steps}")
    if not 0 < step_fraction <= 1:
        raise InvalidParameterError(f"step_fraction must lie in (0, 1], got {step_fraction}")
    return step_index < active_steps(total_steps, step_fraction)


def thread_count() -> int:
    """Worker cap from ``BTW_THREADS``, defaulting to the CPU count."""
    value = os.environ.get("BTW_THREADS", "").strip()
    if value:
        try:
            n = int(value)
        except ValueError:
            raise InvalidParameterError(f"BTW_THREADS must be an integer, got {value!r}") from None
        if n < 1:
            raise InvalidParameterError(f"BTW_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def apply_step(blocks, params: BtwParams, step_index: int, total_steps: int):
    """Apply the transform to every guided block of one denoising step.

    Parameters
    ----------
    blocks : sequence of AttnMapBatch
        Temporal attention maps of the decoder blocks, in decoder order.

    Returns
    -------
    blocks : list of AttnMapBatch
        Same order; only the guided blocks are replaced.
    traces : list of BlockTrace
        One per guided block, in ``params.guided_blocks`` order. Empty when
        the step is outside the active window.
    """
    blocks = list(blocks)
    if not should_apply(step_index, total_steps, params.step_fraction):
        return blocks, []
    n = len(blocks)
    for idx in (params.anchor_block, *params.guided_blocks):
        if not 0 <= idx < n:
            raise InvalidParameterError(f"block index {idx} out of range for {n} blocks")

    anchor = blocks[params.anchor_block]
    guided = params.guided_blocks
    workers = min(thread_count(), len(guided))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda m: apply_block(blocks[m], anchor, params), guided))
    else:
        results = [apply_block(blocks[m], anchor, params) for m in guided]

    out = list(blocks)
    for m, (new, _) in zip(guided, results):
        out[m] = new
    return out, [trace for _, trace in results]
