"""
One denoising step through the full transform
=============================================

Four decoder blocks, the anchor at index 1 guiding blocks 2 and 3. The
transform only runs during the first 20% of sampling steps.
"""

# %%
import numpy as np

from bytheway import PRESETS, AttnMapBatch, apply_step, energy, should_apply
from bytheway.attention import softmax

rng = np.random.default_rng(0)
motion = 2.0 * rng.standard_normal((16, 16))
blocks = []
for side in (2, 4, 8, 8):
    logits = motion + 1.5 * rng.standard_normal((side * side, 16, 16))
    blocks.append(AttnMapBatch(softmax(logits), (1, side, side), True))

# %%
params = PRESETS["animatediff"]
print(params)
print("active steps out of 50:", [i for i in range(50) if should_apply(i, 50, params.step_fraction)])

# %%
out, traces = apply_step(blocks, params, step_index=0, total_steps=50)
for m, tr in zip(params.guided_blocks, traces):
    print(f"block {m}: E1={tr.e1:.4f} E2={tr.e2:.4f} E3={tr.e3:.4f} beta={tr.beta_used:.3f} "
          f"disparity {tr.disparity_before:.3f} -> {tr.disparity_after:.3f}")
print("anchor untouched:", out[1] is blocks[1], " energy", energy(out[1]))

# %%
out, traces = apply_step(blocks, params, step_index=30, total_steps=50)
print("step 30 traces:", traces)
