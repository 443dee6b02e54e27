"""
Temporal self-guidance
======================

Later decoder blocks run at higher resolution than the anchor block. The
anchor's maps are bilinearly upsampled to the guided grid and blended in
with ratio alpha. The distance to the anchor shrinks by exactly 1 - alpha.
"""

# %%
from bytheway import blend, disparity, random_map, upsample_spatial

anchor = random_map(4 * 4, 16, rng=0, spatial_dims=(1, 4, 4))
guided = random_map(8 * 8, 16, rng=1, spatial_dims=(1, 8, 8))
anchor_up = upsample_spatial(anchor, (8, 8))
print("anchor upsampled to", anchor_up.spatial_dims, "stochastic:", anchor_up.stochastic)

# %%
before = disparity(guided, anchor_up)
for alpha in (0.0, 0.1, 0.6, 1.0):
    after = disparity(blend(guided, anchor_up, alpha), anchor_up)
    print(f"alpha={alpha:.1f}  disparity {after:.4f}  ratio {after / before:.4f}")
