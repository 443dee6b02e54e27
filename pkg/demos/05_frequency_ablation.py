"""
Where the motion lives in the spectrum
======================================

Reconstruct a moving video through its own toy attention. Dropping the
high band leaves nearly static frames; dropping the low band keeps the
frame-to-frame changes but loses the mean image.
"""

# %%
from bytheway import (gen_video, reconstruct, scale_bands, scale_high, temporal_variation,
                      toy_temporal_attention)

video = gen_video("gaussian_blob", 64, 64, 16, velocity=(2, 0), seed=3)
amap = toy_temporal_attention(video)
print("input video       :", temporal_variation(video))
print("through attention :", temporal_variation(reconstruct(amap, video)))

# %%
for tau in (2, 4, 7):
    low = reconstruct(scale_high(amap, 0.0, tau), video)
    high = reconstruct(scale_bands(amap, tau, high=1.0, low=0.0), video)
    print(f"tau={tau}: low-pass variation {temporal_variation(low):.2e}, "
          f"high-pass variation {temporal_variation(high):.2e}, "
          f"high-pass mean level {high.mean():+.3f}")
