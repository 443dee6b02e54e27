"""
Energy and frequency bands of temporal attention
================================================

A temporal attention map holds one F x F row-stochastic matrix per spatial
site. Its energy is the mean squared weight, scaled by 1/F, which ranges
from 1/F (every frame attends uniformly) to 1 (every frame attends only to
itself).
"""

# %%
import numpy as np

from bytheway import band_energies, energy, identity_map, random_map, scale_high, uniform_map

F = 16
print("uniform  :", energy(uniform_map(4, F)))
print("identity :", energy(identity_map(4, F)))
print("random   :", energy(random_map(4, F, rng=0, concentration=2.0)))

# %%
# The row-wise DFT splits that energy into a band around the Nyquist bin
# and everything else. With tau = 7 the high band is bins 1..15, so only
# the DC bin is "low".
amap = random_map(64, F, rng=1, concentration=2.0)
bands = band_energies(amap, 7)
print(f"total {bands.total:.5f} = high {bands.high:.5f} + low {bands.low:.5f}")

# %%
# Scaling the high band by beta changes energy by (beta**2 - 1) * high
# while every row still sums to one.
for beta in (0.0, 0.5, 1.0, 1.5, 3.0):
    out = scale_high(amap, beta, 7)
    predicted = bands.total + (beta ** 2 - 1) * bands.high
    print(f"beta={beta:3.1f}  energy {energy(out):.5f}  predicted {predicted:.5f}  "
          f"max|rowsum-1| {np.abs(out.data.sum(-1) - 1).max():.1e}  min entry {out.data.min():+.3f}")
