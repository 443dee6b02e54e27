"""Slow, loop-based reference implementations used only by the tests.

Each one follows the textbook definition directly and shares no code with
the package.
"""

import cmath
import math

import numpy as np


def dft_direct(x):
    F = len(x)
    return np.array([sum(x[n] * cmath.exp(-2j * math.pi * k * n / F) for n in range(F))
                     for k in range(F)])


def idft_direct(X):
    F = len(X)
    return np.array([sum(X[k] * cmath.exp(2j * math.pi * k * n / F) for k in range(F)) / F
                     for n in range(F)])


def energy_loops(a):
    S, F, _ = a.shape
    total = 0.0
    for s in range(S):
        site = 0.0
        for i in range(F):
            for j in range(F):
                site += a[s, i, j] ** 2
        total += site / F
    return total / S


def disparity_loops(a, b):
    S, F, _ = a.shape
    total = 0.0
    for s in range(S):
        sq = 0.0
        for i in range(F):
            for j in range(F):
                sq += (a[s, i, j] - b[s, i, j]) ** 2
        total += math.sqrt(sq)
    return total / S


def band_energies_loops(a, tau):
    """(high, low) via direct DFT of every row."""
    S, F, _ = a.shape
    lo_edge, hi_edge = F // 2 - tau, F // 2 + tau
    high = low = 0.0
    for s in range(S):
        for i in range(F):
            X = dft_direct(a[s, i])
            for k in range(F):
                p = abs(X[k]) ** 2 / (F * F)
                if lo_edge <= k <= hi_edge:
                    high += p
                else:
                    low += p
    return high / S, low / S


def bilinear_entry(grid, y, x):
    """Corner-aligned bilinear sample of a (H, W) grid at fractional (y, x)."""
    H, W = grid.shape
    y0, x0 = min(int(math.floor(y)), H - 1), min(int(math.floor(x)), W - 1)
    y1, x1 = min(y0 + 1, H - 1), min(x0 + 1, W - 1)
    ty, tx = y - y0, x - x0
    return ((1 - ty) * (1 - tx) * grid[y0, x0] + (1 - ty) * tx * grid[y0, x1]
            + ty * (1 - tx) * grid[y1, x0] + ty * tx * grid[y1, x1])


def block_match_loops(f0, f1, block, radius):
    """Best (dx, dy) per block by exhaustive search, same tie-break rule."""
    H, W = f0.shape
    out = []
    for by in range(H // block):
        for bx in range(W // block):
            best = None
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    if dy * dy + dx * dx > radius * radius:
                        continue
                    sad = 0.0
                    for y in range(by * block, (by + 1) * block):
                        for x in range(bx * block, (bx + 1) * block):
                            sad += abs(f1[(y + dy) % H, (x + dx) % W] - f0[y, x])
                    key = (sad, dy * dy + dx * dx, dy, dx)
                    if best is None or key < best:
                        best = key
            out.append((best[3], best[2]))
    return out


def temporal_variation_loops(v):
    F, H, W = v.shape
    total = 0.0
    for t in range(F - 1):
        for y in range(H):
            for x in range(W):
                total += abs(v[t + 1, y, x] - v[t, y, x])
    return total / ((F - 1) * H * W)
