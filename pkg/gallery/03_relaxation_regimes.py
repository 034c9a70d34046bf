"""
From weak to strong relaxation
==============================

The pole sum interpolates between two closed forms: at small relaxation the
current is half the summed rates of the modes inside the bias window, at
large relaxation it falls off as 1/gamma.
"""

# %%
import numpy as np

from relaxjunction import (
    FermiParameters,
    Uniform,
    build_single_site_junction,
    current_large_gamma,
    current_pole_sum,
    current_small_gamma,
    discretize_lead_chain,
)

fp = FermiParameters(0.25, -0.25)
N = 64
spacing = 2 * np.pi / (N + 1)

print(f"{'gamma/spacing':>14s} {'pole sum':>12s} {'small':>12s} {'large':>12s}")
for ratio in np.logspace(-4, 4, 9):
    gamma = ratio * spacing
    leads = [discretize_lead_chain(N, 1.0, 0.2, Uniform(gamma), s) for s in "LR"]
    j = build_single_site_junction(0.0, leads)
    ps = current_pole_sum(j, fp).value
    sm = current_small_gamma(j, fp).value
    lg = current_large_gamma(j, fp).value
    print(f"{ratio:14.0e} {ps:12.5e} {sm:12.5e} {lg:12.5e}")

# %%
# Neither limit is ever chosen automatically; the table shows where each
# one is trustworthy.
