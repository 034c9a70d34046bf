"""
How far apart are the two lesser functions?
===========================================

A relaxed mode's lesser function is a Lorentzian weighted by an occupation.
Markovian relaxation uses f(omega_k), the non-Markovian form f(omega).  For
a mode sitting on the Fermi level the integrated difference is bounded by
(gamma / 4T) ln(T / gamma).
"""

# %%
import numpy as np

from relaxjunction import ReservoirMode, gless_error_bound, gless_error_norm

T, mu = 0.05, 0.0
print(f"{'gamma/T':>8s} {'norm':>11s} {'bound':>11s}")
for ratio in (1e-4, 1e-3, 1e-2, 1e-1, 1.0):
    mode = ReservoirMode(mu, ratio * T, np.array([1.0]))
    print(f"{ratio:8.0e} {gless_error_norm(mode, mu, T):11.4e} "
          f"{gless_error_bound(ratio * T, T):11.4e}")

# The logarithm makes the bound meaningful only for gamma well below T; at
# gamma = T it collapses to zero while the actual difference does not.

# %%
# Away from the Fermi level the difference is set by the Lorentzian tail,
# roughly gamma / (2 pi |omega_k - mu|), not by the thermal factor.
for offset in (5, 20, 50):
    mode = ReservoirMode(mu + offset * T, T / 100, np.array([1.0]))
    est = mode.gamma / (2 * np.pi * offset * T)
    print(f"omega_k - mu = {offset:2d} T: norm {gless_error_norm(mode, mu, T):.3e}, "
          f"tail estimate {est:.3e}")
