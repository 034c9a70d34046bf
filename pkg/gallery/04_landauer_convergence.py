"""
Approaching the Landauer limit
==============================

Larger reservoirs with relaxation shrinking as gamma = 8/N.  The Markovian
current (occupations taken at the mode energies) converges slowly: each
mode's Lorentzian smears the sharp T = 0 Fermi edges over a width gamma,
which costs an error of order gamma ln(1/gamma).  Taking the occupation at
the integration energy instead (non-Markovian) removes most of it.
"""

# %%
from relaxjunction import (
    ChainGeometry,
    FermiParameters,
    GammaOverN,
    LeadAttachment,
    SystemHamiltonian,
    landauer_convergence_report,
)

geometry = ChainGeometry(SystemHamiltonian([[0.0]]), LeadAttachment(1.0, 0.2),
                         LeadAttachment(1.0, 0.2))
fp = FermiParameters(0.25, -0.25)
rows = landauer_convergence_report(geometry, fp, [32, 64, 128, 256, 512, 1024, 2048],
                                   GammaOverN(8.0))

print(f"Landauer: {rows[0].landauer:.10f}")
print(f"{'N':>6s} {'gamma':>9s} {'spacing/g':>9s} {'Markov err':>11s} {'non-Markov err':>15s}")
for r in rows:
    print(f"{r.N:6d} {r.gamma:9.5f} {r.spacing_over_gamma:9.3f} "
          f"{r.dlvn_rel_err:11.3%} {r.nonmarkovian_rel_err:15.3%}")

# %%
# Doubling N halves gamma; the Markovian error roughly halves too, with
# visible wobble from where the discrete levels fall relative to mu.
