"""
Currents through a single level
===============================

One level at the band centre, two identical 32-site chains as reservoirs,
every mode relaxed at the same rate.  All current formulas are evaluated
side by side.
"""

# %%
import numpy as np

from relaxjunction import (
    ChainGeometry,
    FermiParameters,
    LeadAttachment,
    Method,
    SystemHamiltonian,
    Uniform,
)
from relaxjunction.analysis import evaluate_method

geometry = ChainGeometry(SystemHamiltonian([[0.0]]), LeadAttachment(1.0, 0.2),
                         LeadAttachment(1.0, 0.2))
junction = geometry.discretize(32, Uniform(0.05))
bias = FermiParameters(mu_L=0.25, mu_R=-0.25, temperature=0.0)

print("modes per lead:", len(junction.lead_L))
print("identical reservoirs:", junction.identical_reservoirs)

# %%
# The trace integral, its compact identical-lead form, the pole sum and the
# Lindblad steady state all describe the same physics and must agree to
# quadrature accuracy.  Landauer and non-Markovian are different models.
for m in Method:
    r = evaluate_method(m, junction, bias, None, geometry)
    print(f"{m.value:24s} {r.value: .12f}  err~{r.error_estimate:.1e}")

# %%
# Positive current runs from left to right; swapping the chemical
# potentials flips it.
I = evaluate_method(Method.POLE_SUM, junction, bias).value
I_swapped = evaluate_method(Method.POLE_SUM, junction, bias.swapped()).value
print("I(bias) + I(swapped) =", I + I_swapped)
