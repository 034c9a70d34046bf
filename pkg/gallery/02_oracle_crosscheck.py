"""
Unequal reservoirs against the full-space steady state
======================================================

With different reservoirs the pole sum no longer applies; only the general
trace integral does.  Here it is checked against the stationary correlation
matrix of the whole system + reservoir space, and against plain time
propagation of that matrix.
"""

# %%
import numpy as np

from relaxjunction import (
    FermiParameters,
    JunctionModel,
    Lead,
    SystemHamiltonian,
    UsageError,
    current_pole_sum,
    current_trace_integral,
    oracle_current,
)
from relaxjunction.oracle import assemble_full_space, solve_steady_state, time_evolve

rng = np.random.default_rng(0)
H = SystemHamiltonian.symmetrized(rng.normal(size=(2, 2)))


def random_lead(label, K):
    V = 0.3 * (rng.normal(size=(2, K)) + 1j * rng.normal(size=(2, K)))
    return Lead.from_arrays(rng.uniform(-2, 2, K), rng.uniform(0.05, 0.5, K), V, label)


junction = JunctionModel(H, random_lead("L", 12), random_lead("R", 7))
fp = FermiParameters(0.4, -0.3, temperature=0.05)
print("mismatch:", junction.lead_mismatch())

# %%
try:
    current_pole_sum(junction, fp)
except UsageError as exc:
    print("pole sum refused:", exc)

I = current_trace_integral(junction, fp).value
ref = oracle_current(junction, fp)
print(f"trace integral {I:.14f}")
print(f"steady state   {ref.value:.14f}  (estimator spread {ref.diagnostics['estimator_spread']:.1e})")

# %%
# Start from empty system sites with the reservoirs already at their target
# occupations and follow I(t) until the transient is gone.
model = assemble_full_space(junction, fp)
occ = np.divide(model.target_diag, model.relax_diag, out=np.zeros(model.dim),
                where=model.relax_diag > 0)
traj = time_evolve(model, np.diag(occ), t_final=400.0, record_every=2000)
for t, I_t in zip(traj.times, traj.currents):
    print(f"t = {t:7.1f}   I(t) = {I_t: .10f}")
C = solve_steady_state(model).C
print("max |C(t_final) - C_ss| =", np.max(np.abs(traj.final - C)))
