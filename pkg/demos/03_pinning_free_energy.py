# %% [markdown]
# # Disordered pinning: free energy and critical point
# The partition function follows a renewal recursion computed in log space.
# The free energy is a replica average of log Z_N / N with a finite-size
# systematic |f_N - f_{N/2}|.

# %%
import numpy as np

from smoothlab import disorder as dis
from smoothlab.pinning import RenewalLaw, critical_point, free_energy_mc, homogeneous_f

law = RenewalLaw(0.8)
gauss = dis.standard_gaussian()

# %% [markdown]
# Without disorder the free energy vanishes like t^{1/alpha} for alpha < 1.

# %%
t = np.logspace(-4, -2, 10)
f = [homogeneous_f(RenewalLaw(0.75), x) for x in t]
print("fitted exponent", np.polyfit(np.log(t), np.log(f), 1)[0], "expected", 4 / 3)

# %%
est = free_energy_mc(gauss, law, 0.5, 0.2, 0.0, N=2048, replicas=32, seed=42, workers=4)
print(est.to_dict())

# %%
h_c = critical_point(gauss, law, 0.5, 0.0, N=1024, replicas=16, seed=11, tol=0.01)
print("estimated h_c at beta=0.5:", h_c)
