# %% [markdown]
# # Constants of the smoothing bounds
# B_delta sets the curvature of the tilted quadratic bound; it equals 1 for
# Gaussian disorder. C-/C+ compare tilting with shifting h, and A is the constant
# in the shifted bound.

# %%
import numpy as np

from smoothlab import constants as cst
from smoothlab import disorder as dis

for name, law in (("gaussian", dis.standard_gaussian()), ("rademacher", dis.rademacher()),
                  ("two-point a=2", dis.two_point(2.0))):
    print(name, [round(cst.b_delta(law, d), 4) for d in (-0.5, 0.1, 0.5)])

# %%
law = dis.two_point(2.0)
for beta in (0.0, 0.05, 0.2):
    c = np.array([cst.C_pm(law, beta, d) for d in (-0.5, -0.1, 0.1, 0.5)])
    print(f"beta={beta}: C-={np.round(c[:, 0], 4)}  C+={np.round(c[:, 1], 4)}")

# %% [markdown]
# A tends to 1 only when beta goes to 0 as well: at fixed beta it settles near
# 1 / (C-)^2.

# %%
gauss = dis.standard_gaussian()
for beta in (0.5, 0.2, 0.05):
    print(f"beta={beta}: A at delta=0.01 is {cst.a_constant(gauss, beta, 0.01):.4f}")
