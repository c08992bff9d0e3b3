# %% [markdown]
# # Rare stretches and a certified lower bound
# A stretch of length ell whose partition function grows at rate at least G is
# rare under the untilted law. Sampling it under a tilted law and reweighting
# estimates its probability; the probability then feeds an explicit lower
# bound on the free energy.

# %%
from smoothlab import disorder as dis
from smoothlab.pinning import RenewalLaw, free_energy_mc
from smoothlab.rarestretch import best_tilt, estimate_stretch_set, exact_stretch_probability

law = RenewalLaw(0.8)

# %% [markdown]
# On two-point disorder with ell = 12 every stretch can be enumerated.

# %%
spec = dis.two_point(2.0)
exact = exact_stretch_probability(spec, law, 0.5, -0.2, 12, -0.05)
for delta in (0.0, 0.3, 0.6):
    exp = estimate_stretch_set(spec, law, 0.5, -0.2, delta, 12, -0.05, 3000, 11)
    print(f"delta={delta}: {exp.P_hat:.4f} +- {exp.P_hat_se:.4f}   exact {exact:.4f}")

# %%
gauss = dis.standard_gaussian()
exp = best_tilt(gauss, law, 0.5, 0.2113, [0.0, 0.1, 0.2, 0.3], 256, 400, 9)
print(exp.report())
mc = free_energy_mc(gauss, law, 0.5, 0.2113, 0.0, 2048, 32, 1)
print("direct estimate", mc.value, "+-", mc.std_error)
