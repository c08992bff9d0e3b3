# %% [markdown]
# # Product-spin toy model and the asymmetric two-point counterexample
# With independent spins the free energy is an explicit disorder average, so
# tilting identities can be checked to machine precision.

# %%
from smoothlab import disorder as dis
from smoothlab import toy

spins = toy.bernoulli_spins()
law = dis.rademacher()
print("f   =", toy.exact_f(law, spins, 0.2, 0.3, 0.1))
for N in (4, 8, 12):
    print(f"f_{N} =", toy.exact_f_finite_N(law, spins, 0.2, 0.3, 0.1, N))

# %% [markdown]
# Restricting the mean spin to small windows and taking the best window
# approaches the full finite-N free energy slowly, like (log N)/N.

# %%
for N in (6, 8, 10, 12):
    print(N, toy.sup_decomposition_check(law, spins, 0.2, 0.3, 0.1, N, 48))

# %% [markdown]
# For disorder taking values a and -1/a, the delta-derivative is of order
# beta^2 while beta times the h-derivative is of order beta^4, so their ratio
# blows up as beta shrinks.

# %%
for row in toy.derivative_table(2.0, [0.1, 0.05, 0.025]):
    a, beta, dh, ddelta, ratio = row
    print(f"beta={beta:<6} ddelta/beta^2={ddelta / beta**2:.4f}  ratio={ratio:.1f}")
print(toy.derivative_csv(toy.derivative_table(2.0, [0.1, 0.05], "cosh")))
