# %% [markdown]
# # Running the checks
# Each check returns a report with a margin (positive means the inequality
# holds with room), a tolerance and the number of points examined.

# %%
from smoothlab import verify

reports = verify.run_all({"names": ["sandwich_exact", "derivative_ratio_growth", "invariants_toy",
                                    "invariants_constants"], "seed": 1})
for r in reports:
    print(f"{r.name:<22} {r.verdict:<6} margin={r.margin:+.3e} tol={r.tolerance:.1e} points={r.n_points}")

# %% [markdown]
# The Monte Carlo checks take a few seconds each at N = 4096 with 64 replicas.

# %%
rep = verify.check_gaussian_tilt_shift(seed=1, workers=4)
print(rep.verdict, rep.details["difference"], rep.details["combined_std_error"])
