# %% [markdown]
# # Tilting the disorder
# Exponential tilting reweights a law by e^{delta x} / M(delta). For a standard
# Gaussian this is a plain shift of the mean by delta, which is why tilting and
# shifting h coincide there.

# %%
import numpy as np

from smoothlab import disorder as dis

gauss, coin, skew = dis.standard_gaussian(), dis.rademacher(), dis.two_point(2.0)
for delta in (0.0, 0.25, 0.5):
    print(f"delta={delta:.2f}  m_delta: gaussian {gauss.mean_at(delta):.4f}  "
          f"rademacher {coin.mean_at(delta):.4f}  two-point {skew.mean_at(delta):.4f}")

# %% [markdown]
# Sampling under the tilt returns the draws and the block log likelihood
# ratio. Per-draw weights undo the tilt.

# %%
omega, logw = dis.sample_block(skew, 0.5, 100_000, seed=1)
print("tilted sample mean", omega.mean(), "vs", skew.mean_at(0.5))
w = np.exp(-(0.5 * omega - dis.log_mgf(skew, 0.5)))
print("reweighted untilted mean", np.mean(omega * w), "block log ratio", logw)

# %% [markdown]
# Continuous densities go through quadrature; the tilt radius t0 is enforced.

# %%
lap = dis.laplace_density()
print("laplace t0", lap.t0, "log M(0.5)", dis.log_mgf(lap, 0.5))
try:
    dis.log_mgf(lap, lap.t0)
except Exception as exc:
    print(type(exc).__name__, exc)
