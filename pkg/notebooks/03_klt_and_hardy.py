# %% [markdown]
# # Eigenvalue bounds and Hardy constants
#
# Inverting alpha -> mu gives alpha_{a,p}, and the lowest eigenvalue of H_a - phi
# is bounded below by -alpha_{a,p}(||phi||_q) with q = p / (p-2).

# %%
import numpy as np

from magring import Grid, GridFunction, ProblemParams
from magring.circle import lp_norm
from magring.spectral import extremal_potential, hardy_tau, klt_check, lambda1
from magring.verify import random_nonnegative

grid = Grid(512)
params = ProblemParams(0.2, 4, 1.0)  # alpha is unused by the bound
rng = np.random.default_rng(7)

# %% [markdown]
# Constant potentials below the threshold give equality.

# %%
for c in (0.0, 0.1, 0.3):
    rep = klt_check(params, GridFunction(grid, np.full(512, c)))
    print(f"phi={c}  lambda1={rep.lambda1:.10f}  bound={rep.bound:.10f}  margin={rep.margin:.1e}")

# %% [markdown]
# Random potentials stay strictly above the bound.

# %%
margins = []
for _ in range(20):
    phi = random_nonnegative(rng, grid)
    margins.append(klt_check(params, phi).margin)
print("min margin over 20 random potentials:", min(margins))

# %% [markdown]
# The bound is still attained outside the constant regime: phi = u^(p-2), with u the
# optimal profile at alpha, has lambda1 = -alpha and ||phi||_q = mu.

# %%
phi = extremal_potential(params)
rep = klt_check(params, phi)
print("q-norm", rep.q_norm, "lambda1", rep.lambda1, "margin", rep.margin)

# %% [markdown]
# ## Hardy constant
#
# tau solves alpha_{a,p}(tau ||phi||_q) = 0, so tau ||phi||_q = mu_{a,p}(0).  It equals
# a^2 / ||phi||_q exactly when constants are optimal at alpha = 0, i.e. a^2 (p+2) <= 1.

# %%
for a, c in [(0.3, 0.05), (0.4, 0.5), (0.45, 0.05)]:
    p = ProblemParams(a, 4, 1.0)
    tau = hardy_tau(p, GridFunction(grid, np.full(512, c)))
    print(f"a={a} phi={c}  tau={tau:.10f}  a^2/||phi||={a * a / c:.10f}  a^2(p+2)={6 * a * a:.3f}")
