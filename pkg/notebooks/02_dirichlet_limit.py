# %% [markdown]
# # Flux one half and the Dirichlet problem
#
# As a -> 1/2 the optimal profile develops a zero at s = +-pi and mu_{a,p}(alpha)
# increases to nu_p(alpha), the constant of the same quotient on functions vanishing at pi.

# %%
import math

import numpy as np
from scipy.special import beta

from magring import ProblemParams, dirichlet_nu, solve_branch

# %% [markdown]
# For p = 4 and alpha = 0 the Dirichlet profile solves u'' = -u^3 and nu has a closed form
# in terms of Beta functions.

# %%
z0 = math.sqrt(2) / 4 * beta(0.25, 0.5)
lam = z0 / math.pi
closed = math.sqrt(lam**3 / math.pi * math.sqrt(2) / 4 * beta(1.25, 0.5))
nu = dirichlet_nu(4, 0.0)
print("closed form", closed, "shooting", nu.mu, "difference", abs(closed - nu.mu))

# %%
for a in (0.45, 0.47, 0.49, 0.499):
    r = solve_branch(ProblemParams(a, 4, 0.0))
    print(f"a={a:<6} mu={r.mu:.10f}  nu-mu={nu.mu - r.mu:.2e}  min u={r.min_u:.4f}  steps={r.diagnostics['n_steps']}")

# %% [markdown]
# Profiles on a common 512-point grid.  The sup distance to the Dirichlet profile
# shrinks monotonically and is attained at s = pi, where it equals min u.

# %%
def on_grid(f, n=512):
    return f.values[:: f.grid.n_nodes // n]


limit = on_grid(nu.profile)
for a in np.round(np.arange(0.40, 0.4901, 0.01), 2):
    u = on_grid(solve_branch(ProblemParams(float(a), 4, 0.0)).profile)
    print(f"a={a:.2f}  sup|u - v| = {np.abs(u - limit).max():.4f}")

# %% [markdown]
# nu vanishes as alpha decreases to -1/4, the first Dirichlet eigenvalue with sign flipped.

# %%
for alpha in (-0.2, -0.24, -0.249, -0.2499):
    print(alpha, dirichlet_nu(4, alpha).mu)
