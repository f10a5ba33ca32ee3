# %% [markdown]
# # Independent checks
#
# The direct oracle minimizes the discretized quotient by preconditioned descent from
# the constant and from seeded random starts; it shares no code with the shooting solver.

# %%
import numpy as np

from magring import Grid, ProblemParams, mu
from magring.verify import bakry_emery_flow, direct_minimize, run_suites, taylor_coefficient_check

# %%
for a, p, alpha in [(0.3, 4, 0.2), (0.2, 4, 1.0), (0.45, 4, 0.3), (0.1, 3, 2.0)]:
    params = ProblemParams(a, p, alpha)
    o = direct_minimize(params, n=256)
    print(f"({a},{p},{alpha})  oracle {o.mu_hat:.12f}  shooting {mu(params):.12f}  iterations {o.iterations}")

# %% [markdown]
# ## Flow
#
# Along u_t = u'' + (p-1) u'^2 / u the p-mass is conserved and
# ||u'||^2 + (||u||_2^2 - ||u||_p^2) / (p-2) decreases to zero.

# %%
g = Grid(128)
states = bakry_emery_flow(g.sample(lambda s: 1 + 0.3 * np.cos(s)), 4.0, t_end=2.0, record_every=400)
for s in states:
    print(f"t={s.time:.3f}  F={s.functional_value:.3e}  mean u^p={s.mass_p:.12f}")

# %% [markdown]
# ## Second variation at constants
#
# With w = sqrt(2) cos s the eps^2 coefficient of the quotient at 1 + eps w is
# 1 - a^2 (p+2) - alpha (p-2); it changes sign at the branch point.

# %%
for alpha in (-0.2, -0.1075, 0.3):
    params = ProblemParams(0.45, 4, alpha)
    print(alpha, taylor_coefficient_check(params), 1 - params.rigidity_index)

# %%
for r in run_suites(seed=0):
    print(f"{r.name:18s} {'pass' if r.passed else 'FAIL'}  cases={r.cases}  worst margin={r.worst_margin:.2e}  {r.detail}")
