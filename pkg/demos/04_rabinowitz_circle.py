# %% [markdown]
# # A discretized Rabinowitz functional for the unit circle
#
# Loops v in the plane with a multiplier eta.  The action is the symplectic
# area of v minus eta times the mean of H(v), with H = |z|^2 - 1 near the
# circle.  Critical points are the k-fold circles with eta = pi k.

# %%
import numpy as np

from floerkit.rabinowitz import (CircleModel, DiscreteLoop, action, critical_starts,
                                 eta_bound_check, find_critical, grad_lower_bound, nocrit_epsilon,
                                 step1_loops, step2_loops)

model = CircleModel()
print("c_H =", model.c_H)
print(action(DiscreteLoop.circle(256, eta=np.pi), model) / np.pi)

# %% [markdown]
# Newton's method from perturbed starts lands on a critical loop, where the
# action equals eta.

# %%
for k in (1, 2, -1, 0):
    c = find_critical(next(critical_starts(k, 1, seed=0)), model)
    print(f"k = {k:+d}: eta/pi = {c.eta / np.pi:+.12f}  action - eta = {c.action - c.eta:+.1e}"
          f"  ({c.iterations} iterations)")

# %% [markdown]
# The a priori bounds: inside the shell |H| < delta the multiplier is
# controlled by the action and the gradient; outside half of it, the
# gradient is at least delta/2.

# %%
delta = 0.2
s1 = [eta_bound_check(l, model, delta) for l in step1_loops(200, 1, delta)]
s2 = [grad_lower_bound(l, model, delta) for l in step2_loops(200, 1, delta)]
print(all(r.holds for r in s1), min(r.rhs - r.lhs for r in s1))
print(all(r.holds for r in s2), min(r.grad_norm for r in s2))

# %%
print(nocrit_epsilon(1, 1))
