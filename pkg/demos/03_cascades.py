# %% [markdown]
# # Morse-Bott homology with cascades on the 2-sphere
#
# f = z^2 on the unit sphere is critical at the two poles (maxima) and along
# the equator (a circle of minima).  A Morse function h = cos(theta) on the
# equator splits the circle into two generators.

# %%
from floerkit.cascades import build_complex, count_cascades, homology, s2_zsq_model

model = s2_zsq_model()
model.validate()
points = {x.name: x for x in model.critical_points()}
for name, x in points.items():
    print(f"{name:8s} ind_f + ind_h = {x.component.ind_f + x.ind_h}  action {model.action(x):+.3f}")

# %% [markdown]
# From the north pole, gradient lines descend to every equator point.  The
# only one that then flows along h into the h-maximum is the line landing on it.

# %%
res = count_cascades(model, points["E:c_max"], points["N:N"])
print(res.count, res.parity, res.trajectories)

# %% [markdown]
# On the circle there are two h-flow lines from c_max to c_min, so that
# pair cancels mod 2.

# %%
print(count_cascades(model, points["E:c_min"], points["E:c_max"]).count)

# %%
cx = build_complex(model)
print(cx.to_csv())
print(homology(cx))
print(homology(cx.dual()))
