# %% [markdown]
# # Robbin-Salamon indices of symplectic paths
#
# A symmetric generator S(t) on [0, 1] defines a symplectic path through
# dPsi/dt = J0 S Psi.  Its index counts the times where Psi(t) has
# eigenvalue 1, weighted by the crossing form.

# %%
from pathlib import Path

from floerkit.core import load_path, linearized_flow
from floerkit.czindex import (coz1_check, coz2_relations, floer_grading, perturbed_limits,
                              rotation_generator, rs_index, shear_generator)

FIXTURES = Path(__file__).resolve().parent / "fixtures"

# %% [markdown]
# Rotation by 2 pi k t closes up k times.  Interior crossings count 2 and
# the two endpoints count half of that each.

# %%
rot = load_path((FIXTURES / "rotation_k2.json").read_text())
print(linearized_flow(rot, 64).final.round(12))
rep = rs_index(rot)
print(rep.index, [(round(c.t, 6), c.signature, str(c.weight)) for c in rep.crossings])
print([int(rs_index(rotation_generator(k)).index) for k in range(1, 6)])

# %% [markdown]
# The shear is degenerate along its whole length.  Shifting the generator
# by -delta resolves it: the index is (sign a - sign delta)/2.

# %%
shear = load_path((FIXTURES / "shear_a1.json").read_text())
for d in (0.1, 0.0, -0.1):
    print(f"delta = {d:+.1f}: index {rs_index(shear, d).index}")
print(perturbed_limits(shear))
print(coz1_check(-2, 1, 0.05))

# %% [markdown]
# Jumps between the two perturbed limits measure the degenerate directions.

# %%
print(coz2_relations(rotation_generator(1), 2))
print(coz2_relations(shear_generator(1.0), 1))

# %% [markdown]
# The Floer grading adds a half-integer Morse term to the index.

# %%
for cz, ind in ((0, 0), (0, 3), (6, 0)):
    print(floer_grading(cz, ind, 7).grading)
