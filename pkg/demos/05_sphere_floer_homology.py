# %% [markdown]
# # Floer homology of the unit cotangent bundle of S^n
#
# Generators are pairs (m, x): a multiple m of the closed geodesic family
# and a critical point x of a perfect Morse function on the family.  Their
# degrees are 2m(n-1) + ind(x) - (2n-1)/2.

# %%
from floerkit.spherehf import differential_candidates, grading_table, hf_table, lacunary_scan

for g in grading_table(4, [-1, 0, 1]):
    print(g.label, g.grading)

# %% [markdown]
# A differential would have to raise m and the degree by exactly one.  For
# n >= 4 that never happens, so the homology is the chain complex.

# %%
for n in range(2, 9):
    print(n, lacunary_scan(n))
print(len(differential_candidates(grading_table(3, range(-2, 3)))))

# %%
for n in (4, 5, 8):
    print(n, [str(d) for d in hf_table(n, (-10, 10)).degrees])
