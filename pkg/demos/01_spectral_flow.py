# %% [markdown]
# # Spectral flow of symmetric paths
#
# A path of symmetric matrices with invertible ends has an integer spectral
# flow: the net number of eigenvalues that move from negative to positive.
# Three independent computations are available and must agree.

# %%
from pathlib import Path

import numpy as np

from floerkit.core import load_path, sample_path
from floerkit.specflow import (METHODS, AugmentedPath, delta_regularize, lagrange_flow_identity,
                               spectral_flow, varlag_signature)

FIXTURES = Path(__file__).resolve().parent / "fixtures"

# %% [markdown]
# The normalizing example: arctan crosses zero once, upward.

# %%
arctan = load_path((FIXTURES / "arctan.json").read_text())
for m in METHODS:
    rep = spectral_flow(arctan, m)
    print(f"{m:20s} flow = {rep.flow}")
print(spectral_flow(arctan).crossings)

# %% [markdown]
# Two eigenvalues crossing in opposite directions at the same parameter
# cancel.  The crossing shows up as one 2-dimensional kernel with signature 0.

# %%
pair = sample_path(lambda s: np.diag([np.arctan(s), -np.arctan(s)]), (-5, 5), 41)
print(spectral_flow(pair))

# %% [markdown]
# A path with singular ends needs regularizing first.  Subtracting
# delta * beta(s), with beta running from -1 to 1, pushes every zero
# eigenvalue at the right end to negative and at the left end to positive.

# %%
zero = load_path((FIXTURES / "zero_2x2.json").read_text())
print(spectral_flow(delta_regularize(zero, 0.1)).flow)

# %% [markdown]
# Adding a Lagrange multiplier block B changes the flow by half the change
# in the signature of B^T A^-1 B between the two ends.

# %%
a = sample_path(lambda s: np.array([[np.arctan(s) + 2]]), (-5, 5), 21)
r = lagrange_flow_identity(AugmentedPath.from_samples(a, np.ones((21, 1, 1))))
print(r)

for a_ in (2.0, -2.0, 0.5, -0.5):
    v = varlag_signature(a_, 1.0)
    print(f"a = {a_:+.1f}: sigma = {v.sigma:+d}, -sign(dv/drho) = {v.minus_sign_dv:+d}")
