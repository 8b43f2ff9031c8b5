"""Seeded random instances for the property and acceptance suites."""
from __future__ import annotations

import numpy as np

from .core import SymmetricPath, min_abs_eig
from .specflow import AugmentedPath


def random_symmetric(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    m = rng.standard_normal((dim, dim)) * scale
    return 0.5 * (m + m.T)


def _invertible(rng, dim, gap):
    while True:
        m = random_symmetric(rng, dim)
        if min_abs_eig(m) > gap:
            return m


def random_path(rng: np.random.Generator, dim: int, nodes: int = 2, gap: float = 1e-2,
                interval=(-1.0, 1.0)) -> SymmetricPath:
    """Piecewise-linear random path with invertible endpoints.

    ``nodes == 2`` gives an affine path.
    """
    params = np.linspace(*interval, nodes)
    mats = [_invertible(rng, dim, gap)]
    mats += [random_symmetric(rng, dim) for _ in range(nodes - 2)]
    mats.append(_invertible(rng, dim, gap))
    return SymmetricPath.from_samples(params, np.array(mats))


def random_regular_end(rng: np.random.Generator, dim_w: int, dim_v: int, gap: float = 0.05):
    """(A, B) with B injective, A invertible and preserving range(B)."""
    q, _ = np.linalg.qr(rng.standard_normal((dim_w, dim_w)))
    inner = _invertible(rng, dim_v, gap) if dim_v else np.zeros((0, 0))
    outer = _invertible(rng, dim_w - dim_v, gap) if dim_w > dim_v else np.zeros((0, 0))
    block = np.zeros((dim_w, dim_w))
    block[:dim_v, :dim_v] = inner
    block[dim_v:, dim_v:] = outer
    a = q @ block @ q.T
    while True:
        r = rng.standard_normal((dim_v, dim_v))
        if dim_v == 0 or abs(np.linalg.det(r)) > 0.1:
            break
    b = q[:, :dim_v] @ r
    return 0.5 * (a + a.T), b


def random_augmented_path(rng: np.random.Generator, dim_w: int, dim_v: int,
                          interior: int = 1) -> AugmentedPath:
    """Regular-ended augmented path; interior nodes are unconstrained."""
    a0, b0 = random_regular_end(rng, dim_w, dim_v)
    a1, b1 = random_regular_end(rng, dim_w, dim_v)
    amats = [a0] + [random_symmetric(rng, dim_w) for _ in range(interior)] + [a1]
    bmats = [b0] + [rng.standard_normal((dim_w, dim_v)) for _ in range(interior)] + [b1]
    params = np.linspace(-1.0, 1.0, interior + 2)
    return AugmentedPath.from_samples(SymmetricPath.from_samples(params, np.array(amats)),
                                      np.array(bmats).reshape(len(params), dim_w, dim_v))
