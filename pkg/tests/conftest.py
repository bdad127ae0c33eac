"""Shared seeded instance generators.

Random instances are always built from a full well-conditioned correlation
matrix restricted to a pattern, so every block is PSD by construction and
the partial kernel is guaranteed to admit completions.
"""

import numpy as np
import pytest

from pdcomplete import PartialKernel, validate_junction_tree, validate_serrated
from pdcomplete.graphdomain import pattern_from_blocks


def random_correlation(n, rng):
    """Unit-diagonal SPD matrix with smallest eigenvalue at least 0.3."""
    g = rng.normal(size=(2 * n, n))
    w = g.T @ g / (2 * n)
    d = 1.0 / np.sqrt(np.diag(w))
    c = d[:, None] * w * d[None, :]
    return 0.7 * c + 0.3 * np.eye(n)


def random_interval_blocks(rng, n, m):
    """Interval blocks with nondecreasing starts/ends covering 0..n-1.

    Partitions the points into m consecutive segments and extends each block
    left into its predecessor by a random (possibly zero) overlap.
    """
    if m > 1:
        cuts = np.sort(rng.choice(np.arange(1, n), size=m - 1, replace=False))
    else:
        cuts = np.array([], dtype=int)
    bounds = [0, *[int(c) for c in cuts], n]
    blocks = []
    prev_start = 0
    for k in range(m):
        seg_start, seg_end = bounds[k], bounds[k + 1] - 1
        if k == 0:
            start = 0
        else:
            max_ext = seg_start - prev_start
            start = seg_start - int(rng.integers(0, max_ext + 1))
        blocks.append(tuple(range(start, seg_end + 1)))
        prev_start = start
    return blocks


def random_serrated_instance(seed, n_range=(6, 12), m_range=(3, 5)):
    """Seeded (kernel, cover) pair on a random serrated pattern."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    m = int(rng.integers(m_range[0], min(m_range[1], n - 1) + 1))
    blocks = random_interval_blocks(rng, n, m)
    pattern = pattern_from_blocks(blocks, n)
    cover = validate_serrated(blocks, pattern)
    full = random_correlation(n, rng)
    kern = PartialKernel.from_full(full, pattern)
    return kern, cover


def random_2serrated_instance(seed, n_range=(5, 10)):
    """Seeded two-block instance with a nonempty strict cross region."""
    rng = np.random.default_rng(seed)
    while True:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        split = int(rng.integers(1, n))
        overlap = int(rng.integers(0, min(split, n - split)))
        b1 = tuple(range(0, split))
        b2 = tuple(range(split - overlap, n))
        if set(b1) - set(b2) and set(b2) - set(b1):
            break
    pattern = pattern_from_blocks([b1, b2], n)
    full = random_correlation(n, rng)
    kern = PartialKernel.from_full(full, pattern)
    return kern, b1, b2


def random_tree_instance(seed, m_range=(3, 6)):
    """Seeded (kernel, tree) pair; fresh points keep bag supports connected."""
    rng = np.random.default_rng(seed)
    m = int(rng.integers(m_range[0], m_range[1] + 1))
    parents = [None] + [int(rng.integers(0, i)) for i in range(1, m)]
    next_point = 0
    bags = []
    for i in range(m):
        if i == 0:
            size = int(rng.integers(2, 5))
            bag = list(range(next_point, next_point + size))
            next_point += size
        else:
            parent_bag = bags[parents[i]]
            k = int(rng.integers(1, len(parent_bag) + 1))
            shared = sorted(rng.choice(parent_bag, size=k, replace=False).tolist())
            fresh = int(rng.integers(1, 4))
            bag = shared + list(range(next_point, next_point + fresh))
            next_point += fresh
        bags.append(sorted(bag))
    n = next_point
    edges = [(parents[i], i) for i in range(1, m)]
    pattern = pattern_from_blocks(bags, n)
    tree = validate_junction_tree(bags, edges, pattern)
    full = random_correlation(n, rng)
    kern = PartialKernel.from_full(full, pattern)
    return kern, tree


def ar1_band_instance(n, rho, w=1):
    """Exponential-correlation band: the completion is rho**|i-j| exactly."""
    lag = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    mask = lag <= w
    values = np.where(mask, rho ** lag, 0.0)
    blocks = [tuple(range(t, t + w + 1)) for t in range(n - w)]
    pattern = pattern_from_blocks(blocks, n)
    cover = validate_serrated(blocks, pattern)
    return PartialKernel(pattern, values), cover


@pytest.fixture
def rs_instance():
    """Three points, unit diagonal, K01 = 0.5, K12 = 0.3, corner free."""
    mask = np.array([[1, 1, 0], [1, 1, 1], [0, 1, 1]], dtype=bool)
    vals = np.array([[1.0, 0.5, 0.0], [0.5, 1.0, 0.3], [0.0, 0.3, 1.0]])
    return PartialKernel(mask, vals)
