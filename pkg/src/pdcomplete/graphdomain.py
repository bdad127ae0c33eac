"""Domains as graphs: serrated covers, junction trees, separators.

A domain is a symmetric boolean mask over a finite point set that contains
the diagonal; viewed as a graph, the specified pairs are the edges.  Covers
and trees are stored as sorted index tuples.  Validation is explicit and
certifiable: separator queries run a breadth-first search rather than any
algebraic shortcut, and violations are reported with the offending indices.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .errors import StructuralError


class DomainPattern:
    """Symmetric boolean specification mask containing the diagonal."""

    __slots__ = ("mask",)

    def __init__(self, mask):
        mask = np.asarray(mask, dtype=bool).copy()
        if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
            raise StructuralError(f"mask must be square, got shape {mask.shape}")
        bad = np.argwhere(mask != mask.T)
        if bad.size:
            i, j = (int(v) for v in bad[0])
            raise StructuralError(f"mask is asymmetric at pair ({i}, {j})")
        missing = np.flatnonzero(~np.diagonal(mask))
        if missing.size:
            raise StructuralError(f"mask misses diagonal entry ({int(missing[0])}, {int(missing[0])})")
        mask.flags.writeable = False
        object.__setattr__(self, "mask", mask)

    def __setattr__(self, name, value):
        raise AttributeError("DomainPattern is immutable")

    @property
    def n(self):
        return self.mask.shape[0]

    def __eq__(self, other):
        return isinstance(other, DomainPattern) and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash((self.n, self.mask.tobytes()))

    def __repr__(self):
        filled = int(self.mask.sum())
        return f"DomainPattern(n={self.n}, specified={filled}/{self.n * self.n})"

    def is_full(self):
        return bool(self.mask.all())

    def neighbors(self, x):
        """Adjacent vertices of x (excluding x itself)."""
        row = np.flatnonzero(self.mask[x])
        return [int(j) for j in row if j != x]

    def unspecified_pairs(self):
        """Upper-triangular (i, j) pairs with i < j that are not specified."""
        iu, ju = np.where(~self.mask)
        return [(int(i), int(j)) for i, j in zip(iu, ju) if i < j]

    def contains(self, other):
        """True if every pair specified in ``other`` is specified here."""
        return bool(np.all(self.mask | ~other.mask))


def validate_domain(mask):
    """Accept a square boolean mask as a domain pattern or raise."""
    return DomainPattern(mask)


def pattern_from_blocks(blocks, n):
    """Mask of the union of the diagonal squares ``block x block``."""
    mask = np.eye(n, dtype=bool)
    for b in blocks:
        idx = np.fromiter(b, dtype=int)
        mask[np.ix_(idx, idx)] = True
    return DomainPattern(mask)


def _normalize_blocks(blocks, n):
    norm = []
    for k, b in enumerate(blocks):
        b = tuple(sorted(set(int(i) for i in b)))
        if not b:
            raise StructuralError(f"block {k} is empty")
        if b[0] < 0 or b[-1] >= n:
            raise StructuralError(f"block {k} contains indices outside 0..{n - 1}")
        norm.append(b)
    return norm


class SerratedCover:
    """Ordered block subsets with the running-intersection property.

    Parametrizes serrated domains: the induced pattern is the union of the
    diagonal squares of the blocks.  Construct through
    :func:`validate_serrated` or :func:`band_cover`.
    """

    __slots__ = ("blocks", "n")

    def __init__(self, blocks, n):
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in blocks))
        object.__setattr__(self, "n", int(n))

    def __setattr__(self, name, value):
        raise AttributeError("SerratedCover is immutable")

    def __repr__(self):
        return f"SerratedCover(n={self.n}, blocks={len(self.blocks)})"

    def __len__(self):
        return len(self.blocks)

    def pattern(self):
        return pattern_from_blocks(self.blocks, self.n)

    def overlaps(self):
        """Consecutive intersections X_j cap X_{j+1} (may be empty tuples)."""
        out = []
        for a, b in zip(self.blocks, self.blocks[1:]):
            out.append(tuple(sorted(set(a) & set(b))))
        return out

    def to_junction_tree(self):
        """Lossless conversion to a path-shaped junction tree."""
        edges = [(i, i + 1) for i in range(len(self.blocks) - 1)]
        return JunctionTree(self.blocks, edges, self.n)


def validate_serrated(blocks, pattern):
    """Check the serrated-cover conditions against a domain pattern.

    Conditions: the blocks cover all points, every triple i < j < k satisfies
    ``X_i & X_k <= X_i & X_j`` (running intersection, checked exhaustively),
    and the union of the block squares reproduces ``pattern`` exactly.
    """
    if not blocks:
        raise StructuralError("cover must contain at least one block")
    n = pattern.n
    norm = _normalize_blocks(blocks, n)
    union = set().union(*(set(b) for b in norm))
    if union != set(range(n)):
        missing = sorted(set(range(n)) - union)
        raise StructuralError(f"blocks do not cover points {missing}")
    sets = [set(b) for b in norm]
    m = len(sets)
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                extra = (sets[i] & sets[k]) - (sets[i] & sets[j])
                if extra:
                    raise StructuralError(
                        f"running intersection violated at triple ({i}, {j}, {k}): "
                        f"point {min(extra)} is in blocks {i} and {k} but not in "
                        f"their intersection with block {j}"
                    )
    induced = pattern_from_blocks(norm, n)
    if induced != pattern:
        diff = np.argwhere(induced.mask != pattern.mask)
        i, j = (int(v) for v in diff[0])
        raise StructuralError(
            f"cover-induced pattern disagrees with the domain at pair ({i}, {j})"
        )
    return SerratedCover(norm, n)


class JunctionTree:
    """Bags plus tree edges with the junction property along paths."""

    __slots__ = ("bags", "edges", "n")

    def __init__(self, bags, edges, n):
        object.__setattr__(self, "bags", tuple(tuple(b) for b in bags))
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in edges))
        object.__setattr__(self, "n", int(n))

    def __setattr__(self, name, value):
        raise AttributeError("JunctionTree is immutable")

    def __repr__(self):
        return f"JunctionTree(n={self.n}, bags={len(self.bags)})"

    def pattern(self):
        return pattern_from_blocks(self.bags, self.n)

    def neighbors(self, i):
        out = []
        for a, b in self.edges:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return sorted(out)

    def path(self, i, k):
        """Vertex sequence of the unique i-k path (inclusive)."""
        if i == k:
            return [i]
        prev = {i: None}
        queue = deque([i])
        while queue:
            u = queue.popleft()
            for v in self.neighbors(u):
                if v not in prev:
                    prev[v] = u
                    if v == k:
                        queue.clear()
                        break
                    queue.append(v)
        if k not in prev:
            raise StructuralError(f"bags {i} and {k} are not connected")
        path = [k]
        while prev[path[-1]] is not None:
            path.append(prev[path[-1]])
        return path[::-1]

    def separators(self):
        """Bag intersections along the tree edges."""
        return [tuple(sorted(set(self.bags[a]) & set(self.bags[b]))) for a, b in self.edges]


def _check_tree(n_bags, edges):
    if len(edges) != n_bags - 1:
        raise StructuralError(
            f"{len(edges)} edges on {n_bags} bags do not form a tree"
        )
    seen = set()
    adj = {i: [] for i in range(n_bags)}
    for a, b in edges:
        if a == b:
            raise StructuralError(f"self-loop at bag {a}")
        if not (0 <= a < n_bags and 0 <= b < n_bags):
            raise StructuralError(f"edge ({a}, {b}) references a missing bag")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise StructuralError(f"duplicate edge ({a}, {b})")
        seen.add(key)
        adj[a].append(b)
        adj[b].append(a)
    if n_bags == 0:
        raise StructuralError("a junction tree needs at least one bag")
    reached = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in reached:
                reached.add(v)
                queue.append(v)
    if len(reached) != n_bags:
        raise StructuralError("tree edges leave some bags disconnected")


def validate_junction_tree(bags, edges, pattern):
    """Check junction-tree conditions against a domain pattern.

    The edges must form a tree and for every pair of bags (i, k) the
    intersection ``X_i & X_k`` must be contained in every bag along the
    unique i-k path; the bags must cover all points and induce ``pattern``.
    """
    if not bags:
        raise StructuralError("a junction tree needs at least one bag")
    n = pattern.n
    norm = _normalize_blocks(bags, n)
    edges = [(int(a), int(b)) for a, b in edges]
    _check_tree(len(norm), edges)
    union = set().union(*(set(b) for b in norm))
    if union != set(range(n)):
        missing = sorted(set(range(n)) - union)
        raise StructuralError(f"bags do not cover points {missing}")
    tree = JunctionTree(norm, edges, n)
    sets = [set(b) for b in norm]
    m = len(norm)
    for i in range(m):
        for k in range(i + 1, m):
            inter = sets[i] & sets[k]
            if not inter:
                continue
            for j in tree.path(i, k)[1:-1]:
                if not inter <= sets[j]:
                    raise StructuralError(
                        f"junction property violated at ({i}, {j}, {k}): "
                        f"bags {i} and {k} share point {min(inter - sets[j])} "
                        f"missing from bag {j} on their path"
                    )
    induced = tree.pattern()
    if induced != pattern:
        diff = np.argwhere(induced.mask != pattern.mask)
        i, j = (int(v) for v in diff[0])
        raise StructuralError(
            f"bag-induced pattern disagrees with the domain at pair ({i}, {j})"
        )
    return tree


def verify_separator(pattern, separator, x, y):
    """True iff every path between x and y in the pattern graph meets the set.

    Disconnected points are separated by the empty set.  Computed by
    breadth-first search on the graph with the separator removed.
    """
    n = pattern.n
    s = set(int(i) for i in separator)
    x, y = int(x), int(y)
    if x in s or y in s:
        raise StructuralError("separator must not contain the endpoints")
    if not (0 <= x < n and 0 <= y < n):
        raise StructuralError("endpoint outside the pattern")
    if x == y:
        return False
    reached = {x}
    queue = deque([x])
    while queue:
        u = queue.popleft()
        for v in pattern.neighbors(u):
            if v in s or v in reached:
                continue
            if v == y:
                return False
            reached.add(v)
            queue.append(v)
    return True


def band_cover(n_points, half_bandwidth):
    """Sliding-window cover {t, ..., t + w} for t = 0..n-w-1."""
    return strided_band_cover(n_points, half_bandwidth, 1)


def strided_band_cover(n_points, half_bandwidth, stride):
    """Band blocks of width w+1 whose starts advance by ``stride``.

    The final block is pinned to end at the last point so the cover always
    reaches it.  Consecutive interval blocks sorted by start and end satisfy
    the running-intersection property automatically; coarser strides give
    nested sub-patterns of the full band (stride 1).
    """
    n = int(n_points)
    w = int(half_bandwidth)
    stride = int(stride)
    if not 1 <= w < n:
        raise StructuralError(f"half bandwidth {w} out of range for n={n}")
    if stride < 1:
        raise StructuralError(f"stride must be positive, got {stride}")
    if stride > w + 1:
        raise StructuralError(
            f"stride {stride} leaves gaps between blocks of width {w + 1}"
        )
    starts = list(range(0, n - w, stride))
    if not starts or starts[-1] != n - w - 1:
        starts.append(n - w - 1)
    blocks = [tuple(range(t, t + w + 1)) for t in starts]
    return SerratedCover(blocks, n)
