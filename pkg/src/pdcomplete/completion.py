"""Canonical completion of partially specified kernels.

The canonical completion of a partial kernel on a serrated or junction-tree
domain fills each unspecified pair (x, y) through a separator S:
``K(x, y) = k_{x,S} @ pinv(K_S) @ k_{y,S}``.  It is simultaneously

* the fixed point of merging adjacent blocks two at a time (in any order),
* the completion whose inverse vanishes off the specified pattern,
* the log-determinant maximizer over all completions, and
* the solution of a dual/variational problem in the blockwise norm.

This module computes the completion and everything needed to cross-examine
it: the blockwise precision assembly, completion-value intervals, random
completions from the contraction parametrization, a determinant-maximization
oracle, canonicality diagnostics, and grid-refinement tables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, StructuralError
from .graphdomain import (
    DomainPattern,
    JunctionTree,
    SerratedCover,
    pattern_from_blocks,
    verify_separator,
)
from .kernelcore import (
    PSD_TOL,
    SVD_CUTOFF,
    KernelMatrix,
    RkhsElement,
    _as_symmetric,
    projection_matrix,
    pseudo_inverse,
    psd_check,
    rkhs_norm_sq,
)


class PartialKernel:
    """Real values on a domain pattern, symmetric, zero off the pattern."""

    __slots__ = ("pattern", "values", "labels")

    def __init__(self, pattern, values, labels=None):
        if not isinstance(pattern, DomainPattern):
            pattern = DomainPattern(pattern)
        values = np.asarray(values, dtype=float)
        n = pattern.n
        if values.shape != (n, n):
            raise StructuralError(
                f"values shape {values.shape} does not match pattern n={n}"
            )
        scale = max(1.0, float(np.abs(values).max()))
        asym = np.abs(values - values.T)
        mism = np.argwhere(pattern.mask & (asym > 1e-12 * scale))
        if mism.size:
            i, j = (int(v) for v in mism[0])
            raise StructuralError(
                f"specified values are asymmetric at pair ({i}, {j}): "
                f"{values[i, j]!r} vs {values[j, i]!r}"
            )
        if labels is None:
            labels = tuple(range(n))
        else:
            labels = tuple(labels)
            if len(labels) != n:
                raise StructuralError(f"{len(labels)} labels for n={n}")
        vals = np.where(pattern.mask, values, 0.0)
        vals = 0.5 * (vals + vals.T)
        vals.flags.writeable = False
        object.__setattr__(self, "pattern", pattern)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "labels", labels)

    def __setattr__(self, name, value):
        raise AttributeError("PartialKernel is immutable")

    @property
    def n(self):
        return self.pattern.n

    def __repr__(self):
        return f"PartialKernel(n={self.n})"

    def block(self, idx):
        idx = list(idx)
        if not all(self.pattern.mask[i, j] for i in idx for j in idx):
            raise StructuralError("requested block is not fully specified")
        return self.values[np.ix_(idx, idx)].copy()

    def restrict(self, pattern):
        """Restriction to a sub-pattern (pattern must be contained in ours)."""
        if not self.pattern.contains(pattern):
            raise StructuralError("restriction pattern is not contained in the domain")
        return PartialKernel(pattern, np.where(pattern.mask, self.values, 0.0), self.labels)

    @classmethod
    def from_full(cls, values, pattern, labels=None):
        """Restrict a fully specified matrix to a pattern."""
        if not isinstance(pattern, DomainPattern):
            pattern = DomainPattern(pattern)
        values = _as_symmetric(values)
        return cls(pattern, np.where(pattern.mask, values, 0.0), labels)


@dataclass(frozen=True)
class SeparationCheck:
    """Residual of the separator identity at one certified triple."""

    x: int
    y: int
    separator: tuple
    residual: float


@dataclass(frozen=True)
class CompletionReport:
    """A completion plus the diagnostics used to judge canonicality."""

    completion: KernelMatrix
    min_eig: float
    restriction_residual: float
    inverse_offpattern_residual: float
    logdet: float
    separation_residuals: tuple = ()
    trace_residual: float | None = None
    projection_residual: float | None = None

    def max_separation_residual(self):
        if not self.separation_residuals:
            return 0.0
        return max(c.residual for c in self.separation_residuals)

    def to_dict(self):
        """JSON-ready dictionary (deterministic field order via sort_keys)."""
        d = {
            "min_eig": float(self.min_eig),
            "restriction_residual": float(self.restriction_residual),
            "inverse_offpattern_residual": float(self.inverse_offpattern_residual),
            "logdet": float(self.logdet) if np.isfinite(self.logdet) else "-inf",
            "separation_residuals": [
                {
                    "x": c.x,
                    "y": c.y,
                    "separator": list(c.separator),
                    "residual": float(c.residual),
                }
                for c in self.separation_residuals
            ],
        }
        if self.trace_residual is not None:
            d["trace_residual"] = float(self.trace_residual)
        if self.projection_residual is not None:
            d["projection_residual"] = float(self.projection_residual)
        return d


def _block_psd_or_raise(values, idx, tol, what):
    sub = values[np.ix_(idx, idx)]
    res = psd_check(sub, tol)
    if not res.accepted:
        raise NumericalError(
            f"{what} on points {list(idx)} is not positive semidefinite "
            f"(min eigenvalue {res.min_eig:.6e})"
        )


def _certify(values, labels, tol, cutoff):
    """Certify a completed matrix, mapping rejection to a numerical failure."""
    try:
        return KernelMatrix(values, labels=labels, tol=tol, svd_cutoff=cutoff)
    except StructuralError as exc:
        raise NumericalError(f"completed matrix failed certification: {exc}") from exc


def _cross_fill(values, left, sep, right, cutoff):
    """Separator formula for the cross block; zeros when the separator is empty."""
    if not left or not right:
        return
    li = np.fromiter(left, dtype=int)
    ri = np.fromiter(right, dtype=int)
    if sep:
        si = np.fromiter(sep, dtype=int)
        ks = pseudo_inverse(values[np.ix_(si, si)], cutoff)
        cross = values[np.ix_(li, si)] @ ks @ values[np.ix_(si, ri)]
    else:
        cross = np.zeros((len(li), len(ri)))
    values[np.ix_(li, ri)] = cross
    values[np.ix_(ri, li)] = cross.T


def canonical_2serrated(kern, block1, block2, tol=PSD_TOL, cutoff=SVD_CUTOFF):
    """Canonical completion of a two-block instance.

    The pattern must be exactly ``(X1 x X1) | (X2 x X2)``.  Cross entries are
    filled through the overlap S = X1 & X2; an empty overlap gives a zero
    cross block.  The result restricts to the data and is PSD.
    """
    x1 = sorted(set(int(i) for i in block1))
    x2 = sorted(set(int(i) for i in block2))
    expected = pattern_from_blocks([x1, x2], kern.n)
    if set(x1) | set(x2) != set(range(kern.n)) or expected != kern.pattern:
        raise StructuralError("pattern is not the union of the two block squares")
    _block_psd_or_raise(kern.values, x1, tol, "block 1")
    _block_psd_or_raise(kern.values, x2, tol, "block 2")
    work = kern.values.copy()
    sep = sorted(set(x1) & set(x2))
    left = [i for i in x1 if i not in set(x2)]
    right = [j for j in x2 if j not in set(x1)]
    _cross_fill(work, left, sep, right, cutoff)
    return _certify(work, kern.labels, tol, cutoff)


def _merge_blocks(work, filled, b1, b2, cutoff):
    """Fill the cross region of two blocks in the working matrix, in place.

    The inputs are trusted: data blocks are certified once before the merge
    loop starts, and merged blocks are PSD by construction up to roundoff
    (the final certification catches numerical collapse).
    """
    s1, s2 = set(b1), set(b2)
    sep = sorted(s1 & s2)
    left = [i for i in b1 if i not in s2]
    right = [j for j in b2 if j not in s1]
    if left and right and filled[np.ix_(left, right)].any():
        raise StructuralError("merge would overwrite specified entries")
    _cross_fill(work, left, sep, right, cutoff)
    if left and right:
        filled[np.ix_(left, right)] = True
        filled[np.ix_(right, left)] = True
    return tuple(sorted(s1 | s2))


def _serrated_separation_checks(cover, completion, cutoff):
    """Residual of the separator identity at each consecutive overlap."""
    checks = []
    blocks = [set(b) for b in cover.blocks]
    vals = completion.values
    for i, sep in enumerate(cover.overlaps()):
        left_set = set().union(*blocks[: i + 1]) - set(cover.blocks[i + 1])
        right_set = set().union(*blocks[i + 1 :]) - set(cover.blocks[i])
        left = sorted(left_set - set(sep))
        right = sorted(right_set - set(sep))
        if not left or not right:
            continue
        li = np.fromiter(left, dtype=int)
        ri = np.fromiter(right, dtype=int)
        if sep:
            si = np.fromiter(sep, dtype=int)
            ks = pseudo_inverse(vals[np.ix_(si, si)], cutoff)
            predicted = vals[np.ix_(li, si)] @ ks @ vals[np.ix_(si, ri)]
        else:
            predicted = np.zeros((len(li), len(ri)))
        resid = np.abs(vals[np.ix_(li, ri)] - predicted)
        r, c = np.unravel_index(int(np.argmax(resid)), resid.shape)
        checks.append(
            SeparationCheck(int(li[r]), int(ri[c]), tuple(sep), float(resid[r, c]))
        )
    return tuple(checks)


def _tree_separation_checks(tree, completion, cutoff):
    """Residuals at each tree-edge separator, sides taken from the split tree."""
    checks = []
    vals = completion.values
    for (a, b) in tree.edges:
        sep = tuple(sorted(set(tree.bags[a]) & set(tree.bags[b])))
        side_a = _tree_side(tree, a, b)
        side_b = _tree_side(tree, b, a)
        left = sorted(set().union(*(set(tree.bags[i]) for i in side_a)) - set(sep))
        right = sorted(set().union(*(set(tree.bags[i]) for i in side_b)) - set(sep))
        if not left or not right:
            continue
        li = np.fromiter(left, dtype=int)
        ri = np.fromiter(right, dtype=int)
        if sep:
            si = np.fromiter(sep, dtype=int)
            ks = pseudo_inverse(vals[np.ix_(si, si)], cutoff)
            predicted = vals[np.ix_(li, si)] @ ks @ vals[np.ix_(si, ri)]
        else:
            predicted = np.zeros((len(li), len(ri)))
        resid = np.abs(vals[np.ix_(li, ri)] - predicted)
        r, c = np.unravel_index(int(np.argmax(resid)), resid.shape)
        checks.append(
            SeparationCheck(int(li[r]), int(ri[c]), tuple(sep), float(resid[r, c]))
        )
    return tuple(checks)


def _tree_side(tree, root, banned):
    """Bag indices reachable from ``root`` without crossing edge (root, banned)."""
    reached = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for v in tree.neighbors(u):
            if {u, v} == {root, banned} or v in reached:
                continue
            reached.add(v)
            stack.append(v)
    return reached


def _build_report(kern, completion, checks):
    vals = completion.values
    mask = kern.pattern.mask
    restrict = float(np.abs((vals - kern.values))[mask].max()) if mask.any() else 0.0
    pinv = completion.pinv()
    off = ~mask
    denom = max(float(np.abs(pinv).max()), 1e-300)
    inv_off = float(np.abs(pinv[off]).max()) / denom if off.any() else 0.0
    return CompletionReport(
        completion=completion,
        min_eig=completion.psd_margin,
        restriction_residual=restrict,
        inverse_offpattern_residual=inv_off,
        logdet=completion.logdet(),
        separation_residuals=checks,
    )


def canonical_serrated(kern, cover, order="left", tol=PSD_TOL, cutoff=SVD_CUTOFF):
    """Canonical completion on a serrated domain by iterated two-block merges.

    Adjacent blocks are merged until the matrix is full; the result does not
    depend on the order (``order`` picks "left" or "right" sweeps, which is a
    tested property rather than an assumption).  Returns a
    :class:`CompletionReport` with restriction, inverse-zero, log-determinant
    and separator diagnostics.
    """
    if not isinstance(cover, SerratedCover):
        raise StructuralError("cover must be a validated SerratedCover")
    if cover.pattern() != kern.pattern:
        raise StructuralError("cover does not induce the kernel's pattern")
    if order not in ("left", "right"):
        raise StructuralError(f"unknown merge order {order!r}")
    for k, b in enumerate(cover.blocks):
        _block_psd_or_raise(kern.values, list(b), tol, f"cover block {k}")
    work = kern.values.copy()
    filled = kern.pattern.mask.copy()
    blocks = [tuple(b) for b in cover.blocks]
    while len(blocks) > 1:
        i = 0 if order == "left" else len(blocks) - 2
        merged = _merge_blocks(work, filled, blocks[i], blocks[i + 1], cutoff)
        blocks[i : i + 2] = [merged]
    completion = _certify(work, kern.labels, tol, cutoff)
    checks = _serrated_separation_checks(cover, completion, cutoff)
    return _build_report(kern, completion, checks)


def canonical_junction_tree(kern, tree, tol=PSD_TOL, cutoff=SVD_CUTOFF):
    """Canonical completion on a junction-tree domain by edge contraction.

    Leaves are merged into their neighbors (smallest leaf index first) until
    one bag remains; each contraction is a two-block fill through the edge
    separator.  Path trees reproduce the serrated result exactly.
    """
    if not isinstance(tree, JunctionTree):
        raise StructuralError("tree must be a validated JunctionTree")
    if tree.pattern() != kern.pattern:
        raise StructuralError("tree does not induce the kernel's pattern")
    for k, b in enumerate(tree.bags):
        _block_psd_or_raise(kern.values, list(b), tol, f"bag {k}")
    work = kern.values.copy()
    filled = kern.pattern.mask.copy()
    bags = {i: tuple(b) for i, b in enumerate(tree.bags)}
    adj = {i: set(tree.neighbors(i)) for i in range(len(tree.bags))}
    while len(bags) > 1:
        leaf = min(i for i in bags if len(adj[i]) == 1)
        parent = next(iter(adj[leaf]))
        merged = _merge_blocks(work, filled, bags[parent], bags[leaf], cutoff)
        bags[parent] = merged
        adj[parent].discard(leaf)
        del bags[leaf], adj[leaf]
    completion = _certify(work, kern.labels, tol, cutoff)
    checks = _tree_separation_checks(tree, completion, cutoff)
    return _build_report(kern, completion, checks)


def precision_assembly(kern, cover, tol=PSD_TOL, cutoff=SVD_CUTOFF):
    """Blockwise precision matrix: sum of padded block pseudoinverses.

    ``Q = sum_k pad(pinv(A_k)) - sum_k pad(pinv(A_{k,k+1}))`` over the cover
    blocks and their consecutive overlaps.  Entries outside the pattern are
    exactly zero by construction; when the canonical completion is
    nonsingular, ``Q`` is its inverse.
    """
    if not isinstance(cover, SerratedCover):
        raise StructuralError("cover must be a validated SerratedCover")
    if cover.pattern() != kern.pattern:
        raise StructuralError("cover does not induce the kernel's pattern")
    n = kern.n
    q = np.zeros((n, n))
    for b in cover.blocks:
        idx = list(b)
        _block_psd_or_raise(kern.values, idx, tol, "cover block")
        q[np.ix_(idx, idx)] += pseudo_inverse(kern.values[np.ix_(idx, idx)], cutoff)
    for sep in cover.overlaps():
        if not sep:
            continue
        idx = list(sep)
        q[np.ix_(idx, idx)] -= pseudo_inverse(kern.values[np.ix_(idx, idx)], cutoff)
    return q


def canonical_norm_sq(f, kern, cover, cutoff=SVD_CUTOFF):
    """Squared norm of a value vector in the completed kernel's space.

    Evaluated blockwise: sum of subkernel norms over the cover blocks minus
    the norms over consecutive overlaps; equal to ``f @ pinv(K*) @ f``.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (kern.n,):
        raise StructuralError(f"value vector shape {f.shape} for n={kern.n}")
    if not isinstance(cover, SerratedCover):
        raise StructuralError("cover must be a validated SerratedCover")
    total = 0.0
    for b in cover.blocks:
        idx = list(b)
        total += rkhs_norm_sq(f[idx], kern.values[np.ix_(idx, idx)], cutoff)
    for sep in cover.overlaps():
        if not sep:
            continue
        idx = list(sep)
        total -= rkhs_norm_sq(f[idx], kern.values[np.ix_(idx, idx)], cutoff)
    return float(total)


def canonical_via_duality(kern, cover, x, y, tol=PSD_TOL, cutoff=SVD_CUTOFF):
    """Completion entry (x, y) recomputed through the dual problem.

    Maximizes ``f(x) + f(y) - 0.5 * ||f||^2`` in the blockwise norm by
    solving ``Q f = e_x + e_y`` with the assembled precision, then returns
    ``-0.5 * (K(x,x) + K(y,y)) + 0.5 * (e_x + e_y) @ f``.
    """
    x, y = int(x), int(y)
    q = precision_assembly(kern, cover, tol, cutoff)
    b = np.zeros(kern.n)
    b[x] += 1.0
    b[y] += 1.0
    f, *_ = np.linalg.lstsq(q, b, rcond=None)
    resid = float(np.linalg.norm(q @ f - b))
    if resid > 1e-8 * float(np.linalg.norm(b)):
        raise NumericalError(
            f"dual system is degenerate at ({x}, {y}): residual {resid:.3e}"
        )
    best = 0.5 * float(b @ f)
    return -0.5 * (kern.values[x, x] + kern.values[y, y]) + best


def generator_variational(kernel, x):
    """Recover the generator k_x as the minimizer of ``||f||^2 - 2 f(x)``.

    Solved through the normal equation ``K a = K e_x`` in coefficient
    coordinates; the minimizer is k_x itself.
    """
    x = int(x)
    if not 0 <= x < kernel.n:
        raise StructuralError(f"point {x} outside the kernel")
    rhs = kernel.values[:, x]
    alpha = kernel.pinv() @ rhs
    return RkhsElement(kernel, alpha)


def _schur_diag(values, point, sep, cutoff):
    """Diagonal Schur-complement value (K_block / K_sep)(point, point) >= 0."""
    if not sep:
        return max(float(values[point, point]), 0.0)
    si = np.fromiter(sep, dtype=int)
    ks = pseudo_inverse(values[np.ix_(si, si)], cutoff)
    v = values[point, si]
    return max(float(values[point, point] - v @ ks @ v), 0.0)


def completion_interval_2serrated(kern, block1, block2, x, y, cutoff=SVD_CUTOFF):
    """Exact feasible interval for a cross entry of a two-block instance.

    The interval is ``center +/- ||p_x|| * ||q_y||`` where the center is the
    canonical value through the overlap and the radii are the diagonal Schur
    complements of the two blocks over the overlap.  Endpoints are attained
    by rank-one contractions; a vanishing radius means the entry is forced.
    """
    x1 = sorted(set(int(i) for i in block1))
    x2 = sorted(set(int(i) for i in block2))
    x, y = int(x), int(y)
    s1, s2 = set(x1), set(x2)
    if not (x in s1 - s2 and y in s2 - s1):
        raise StructuralError(
            f"entry ({x}, {y}) must pair a point of X1\\X2 with one of X2\\X1"
        )
    sep = sorted(s1 & s2)
    vals = kern.values
    if sep:
        si = np.fromiter(sep, dtype=int)
        ks = pseudo_inverse(vals[np.ix_(si, si)], cutoff)
        center = float(vals[x, si] @ ks @ vals[si, y])
    else:
        center = 0.0
    p_norm = np.sqrt(_schur_diag(vals, x, sep, cutoff))
    q_norm = np.sqrt(_schur_diag(vals, y, sep, cutoff))
    radius = float(p_norm * q_norm)
    return center - radius, center + radius


def feasible_interval_single_entry(kern, x, y, n_iter=300):
    """Feasible values of the one unspecified entry, by eigenvalue bisection.

    The candidate range is the Cauchy-Schwarz box
    ``[-sqrt(Kxx*Kyy), +sqrt(Kxx*Kyy)]``; the minimum eigenvalue is concave
    in the entry, so a ternary search locates its maximizer and bisection
    finds both sign crossings to absolute tolerance ``1e-9 * scale``.
    Feasibility is judged at roundoff level (not the looser kernel
    acceptance tolerance), so boundary crossings are sharp; when even the
    best entry only reaches a zero minimum eigenvalue the feasible set is a
    single point and the interval collapses.
    """
    x, y = int(x), int(y)
    expected_missing = {(min(x, y), max(x, y))}
    missing = set(kern.pattern.unspecified_pairs())
    if missing != expected_missing:
        raise StructuralError(
            f"exactly the pair ({x}, {y}) must be unspecified, found {sorted(missing)}"
        )
    base = kern.values.copy()
    bound = float(np.sqrt(max(base[x, x] * base[y, y], 0.0)))
    scale = max(1.0, float(np.abs(base).max()))
    tol_c = 1e-9 * scale
    eig_floor = 64.0 * np.finfo(float).eps * base.shape[0]

    def min_eig(c):
        m = base.copy()
        m[x, y] = m[y, x] = c
        return float(np.linalg.eigvalsh(m)[0])

    def feasible(c):
        m = base.copy()
        m[x, y] = m[y, x] = c
        w = np.linalg.eigvalsh(m)
        return w[0] >= -eig_floor * max(1.0, float(w[-1]))

    if bound == 0.0:
        if not feasible(0.0):
            raise NumericalError("no feasible completion value at the degenerate entry")
        return 0.0, 0.0
    lo, hi = -bound, bound
    for _ in range(n_iter):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if min_eig(m1) < min_eig(m2):
            lo = m1
        else:
            hi = m2
        # run to machine resolution: at a tent-shaped optimum (forced entry)
        # the best eigenvalue is only as good as the bracket is narrow
        if hi - lo < 4.0 * np.finfo(float).eps * max(1.0, bound):
            break
    c0 = 0.5 * (lo + hi)
    best = min_eig(c0)
    floor = eig_floor * max(1.0, scale)
    if best < -floor:
        raise NumericalError(
            f"no feasible value for entry ({x}, {y}) in [-{bound:.6g}, {bound:.6g}]"
        )
    if best <= floor:
        # the optimum is singular: a unique completion value
        return float(c0), float(c0)

    def boundary(inside, outside):
        if feasible(outside):
            return outside
        a, b = outside, inside
        while abs(b - a) > tol_c:
            mid = 0.5 * (a + b)
            if feasible(mid):
                b = mid
            else:
                a = mid
        return b

    left = boundary(c0, -bound)
    right = boundary(c0, bound)
    return float(left), float(right)


def _psd_factor(values, cutoff):
    """Factor L with ``values = L @ L.T``, columns spanning the range."""
    vals = _as_symmetric(values)
    if vals.size == 0:
        return np.zeros((0, 0))
    w, v = np.linalg.eigh(vals)
    thresh = cutoff * max(float(w[-1]), 0.0)
    keep = w > thresh
    return v[:, keep] * np.sqrt(w[keep])


def completion_from_contraction(kern, block1, block2, psi, tol=PSD_TOL, cutoff=SVD_CUTOFF):
    """Completion of a two-block instance from a contraction parameter.

    ``psi`` is a matrix of operator norm <= 1 in the whitened coordinates of
    the two Schur-complement factors (shape rank1 x rank2); ``psi = 0`` gives
    the canonical completion and rank-one extremes attain interval endpoints.
    """
    x1 = sorted(set(int(i) for i in block1))
    x2 = sorted(set(int(i) for i in block2))
    expected = pattern_from_blocks([x1, x2], kern.n)
    if set(x1) | set(x2) != set(range(kern.n)) or expected != kern.pattern:
        raise StructuralError("pattern is not the union of the two block squares")
    s1, s2 = set(x1), set(x2)
    sep = sorted(s1 & s2)
    left = [i for i in x1 if i not in s2]
    right = [j for j in x2 if j not in s1]
    vals = kern.values
    work = vals.copy()
    if left and right:
        li = np.fromiter(left, dtype=int)
        ri = np.fromiter(right, dtype=int)
        if sep:
            si = np.fromiter(sep, dtype=int)
            ks = pseudo_inverse(vals[np.ix_(si, si)], cutoff)
            center = vals[np.ix_(li, si)] @ ks @ vals[np.ix_(si, ri)]
            c1 = vals[np.ix_(li, li)] - vals[np.ix_(li, si)] @ ks @ vals[np.ix_(si, li)]
            c2 = vals[np.ix_(ri, ri)] - vals[np.ix_(ri, si)] @ ks @ vals[np.ix_(si, ri)]
        else:
            center = np.zeros((len(li), len(ri)))
            c1 = vals[np.ix_(li, li)].copy()
            c2 = vals[np.ix_(ri, ri)].copy()
        l1 = _psd_factor(c1, cutoff)
        l2 = _psd_factor(c2, cutoff)
        psi = np.zeros((l1.shape[1], l2.shape[1])) if psi is None else np.asarray(psi, float)
        if psi.shape != (l1.shape[1], l2.shape[1]):
            raise StructuralError(
                f"contraction shape {psi.shape}, expected {(l1.shape[1], l2.shape[1])}"
            )
        if psi.size and float(np.linalg.norm(psi, 2)) > 1.0 + 1e-12:
            raise StructuralError("contraction parameter has operator norm above 1")
        cross = center + l1 @ psi @ l2.T
        work[np.ix_(li, ri)] = cross
        work[np.ix_(ri, li)] = cross.T
    return _certify(work, kern.labels, tol, cutoff)


def sample_completion(kern, block1, block2, seed, tol=PSD_TOL, cutoff=SVD_CUTOFF):
    """Seed-deterministic random completion of a two-block instance.

    Draws a standard-normal matrix in the whitened Schur coordinates, scales
    it to operator norm ``u * (1 - 1e-6)`` with ``u`` uniform on [0, 1]
    (strictly inside the contraction ball), and assembles the completion;
    the output is always PSD.
    """
    x1 = sorted(set(int(i) for i in block1))
    x2 = sorted(set(int(i) for i in block2))
    s1, s2 = set(x1), set(x2)
    sep = sorted(s1 & s2)
    left = [i for i in x1 if i not in s2]
    right = [j for j in x2 if j not in s1]
    vals = kern.values
    if sep:
        si = np.fromiter(sep, dtype=int)
        ks = pseudo_inverse(vals[np.ix_(si, si)], cutoff)
    rng = np.random.default_rng(seed)
    u = float(rng.uniform())
    if left and right:
        li = np.fromiter(left, dtype=int)
        ri = np.fromiter(right, dtype=int)
        if sep:
            c1 = vals[np.ix_(li, li)] - vals[np.ix_(li, si)] @ ks @ vals[np.ix_(si, li)]
            c2 = vals[np.ix_(ri, ri)] - vals[np.ix_(ri, si)] @ ks @ vals[np.ix_(si, ri)]
        else:
            c1 = vals[np.ix_(li, li)].copy()
            c2 = vals[np.ix_(ri, ri)].copy()
        r1 = _psd_factor(c1, cutoff).shape[1]
        r2 = _psd_factor(c2, cutoff).shape[1]
    else:
        r1 = r2 = 0
    if r1 and r2:
        g = rng.normal(size=(r1, r2))
        norm = float(np.linalg.norm(g, 2))
        psi = g * (u * (1.0 - 1e-6) / norm) if norm > 0 else g
    else:
        psi = np.zeros((r1, r2))
    return completion_from_contraction(kern, x1, x2, psi, tol, cutoff)


def maxdet_oracle(kern, iters=200, tol=1e-12):
    """Determinant-maximizing completion by cyclic coordinate ascent.

    Works on any finite pattern.  Each sweep sets every free entry to the
    value that zeroes the corresponding inverse entry (the exact
    one-dimensional log-determinant maximizer); a diagonal inflation is used
    to reach a strictly positive starting point and is driven back to zero
    as the iterate gains eigenvalue margin.  Fails when no strictly
    positive-definite completion is reachable.
    """
    free = kern.pattern.unspecified_pairs()
    n = kern.n
    scale = max(1.0, float(np.abs(kern.values).max()))
    if not free:
        return KernelMatrix(kern.values, labels=kern.labels)
    work = kern.values.copy()
    w0 = float(np.linalg.eigvalsh(work)[0])
    mu = 0.0 if w0 > 1e-8 * scale else -w0 + 1e-2 * scale
    work[np.diag_indices(n)] += mu
    all_idx = np.arange(n)
    for _ in range(int(iters)):
        delta = 0.0
        for (i, j) in free:
            rest = np.concatenate([all_idx[:i], all_idx[i + 1 : j], all_idx[j + 1 :]])
            sub = work[np.ix_(rest, rest)]
            try:
                t = float(work[i, rest] @ np.linalg.solve(sub, work[rest, j]))
            except np.linalg.LinAlgError as exc:
                raise NumericalError(
                    f"lost positive definiteness while updating entry ({i}, {j})"
                ) from exc
            delta = max(delta, abs(t - work[i, j]))
            work[i, j] = work[j, i] = t
        if mu > 0.0:
            lam = float(np.linalg.eigvalsh(work)[0])
            drop = min(mu, 0.5 * lam)
            if drop <= 1e-15 * scale:
                raise NumericalError(
                    "cannot remove the diagonal inflation: the pattern admits "
                    "no strictly positive-definite completion"
                )
            mu -= drop
            work[np.diag_indices(n)] -= drop
            continue
        if delta < tol * scale:
            return KernelMatrix(work, labels=kern.labels)
    raise NumericalError(f"no convergence after {iters} sweeps (last change {delta:.3e})")


def verify_canonical(completion, pattern, cover_or_tree=None, n_checks=50, seed=0,
                     reference=None, cutoff=SVD_CUTOFF):
    """Diagnostics for how canonical a claimed completion is.

    Reports (never judges): the normalized maximum inverse entry off the
    pattern, separator-identity residuals at ``n_checks`` seeded random
    certified triples, the trace pairing against random symmetric matrices
    vanishing on the pattern, the blockwise projection identity when a cover
    or tree is supplied, and the log-determinant.
    """
    if not isinstance(completion, KernelMatrix):
        completion = KernelMatrix(completion)
    if pattern.n != completion.n:
        raise StructuralError("pattern size does not match the completion")
    vals = completion.values
    mask = pattern.mask
    rng = np.random.default_rng(seed)

    if reference is not None:
        if reference.n != completion.n:
            raise StructuralError("reference size does not match the completion")
        restrict = float(np.abs(vals - reference.values)[reference.pattern.mask].max())
    else:
        restrict = 0.0

    pinv = completion.pinv()
    off = ~mask
    denom = max(float(np.abs(pinv).max()), 1e-300)
    inv_off = float(np.abs(pinv[off]).max()) / denom if off.any() else 0.0

    checks = []
    nonadj = pattern.unspecified_pairs()
    if nonadj:
        attempts = 0
        while len(checks) < int(n_checks) and attempts < 50 * int(n_checks):
            attempts += 1
            x, y = nonadj[int(rng.integers(len(nonadj)))]
            if rng.random() < 0.5:
                x, y = y, x
            base = set(pattern.neighbors(x)) - {y}
            others = [v for v in range(pattern.n) if v not in base | {x, y}]
            extra = {v for v in others if rng.random() < 0.3}
            sep = tuple(sorted(base | extra))
            if not verify_separator(pattern, sep, x, y):
                continue
            if sep:
                si = np.fromiter(sep, dtype=int)
                ks = pseudo_inverse(vals[np.ix_(si, si)], cutoff)
                predicted = float(vals[x, si] @ ks @ vals[si, y])
            else:
                predicted = 0.0
            checks.append(SeparationCheck(x, y, sep, abs(float(vals[x, y]) - predicted)))

    if off.any():
        worst = 0.0
        pinv_norm = float(np.linalg.norm(pinv))
        for _ in range(int(n_checks)):
            p = np.zeros_like(vals)
            iu = np.triu_indices(pattern.n, k=1)
            draws = rng.normal(size=len(iu[0]))
            p[iu] = np.where(off[iu], draws, 0.0)
            p = p + p.T
            pnorm = float(np.linalg.norm(p))
            if pnorm == 0.0:
                continue
            worst = max(worst, abs(float(np.sum(pinv * p))) / (max(pinv_norm, 1e-300) * pnorm))
        trace_residual = worst
    else:
        trace_residual = 0.0

    projection_residual = None
    if cover_or_tree is not None:
        if isinstance(cover_or_tree, SerratedCover):
            parts = [list(b) for b in cover_or_tree.blocks]
            seps = [list(s) for s in cover_or_tree.overlaps() if s]
        elif isinstance(cover_or_tree, JunctionTree):
            parts = [list(b) for b in cover_or_tree.bags]
            seps = [list(s) for s in cover_or_tree.separators() if s]
        else:
            raise StructuralError("cover_or_tree must be a SerratedCover or JunctionTree")
        op = -np.eye(completion.n)
        for b in parts:
            op += projection_matrix(completion, b)
        for s in seps:
            op -= projection_matrix(completion, s)
        scale = max(1.0, float(np.abs(vals).max()))
        projection_residual = float(np.abs(op @ vals).max()) / scale

    return CompletionReport(
        completion=completion,
        min_eig=completion.psd_margin,
        restriction_residual=restrict,
        inverse_offpattern_residual=inv_off,
        logdet=completion.logdet(),
        separation_residuals=tuple(checks),
        trace_residual=trace_residual,
        projection_residual=projection_residual,
    )


@dataclass(frozen=True)
class RefinementLevel:
    """One rung of a nested-cover refinement ladder."""

    index: int
    n_blocks: int
    completion: KernelMatrix
    diff_from_prev: float | None


@dataclass(frozen=True)
class RefinementTable:
    """Completions along nested covers and their consecutive sup-differences."""

    levels: tuple

    @property
    def diffs(self):
        return [lv.diff_from_prev for lv in self.levels[1:]]

    @property
    def final_gap(self):
        diffs = self.diffs
        return diffs[-1] if diffs else 0.0

    def monotone_within_slack(self, slack=0.1, floor=64.0 * np.finfo(float).eps):
        """Non-increasing consecutive differences, up to the slack factor.

        Differences at or below ``floor`` count as ties: a ladder that has
        already converged to roundoff cannot violate the trend.
        """
        diffs = self.diffs
        return all(b <= max((1.0 + slack) * a, floor) for a, b in zip(diffs, diffs[1:]))

    def to_dict(self):
        return {
            "levels": [
                {
                    "index": lv.index,
                    "n_blocks": lv.n_blocks,
                    "diff_from_prev": None if lv.diff_from_prev is None else float(lv.diff_from_prev),
                }
                for lv in self.levels
            ],
            "final_gap": float(self.final_gap),
            "monotone_within_slack": bool(self.monotone_within_slack()),
        }


def refine_serrated(kern, covers, tol=PSD_TOL, cutoff=SVD_CUTOFF):
    """Canonical completions along a nested ladder of serrated sub-domains.

    Every cover must induce a sub-pattern of the previous one's superset
    chain ending inside the kernel's own pattern; the table records the
    maximum entrywise difference between consecutive completions.
    """
    if not covers:
        raise StructuralError("at least one cover is required")
    levels = []
    prev_pattern = None
    prev_completion = None
    for idx, cover in enumerate(covers):
        pat = cover.pattern()
        if not kern.pattern.contains(pat):
            raise StructuralError(f"cover {idx} exceeds the kernel's domain")
        if prev_pattern is not None and not pat.contains(prev_pattern):
            raise StructuralError(f"cover {idx} is not a refinement of cover {idx - 1}")
        level_kern = PartialKernel(pat, np.where(pat.mask, kern.values, 0.0), kern.labels)
        report = canonical_serrated(level_kern, cover, tol=tol, cutoff=cutoff)
        comp = report.completion
        diff = None
        if prev_completion is not None:
            diff = float(np.abs(comp.values - prev_completion.values).max())
        levels.append(RefinementLevel(idx, len(cover.blocks), comp, diff))
        prev_pattern = pat
        prev_completion = comp
    return RefinementTable(tuple(levels))
