"""Dense symmetric kernel-matrix substrate.

Everything downstream (completions, intervals, semigroups) reduces to a small
set of operations on symmetric positive-semidefinite matrices: certification,
tolerance-controlled pseudoinversion, quadratic forms in the kernel metric,
Schur complements, orthogonal projections onto generator subspaces, and the
generator-to-generator contraction maps evaluated in Gram coordinates.

Conventions
-----------
* Matrices are dense float64 ``ndarray``s; points are 0-based integer indices.
* A vector ``f`` of function values belongs to the space of a kernel ``K``
  exactly when it lies in the range of ``K``; its squared norm is
  ``f @ pinv(K) @ f``.
* All eigen/SVD work is deterministic (LAPACK ``eigh``); no randomized
  sketching, so repeated runs give identical reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MembershipError, StructuralError

#: relative asymmetry beyond which a matrix is rejected instead of symmetrized
SYMMETRY_RTOL = 1e-12
#: default relative tolerance for accepting a minimum eigenvalue as nonnegative
PSD_TOL = 1e-9
#: default relative spectral cutoff for pseudoinversion
SVD_CUTOFF = 1e-10
#: least-squares residual (relative) below which range membership is declared
MEMBERSHIP_RTOL = 1e-8


def _as_symmetric(m, name="matrix"):
    """Validate shape and symmetry, then return the symmetrized copy."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StructuralError(f"{name} must be square, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max())) if m.size else 1.0
    asym = float(np.abs(m - m.T).max()) if m.size else 0.0
    if asym > SYMMETRY_RTOL * scale:
        raise StructuralError(
            f"{name} is not symmetric: max |M - M.T| = {asym:.3e} "
            f"exceeds {SYMMETRY_RTOL:.0e} * {scale:.3e}"
        )
    return 0.5 * (m + m.T)


@dataclass(frozen=True)
class PsdResult:
    """Outcome of a positive-semidefiniteness check."""

    accepted: bool
    min_eig: float
    witness: np.ndarray | None  # eigenvector achieving min_eig when rejected


def psd_check(m, tol=PSD_TOL):
    """Certify that a symmetric matrix is positive semidefinite.

    Acceptance is relative: ``min_eig >= -tol * max(1, max_eig)``.  On
    rejection the witness is a unit eigenvector ``v`` with
    ``v @ m @ v = min_eig < 0``.
    """
    m = _as_symmetric(m)
    if m.size == 0:
        return PsdResult(True, 0.0, None)
    w, v = np.linalg.eigh(m)
    min_eig = float(w[0])
    max_eig = float(w[-1])
    accepted = min_eig >= -tol * max(1.0, max_eig)
    witness = None if accepted else v[:, 0].copy()
    return PsdResult(accepted, min_eig, witness)


def pseudo_inverse(m, cutoff=SVD_CUTOFF, tol=PSD_TOL):
    """Moore-Penrose pseudoinverse of a symmetric PSD matrix.

    Eigenvalues below ``cutoff * max_eig`` are treated as exact zeros
    (for a PSD matrix the eigenvalues are the singular values).  The result
    is exactly symmetric.
    """
    m = _as_symmetric(m)
    if m.size == 0:
        return m.copy()
    w, v = np.linalg.eigh(m)
    if w[0] < -tol * max(1.0, float(w[-1])):
        raise StructuralError(
            f"pseudo_inverse requires a PSD matrix (min eigenvalue {w[0]:.3e})"
        )
    thresh = cutoff * max(float(w[-1]), 0.0)
    inv_w = np.where(w > thresh, 1.0 / np.where(w > thresh, w, 1.0), 0.0)
    p = (v * inv_w) @ v.T
    return 0.5 * (p + p.T)


class KernelMatrix:
    """A certified reproducing kernel on a finite ordered point set.

    Wraps a dense symmetric PSD matrix together with its acceptance metadata
    (``psd_margin``: the smallest eigenvalue seen at construction) and the
    relative spectral cutoff used whenever this kernel has to be
    pseudoinverted.  The eigendecomposition is computed once and cached;
    instances are immutable and safe to share across threads.
    """

    __slots__ = ("labels", "values", "psd_margin", "svd_cutoff", "_eigw", "_eigv", "_pinv")

    def __init__(self, values, labels=None, tol=PSD_TOL, svd_cutoff=SVD_CUTOFF):
        values = _as_symmetric(values, "kernel matrix")
        n = values.shape[0]
        if labels is None:
            labels = tuple(range(n))
        else:
            labels = tuple(labels)
            if len(labels) != n:
                raise StructuralError(
                    f"{len(labels)} labels for a {n}x{n} matrix"
                )
        if n:
            w, v = np.linalg.eigh(values)
        else:
            w = np.zeros(0)
            v = np.zeros((0, 0))
        min_eig = float(w[0]) if n else 0.0
        max_eig = float(w[-1]) if n else 0.0
        if min_eig < -tol * max(1.0, max_eig):
            raise StructuralError(
                f"matrix rejected as a kernel: min eigenvalue {min_eig:.6e} "
                f"below -{tol:.0e} * max(1, {max_eig:.6e})"
            )
        values.flags.writeable = False
        w.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "psd_margin", min_eig)
        object.__setattr__(self, "svd_cutoff", float(svd_cutoff))
        object.__setattr__(self, "_eigw", w)
        object.__setattr__(self, "_eigv", v)
        object.__setattr__(self, "_pinv", None)

    def __setattr__(self, name, value):
        raise AttributeError("KernelMatrix is immutable")

    @property
    def n(self):
        return self.values.shape[0]

    def __repr__(self):
        return f"KernelMatrix(n={self.n}, psd_margin={self.psd_margin:.3e})"

    def pinv(self):
        """Pseudoinverse at this kernel's spectral cutoff (cached)."""
        if self._pinv is None:
            w, v = self._eigw, self._eigv
            thresh = self.svd_cutoff * max(float(w[-1]), 0.0) if self.n else 0.0
            mask = w > thresh
            inv_w = np.where(mask, 1.0 / np.where(mask, w, 1.0), 0.0)
            p = (v * inv_w) @ v.T
            p = 0.5 * (p + p.T)
            p.flags.writeable = False
            object.__setattr__(self, "_pinv", p)
        return self._pinv

    def logdet(self):
        """Log-determinant; ``-inf`` when the matrix is singular at the cutoff."""
        if self.n == 0:
            return 0.0
        w = self._eigw
        thresh = self.svd_cutoff * max(float(w[-1]), 0.0)
        if w[0] <= thresh:
            return float("-inf")
        return float(np.sum(np.log(w)))

    def rank(self):
        if self.n == 0:
            return 0
        thresh = self.svd_cutoff * max(float(self._eigw[-1]), 0.0)
        return int(np.sum(self._eigw > thresh))

    def sub(self, idx):
        """Dense subkernel values on the index subset ``idx`` (order kept)."""
        idx = list(idx)
        return self.values[np.ix_(idx, idx)].copy()

    def generator(self, x):
        """The generator k_x as an element of this kernel's space."""
        coeffs = np.zeros(self.n)
        coeffs[x] = 1.0
        return RkhsElement(self, coeffs)


class RkhsElement:
    """An element f = sum_i alpha_i k_{x_i} of a kernel's Hilbert space.

    Stored as the coefficient vector ``coeffs`` together with the cached
    value vector ``values = K @ coeffs``; the squared norm is
    ``coeffs @ K @ coeffs``.
    """

    __slots__ = ("base", "coeffs", "values")

    def __init__(self, base, coeffs):
        coeffs = np.asarray(coeffs, dtype=float).copy()
        if coeffs.shape != (base.n,):
            raise StructuralError(
                f"coefficient vector of length {coeffs.shape} for n={base.n}"
            )
        values = base.values @ coeffs
        coeffs.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("RkhsElement is immutable")

    @classmethod
    def from_values(cls, base, values):
        """Build the element with the given value vector.

        Raises :class:`MembershipError` if ``values`` is not in the range of
        the kernel (relative least-squares residual above the membership
        tolerance).
        """
        values = np.asarray(values, dtype=float)
        coeffs = base.pinv() @ values
        resid = float(np.linalg.norm(base.values @ coeffs - values))
        if resid > MEMBERSHIP_RTOL * max(float(np.linalg.norm(values)), 1e-300):
            raise MembershipError(
                f"value vector outside the kernel range (residual {resid:.3e})"
            )
        return cls(base, coeffs)

    def norm_sq(self):
        return float(self.coeffs @ self.values)

    def restricted_norm_sq(self, subset):
        """Squared norm of the restriction f|_A in the subkernel's space."""
        a = sorted(set(subset))
        gram = self.base.values[np.ix_(a, a)]
        return rkhs_norm_sq(self.values[a], gram, self.base.svd_cutoff)

    def inner(self, other):
        if other.base is not self.base:
            raise StructuralError("inner product requires elements of the same space")
        return float(self.coeffs @ other.values)

    def __repr__(self):
        return f"RkhsElement(n={self.base.n}, norm={np.sqrt(max(self.norm_sq(), 0.0)):.4g})"


def rkhs_norm_sq(values, gram, cutoff=SVD_CUTOFF):
    """Squared norm of a value vector in the space of the kernel ``gram``.

    Computes ``min { a @ gram @ a : gram @ a = values }`` as
    ``values @ pinv(gram) @ values``; raises :class:`MembershipError` when
    ``values`` is not in the range of ``gram``.
    """
    values = np.asarray(values, dtype=float)
    gram = _as_symmetric(gram, "gram")
    if values.shape != (gram.shape[0],):
        raise StructuralError(
            f"value vector of length {values.shape} for gram {gram.shape}"
        )
    if values.size == 0:
        return 0.0
    p = pseudo_inverse(gram, cutoff)
    alpha = p @ values
    resid = float(np.linalg.norm(gram @ alpha - values))
    if resid > MEMBERSHIP_RTOL * max(float(np.linalg.norm(values)), 1e-300):
        raise MembershipError(
            f"value vector outside the kernel range (residual {resid:.3e})"
        )
    return float(max(values @ alpha, 0.0))


def schur_complement(kernel, subset, tol=PSD_TOL):
    """Conditional kernel on the complement of ``subset``.

    ``(K / K_B)(x, y) = K(x, y) - k_{x,B} @ pinv(K_B) @ k_{y,B}``; the result
    is again a certified kernel (on the remaining labels, order preserved).
    """
    b = sorted(set(subset))
    keep = [i for i in range(kernel.n) if i not in set(b)]
    if len(b) + len(keep) != kernel.n:
        raise StructuralError("subset contains indices outside the kernel")
    v = kernel.values
    if not b:
        out = v.copy()
    else:
        kb = pseudo_inverse(v[np.ix_(b, b)], kernel.svd_cutoff)
        cross = v[np.ix_(keep, b)]
        out = v[np.ix_(keep, keep)] - cross @ kb @ cross.T
    labels = tuple(kernel.labels[i] for i in keep)
    return KernelMatrix(out, labels=labels, tol=tol, svd_cutoff=kernel.svd_cutoff)


def projection_apply(kernel, subset, element):
    """Orthogonal projection of ``element`` onto span{k_x : x in subset}.

    The projected element agrees with ``element`` on ``subset`` and its
    squared norm equals the squared norm of the restriction (subspace
    isometry).
    """
    a = sorted(set(subset))
    if element.base is not kernel:
        raise StructuralError("element does not live in the given kernel space")
    if any(i < 0 or i >= kernel.n for i in a):
        raise StructuralError("subset contains indices outside the kernel")
    if not a:
        return RkhsElement(kernel, np.zeros(kernel.n))
    ka = kernel.values[np.ix_(a, a)]
    beta = pseudo_inverse(ka, kernel.svd_cutoff) @ element.values[a]
    coeffs = np.zeros(kernel.n)
    coeffs[a] = beta
    return RkhsElement(kernel, coeffs)


def projection_matrix(kernel, subset):
    """Matrix of the projection onto span{k_x : x in subset} in value coordinates."""
    a = sorted(set(subset))
    n = kernel.n
    if not a:
        return np.zeros((n, n))
    ka = kernel.values[np.ix_(a, a)]
    sel = np.zeros((len(a), n))
    sel[np.arange(len(a)), a] = 1.0
    return kernel.values[:, a] @ pseudo_inverse(ka, kernel.svd_cutoff) @ sel


def minnorm_interpolate(kernel, subset, values_on_subset):
    """Minimum-norm element of the kernel's space matching values on a subset.

    Returns ``argmin { ||g|| : g(a) = values_on_subset[a] for a in subset }``,
    evaluated as ``g(y) = f_A @ pinv(K_A) @ K[A, y]``.  Raises
    :class:`MembershipError` when no interpolant exists.
    """
    a = sorted(set(subset))
    f_a = np.asarray(values_on_subset, dtype=float)
    if f_a.shape != (len(a),):
        raise StructuralError(
            f"{f_a.shape} values for a subset of size {len(a)}"
        )
    ka = kernel.values[np.ix_(a, a)]
    beta = pseudo_inverse(ka, kernel.svd_cutoff) @ f_a
    resid = float(np.linalg.norm(ka @ beta - f_a))
    if resid > MEMBERSHIP_RTOL * max(float(np.linalg.norm(f_a)), 1e-300):
        raise MembershipError(
            f"values outside the subkernel range (residual {resid:.3e})"
        )
    coeffs = np.zeros(kernel.n)
    coeffs[a] = beta
    return RkhsElement(kernel, coeffs)


def contraction_apply(kernel, src, dst, values_on_src, cutoff=None):
    """Apply the generator contraction map between two subsets of one kernel.

    The map sends k_{x,src} to k_{x,dst}; on a general element it acts by the
    evaluation identity ``(Phi f)(y) = f_src @ pinv(K_src) @ K[src, y]`` for
    ``y`` in ``dst``.  Returns the value vector on ``dst`` (sorted order).
    """
    a = sorted(set(src))
    b = sorted(set(dst))
    f_a = np.asarray(values_on_src, dtype=float)
    if f_a.shape != (len(a),):
        raise StructuralError(f"{f_a.shape} values for a subset of size {len(a)}")
    if cutoff is None:
        cutoff = kernel.svd_cutoff
    ka = kernel.values[np.ix_(a, a)]
    beta = pseudo_inverse(ka, cutoff) @ f_a
    resid = float(np.linalg.norm(ka @ beta - f_a))
    if resid > MEMBERSHIP_RTOL * max(float(np.linalg.norm(f_a)), 1e-300):
        raise MembershipError(
            f"values outside the source subkernel range (residual {resid:.3e})"
        )
    return kernel.values[np.ix_(b, a)] @ beta
