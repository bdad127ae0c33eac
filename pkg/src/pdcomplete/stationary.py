"""Stationary extension of positive-definite functions on a grid.

A positive-definite function F known on [-a, a] is discretized to a Toeplitz
band |i - j| <= w at spacing delta (w = a / delta).  The canonical completion
of the band is again Toeplitz, so reading off its first row extends F to the
whole grid.  The one-step shift of the extension realizes a discrete
contraction semigroup on the space of the base block: the step operator
sends k_u to k_{u - delta}, its matrix powers reproduce the extension
through the pairing ``F(k delta) = <k_0, Phi^k k_0>``, and the difference
quotient (Phi - I) / delta acts like differentiation on smoothed test
elements.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .completion import PartialKernel, canonical_serrated
from .errors import NumericalError, StructuralError
from .graphdomain import band_cover
from .kernelcore import PSD_TOL, SVD_CUTOFF, KernelMatrix, psd_check


class StationaryFunction:
    """Samples F(k * delta), k = 0..w, of a positive-definite function.

    The (w+1) x (w+1) Toeplitz matrix of the samples must pass the PSD check;
    otherwise F is rejected as not positive-definite at this resolution.
    """

    __slots__ = ("samples", "delta")

    def __init__(self, samples, delta, tol=PSD_TOL):
        samples = np.asarray(samples, dtype=float).copy()
        if samples.ndim != 1 or samples.size < 2:
            raise StructuralError("need samples F(0), ..., F(w*delta) with w >= 1")
        delta = float(delta)
        if delta <= 0:
            raise StructuralError(f"grid spacing must be positive, got {delta}")
        res = psd_check(_toeplitz(samples), tol)
        if not res.accepted:
            raise StructuralError(
                "samples are not positive-definite at this resolution "
                f"(Toeplitz min eigenvalue {res.min_eig:.6e})"
            )
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "delta", delta)

    def __setattr__(self, name, value):
        raise AttributeError("StationaryFunction is immutable")

    @property
    def w(self):
        """Band half-width in grid steps."""
        return self.samples.size - 1

    @property
    def half_width(self):
        """Specification radius a = w * delta."""
        return self.w * self.delta

    def __repr__(self):
        return f"StationaryFunction(w={self.w}, delta={self.delta})"

    @classmethod
    def from_function(cls, fn, delta, half_width, tol=PSD_TOL):
        """Sample a callable on [0, half_width] at spacing delta.

        The radius is truncated down to the nearest multiple of delta when it
        is not already one (with a warning).
        """
        delta = float(delta)
        w = int(np.floor(half_width / delta + 1e-12))
        if w < 1:
            raise StructuralError("half width must cover at least one grid step")
        if abs(w * delta - half_width) > 1e-12 * max(1.0, abs(half_width)):
            warnings.warn(
                f"half width {half_width} truncated to {w * delta} "
                f"(= {w} steps of {delta})",
                stacklevel=2,
            )
        samples = np.array([fn(k * delta) for k in range(w + 1)], dtype=float)
        return cls(samples, delta, tol)


def _toeplitz(first_row):
    n = first_row.size
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    return first_row[idx]


def band_partial(fn, n_points, tol=PSD_TOL):
    """Toeplitz band instance of a stationary function on n grid points.

    Returns the partial kernel with pattern |i - j| <= w and the sliding
    band cover that parametrizes it.
    """
    n = int(n_points)
    w = fn.w
    if n < w + 1:
        raise StructuralError(f"need at least w+1 = {w + 1} points, got {n}")
    lag = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    mask = lag <= w
    values = np.where(mask, fn.samples[np.minimum(lag, w)], 0.0)
    cover = band_cover(n, w)
    kern = PartialKernel(cover.pattern(), values)
    return kern, cover


@dataclass(frozen=True)
class StationaryExtension:
    """Grid extension of a stationary function with its diagnostics."""

    fn: StationaryFunction
    values: np.ndarray  # extended samples F~(k*delta), k = 0..n-1
    stationarity_residual: float
    report: object  # CompletionReport of the band completion

    @property
    def n_points(self):
        return self.values.size


def canonical_extension_grid(fn, n_points, tol=PSD_TOL, cutoff=SVD_CUTOFF):
    """Extend a stationary function by completing its Toeplitz band.

    The extension is row 0 of the canonical completion.  The stationarity
    residual is the maximum spread of the completion along its diagonals;
    Toeplitz data completes to a Toeplitz matrix, so it vanishes up to
    roundoff.
    """
    kern, cover = band_partial(fn, n_points, tol)
    report = canonical_serrated(kern, cover, tol=tol, cutoff=cutoff)
    vals = report.completion.values
    n = vals.shape[0]
    spread = 0.0
    for k in range(1, n):
        diag = np.diagonal(vals, offset=k)
        spread = max(spread, float(diag.max() - diag.min()))
    extended = vals[0].copy()
    extended.flags.writeable = False
    return StationaryExtension(fn, extended, spread, report)


class DiscreteSemigroup:
    """One-step contraction of a stationary extension in generator coordinates.

    ``base`` is the kernel on the block I0 = {0..w}; ``step_matrix`` maps the
    coefficients of f = sum_u alpha_u k_u to those of Phi f, where the step
    sends k_u to k_{u - delta}.  Norms are always taken in the base kernel's
    metric (alpha @ K @ alpha), which tolerates rank-deficient blocks.
    """

    __slots__ = ("base", "step_matrix", "delta", "extension", "_white_u", "_white_w")

    def __init__(self, base, step_matrix, delta, extension):
        step_matrix = np.asarray(step_matrix, dtype=float).copy()
        extension = np.asarray(extension, dtype=float).copy()
        step_matrix.flags.writeable = False
        extension.flags.writeable = False
        w = base._eigw
        thresh = base.svd_cutoff * max(float(w[-1]), 0.0)
        keep = w > thresh
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "step_matrix", step_matrix)
        object.__setattr__(self, "delta", float(delta))
        object.__setattr__(self, "extension", extension)
        object.__setattr__(self, "_white_u", base._eigv[:, keep])
        object.__setattr__(self, "_white_w", w[keep])

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteSemigroup is immutable")

    @property
    def n(self):
        return self.base.n

    def __repr__(self):
        return f"DiscreteSemigroup(block={self.n}, delta={self.delta})"

    def whitened(self, k=1):
        """Matrix of the k-step map in coordinates where the norm is Euclidean."""
        h = self._shift_block(k)
        u, w = self._white_u, self._white_w
        root = np.sqrt(w)
        return (u / root).T @ h @ (u / root)

    def _shift_block(self, k):
        """Values H[j, u] = F~(|u - k - j| * delta) of the k-step images."""
        n = self.n
        lag = np.abs(np.arange(n)[None, :] - k - np.arange(n)[:, None])
        if int(lag.max()) >= self.extension.size:
            raise StructuralError(
                f"{k}-step shift needs the extension at lag {int(lag.max())}, "
                f"only {self.extension.size - 1} available"
            )
        return self.extension[lag]

    def operator_norm(self, k=1):
        """Norm of the k-step map in the base kernel's metric."""
        z = self.whitened(k)
        return float(np.linalg.norm(z, 2)) if z.size else 0.0

    def apply_coeffs(self, coeffs, k=1):
        """Coefficients of Phi^k f for f given by generator coefficients."""
        coeffs = np.asarray(coeffs, dtype=float)
        out = coeffs
        for _ in range(int(k)):
            out = self.step_matrix @ out
        return out

    def hdot(self, a, b):
        """Inner product of two coefficient vectors in the base metric."""
        return float(np.asarray(a) @ self.base.values @ np.asarray(b))

    def hnorm(self, a):
        return float(np.sqrt(max(self.hdot(a, a), 0.0)))


def semigroup_step(fn, n_points, tol=PSD_TOL, cutoff=SVD_CUTOFF,
                   contraction_tol=1e-8):
    """Build the one-step semigroup operator from the grid extension.

    Requires the extension on at least w+2 points (the image of k_0 reaches
    lag w+1).  The defining relation maps coefficients through
    ``pinv(K_I0) @ H`` where H holds the shifted generator values; the
    operator norm in the kernel metric must not exceed 1 + contraction_tol.
    """
    w = fn.w
    n = int(n_points)
    if n < w + 2:
        raise StructuralError(f"need at least w+2 = {w + 2} points, got {n}")
    ext = canonical_extension_grid(fn, n, tol=tol, cutoff=cutoff)
    base = KernelMatrix(_toeplitz(fn.samples), tol=tol, svd_cutoff=cutoff)
    lag = np.abs(np.arange(w + 1)[None, :] - 1 - np.arange(w + 1)[:, None])
    h = ext.values[lag]
    step = base.pinv() @ h
    sg = DiscreteSemigroup(base, step, fn.delta, ext.values)
    norm = sg.operator_norm(1)
    if norm > 1.0 + contraction_tol:
        raise NumericalError(
            f"step operator is not a contraction: norm {norm:.12f}"
        )
    return sg


@dataclass(frozen=True)
class ComposeResidual:
    """Residuals of the semigroup law Phi^j Phi^k = Phi^{j+k}."""

    power_residual: float  # same operator composed, zero up to roundoff
    cross_residual: float  # (j+k)-step operator built from data vs the product


def semigroup_compose_check(sg, j, k):
    """Check the composition law at steps (j, k) in the kernel metric.

    The power residual multiplies one whitened matrix with itself; the cross
    residual rebuilds the (j+k)-step operator directly from the extension
    values and compares, which is the nontrivial consistency statement.
    """
    j, k = int(j), int(k)
    if j < 0 or k < 0:
        raise StructuralError("step counts must be nonnegative")
    zj = np.linalg.matrix_power(sg.whitened(1), j)
    zk = np.linalg.matrix_power(sg.whitened(1), k)
    zjk = np.linalg.matrix_power(sg.whitened(1), j + k)
    power = float(np.linalg.norm(zj @ zk - zjk, 2))
    cross = float(np.linalg.norm(sg.whitened(j) @ sg.whitened(k) - sg.whitened(j + k), 2))
    return ComposeResidual(power, cross)


def nagy_eval(sg, k):
    """Extension value recovered from the semigroup pairing <k_0, Phi^k k_0>."""
    k = int(k)
    if k < 0:
        raise StructuralError("step count must be nonnegative")
    if k >= sg.extension.size:
        raise StructuralError(
            f"step {k} outside the extended range of {sg.extension.size - 1}"
        )
    e0 = np.zeros(sg.n)
    e0[0] = 1.0
    return sg.hdot(e0, sg.apply_coeffs(e0, k))


def generator_on_test(sg, alpha, alpha_prime):
    """Difference-quotient action of the semigroup on a smoothed test element.

    ``alpha`` and its derivative are sampled on the block grid; the element
    f = sum_i alpha(u_i) k_{u_i} delta (left-endpoint quadrature) is pushed
    through (Phi - I) / delta and compared against the element built from
    alpha'.  Returns the kernel-metric norm of the difference; halving delta
    should roughly halve it.  The support must stay strictly inside the open
    block interval.
    """
    alpha = np.asarray(alpha, dtype=float)
    alpha_prime = np.asarray(alpha_prime, dtype=float)
    if alpha.shape != (sg.n,) or alpha_prime.shape != (sg.n,):
        raise StructuralError(
            f"test samples must have length {sg.n}, got {alpha.shape} and {alpha_prime.shape}"
        )
    if alpha[0] != 0.0 or alpha[-1] != 0.0:
        raise StructuralError(
            "test function support touches the boundary of the block interval"
        )
    diff = (sg.step_matrix - np.eye(sg.n)) @ alpha - sg.delta * alpha_prime
    return sg.hnorm(diff)
