import numpy as np
import pytest

from pdcomplete import (
    StationaryFunction,
    StructuralError,
    band_partial,
    canonical_extension_grid,
    generator_on_test,
    nagy_eval,
    semigroup_compose_check,
    semigroup_step,
)


def ou_function(delta=0.1, a=0.5):
    return StationaryFunction.from_function(lambda t: np.exp(-abs(t)), delta, a)


def cos_function(delta=0.1, a=0.5):
    return StationaryFunction.from_function(lambda t: np.cos(t), delta, a)


def bump_pair(a):
    """Raised-cosine window on the middle third of (0, a), with derivative."""
    lo, hi = a / 3.0, 2.0 * a / 3.0

    def alpha(u):
        if u <= lo or u >= hi:
            return 0.0
        return 0.5 * (1.0 - np.cos(2.0 * np.pi * (u - lo) / (hi - lo)))

    def alpha_prime(u):
        if u <= lo or u >= hi:
            return 0.0
        return np.pi / (hi - lo) * np.sin(2.0 * np.pi * (u - lo) / (hi - lo))

    return alpha, alpha_prime


class TestStationaryFunction:
    def test_grid_metadata(self):
        fn = ou_function()
        assert fn.w == 5
        assert fn.half_width == pytest.approx(0.5)

    def test_truncation_warns(self):
        with pytest.warns(UserWarning, match="truncated"):
            fn = StationaryFunction.from_function(lambda t: np.exp(-t), 0.1, 0.55)
        assert fn.w == 5

    def test_sine_rejected(self):
        # sin(0) = 0 puts zeros on the Toeplitz diagonal: not positive-definite
        with pytest.raises(StructuralError, match="not positive-definite"):
            StationaryFunction.from_function(lambda t: np.sin(t), 0.1, 0.5)

    def test_cosine_accepted(self):
        fn = cos_function()
        assert fn.w == 5


class TestBandPartial:
    def test_constant_function_all_ones(self):
        fn = StationaryFunction(np.ones(3), 0.1)
        kern, cover = band_partial(fn, 5)
        assert np.all(kern.values[kern.pattern.mask] == 1.0)
        assert len(cover.blocks) == 3

    def test_exponential_band(self):
        fn = ou_function()
        kern, _ = band_partial(fn, 21)
        lag = np.abs(np.arange(21)[:, None] - np.arange(21)[None, :])
        rho = np.exp(-0.1)
        expected = np.where(lag <= 5, rho ** lag, 0.0)
        assert np.abs(kern.values - expected).max() < 1e-14

    def test_too_few_points(self):
        with pytest.raises(StructuralError):
            band_partial(ou_function(), 4)


class TestCanonicalExtension:
    def test_ou_is_exponential(self):
        ext = canonical_extension_grid(ou_function(), 41)
        k = np.arange(41)
        assert np.abs(ext.values - np.exp(-0.1 * k)).max() < 1e-8
        assert ext.stationarity_residual <= 1e-10

    def test_constant_stays_one(self):
        fn = StationaryFunction(np.ones(3), 0.1)
        ext = canonical_extension_grid(fn, 9)
        assert np.abs(ext.values - 1.0).max() < 1e-10

    def test_cosine_forced(self):
        ext = canonical_extension_grid(cos_function(), 41)
        k = np.arange(41)
        assert np.abs(ext.values - np.cos(0.1 * k)).max() < 1e-6

    def test_restricts_to_data_exactly(self):
        fn = ou_function()
        ext = canonical_extension_grid(fn, 31)
        assert np.array_equal(ext.values[: fn.w + 1], fn.samples)

    def test_bounded_by_value_at_zero(self):
        for fn in (ou_function(), cos_function()):
            ext = canonical_extension_grid(fn, 41)
            assert np.abs(ext.values).max() <= fn.samples[0] + 1e-10


class TestSemigroup:
    def test_zero_steps_is_identity(self):
        sg = semigroup_step(ou_function(), 41)
        z0 = sg.whitened(0)
        assert np.abs(z0 - np.eye(z0.shape[0])).max() < 1e-10

    def test_defining_relation_shifts_generators(self):
        sg = semigroup_step(ou_function(), 41)
        g = sg.base.values
        for u in range(1, sg.n):
            e = np.zeros(sg.n)
            e[u] = 1.0
            image_values = g @ sg.apply_coeffs(e)
            assert np.abs(image_values - g[:, u - 1]).max() < 1e-10

    @pytest.mark.parametrize("fn_builder", [ou_function, cos_function])
    def test_contraction(self, fn_builder):
        sg = semigroup_step(fn_builder(), 41)
        assert sg.operator_norm(1) <= 1.0 + 1e-8

    def test_power_compose_residual_zero(self):
        sg = semigroup_step(ou_function(), 41)
        res = semigroup_compose_check(sg, 3, 4)
        assert res.power_residual <= 1e-12

    def test_ou_cross_resolution(self):
        sg = semigroup_step(ou_function(), 41)
        res = semigroup_compose_check(sg, 1, 1)
        assert res.cross_residual <= 1e-8

    def test_cos_cross_resolution(self):
        sg = semigroup_step(cos_function(), 41)
        res = semigroup_compose_check(sg, 1, 1)
        assert res.cross_residual <= 1e-6

    def test_shift_needs_extension_range(self):
        sg = semigroup_step(ou_function(), 8)  # w+2 points only
        with pytest.raises(StructuralError, match="lag"):
            semigroup_compose_check(sg, 2, 2)


class TestNagyPairing:
    def test_zero_steps_gives_value_at_zero(self):
        sg = semigroup_step(ou_function(), 41)
        assert nagy_eval(sg, 0) == pytest.approx(1.0, abs=1e-12)

    def test_ou_ten_steps(self):
        sg = semigroup_step(ou_function(), 41)
        assert nagy_eval(sg, 10) == pytest.approx(np.exp(-1.0), abs=1e-7)

    def test_constant_function(self):
        fn = StationaryFunction(np.ones(3), 0.1)
        sg = semigroup_step(fn, 12)
        for k in range(8):
            assert nagy_eval(sg, k) == pytest.approx(1.0, abs=1e-9)

    def test_matches_extension_everywhere(self):
        sg = semigroup_step(ou_function(), 41)
        for k in range(41):
            assert nagy_eval(sg, k) == pytest.approx(sg.extension[k], abs=1e-7)


class TestGeneratorOnTest:
    def test_halving_ratio_in_band(self):
        a = 0.5
        alpha, alpha_prime = bump_pair(a)
        residuals = []
        for level in range(3):
            delta = 0.05 / 2 ** level
            fn = StationaryFunction.from_function(lambda t: np.exp(-abs(t)), delta, a)
            sg = semigroup_step(fn, fn.w + 8)
            grid = np.arange(fn.w + 1) * delta
            residuals.append(
                generator_on_test(sg, [alpha(u) for u in grid],
                                  [alpha_prime(u) for u in grid])
            )
        for coarse, fine in zip(residuals, residuals[1:]):
            assert 1.5 <= coarse / fine <= 2.5

    def test_boundary_support_rejected(self):
        sg = semigroup_step(ou_function(), 41)
        ones = np.ones(sg.n)
        with pytest.raises(StructuralError, match="boundary"):
            generator_on_test(sg, ones, np.zeros(sg.n))

    def test_translation_invariance(self):
        # sliding the bump inside the open interval moves the residual < 10%
        a = 1.0
        delta = 0.025
        fn = StationaryFunction.from_function(lambda t: np.exp(-abs(t)), delta, a)
        sg = semigroup_step(fn, fn.w + 8)
        grid = np.arange(fn.w + 1) * delta

        def windowed(center):
            lo, hi = center - a / 6.0, center + a / 6.0

            def alpha(u):
                if u <= lo or u >= hi:
                    return 0.0
                return 0.5 * (1.0 - np.cos(2.0 * np.pi * (u - lo) / (hi - lo)))

            def alpha_prime(u):
                if u <= lo or u >= hi:
                    return 0.0
                return np.pi / (hi - lo) * np.sin(2.0 * np.pi * (u - lo) / (hi - lo))

            return ([alpha(u) for u in grid], [alpha_prime(u) for u in grid])

        r1 = generator_on_test(sg, *windowed(0.45))
        r2 = generator_on_test(sg, *windowed(0.55))
        assert abs(r1 - r2) <= 0.1 * max(r1, r2)
