import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.weights.weight_functions import (
    build_chi,
    build_partition,
    build_plateau,
    build_power_partition,
    build_psi_sequence,
    build_psi_slope,
    build_theta_eta,
    constant_weight,
    get_profile,
    interval_distance,
    smooth_step,
    translate,
)


def _eps_b_pairs(count: int = 20):
    rng = np.random.default_rng(2024)
    eps = rng.uniform(0.05, 2.0, size=count)
    return [(float(e), float(e * rng.uniform(5.0, 20.0))) for e in eps]


def _lattice(lo: float, hi: float, size: int = 10_000) -> np.ndarray:
    return np.linspace(lo, hi, size)


class TestProfile:
    def test_step_limits_and_symmetry(self):
        profile = get_profile()
        y = np.linspace(-1.5, 1.5, 301)
        step = profile.step(y)
        assert step[0] == 0.0 and step[-1] == 1.0
        np.testing.assert_allclose(step + step[::-1], 1.0, atol=1e-12)

    def test_step_derivative_matches_rho(self):
        profile = get_profile()
        y = np.linspace(-0.9, 0.9, 181)
        h = 1e-6
        numeric = (profile.step(y + h) - profile.step(y - h)) / (2.0 * h)
        np.testing.assert_allclose(numeric, profile.rho(y), atol=1e-6)

    def test_ramp_is_identity_past_one(self):
        profile = get_profile()
        np.testing.assert_array_equal(profile.ramp(np.array([1.0, 2.5])), [1.0, 2.5])
        assert profile.ramp(np.array([-1.0]))[0] == 0.0


class TestChi:
    @pytest.mark.parametrize("eps,b", _eps_b_pairs())
    def test_ramp_properties(self, eps, b):
        chi = build_chi(eps, b)
        x = _lattice(-b, 2.0 * b)
        values = chi(x)
        slope = chi.derivative(x)
        # bounded monotone
        assert values.min() >= 0.0 and values.max() <= 1.0
        assert slope.min() >= 0.0
        # vanishes left of eps, equals one right of b
        assert np.all(values[x <= eps] == 0.0)
        assert np.all(values[x >= b] == 1.0)
        # slope bound on the core interval
        core = (x >= 3.0 * eps) & (x <= b - 2.0 * eps)
        assert slope[core].min() >= 1.0 / (b - 3.0 * eps)
        # lower bound to the right of 3 eps
        assert values[x >= 3.0 * eps].min() >= 0.5 * eps / (b - 3.0 * eps)
        # derivative support
        assert np.all(slope[(x < eps) | (x > b)] == 0.0)
        assert eps <= chi.support_lo and chi.support_hi <= b

    def test_constant_slope_on_linear_part(self):
        eps, b = 1.0, 10.0
        chi = build_chi(eps, b)
        x = _lattice(15.0 * eps / 8.0, b - 15.0 * eps / 8.0, 200)
        np.testing.assert_allclose(chi.derivative(x), 1.0 / (b - 13.0 * eps / 4.0), rtol=1e-14)

    def test_derivative_matches_finite_difference(self):
        chi = build_chi(0.5, 4.0)
        x = _lattice(0.0, 4.5, 500)
        h = 1e-6
        numeric = (chi(x + h) - chi(x - h)) / (2.0 * h)
        np.testing.assert_allclose(numeric, chi.derivative(x), atol=1e-5)

    @pytest.mark.parametrize("eps,b", [(1.0, 4.9), (0.0, 1.0), (-1.0, 10.0)])
    def test_rejects_narrow_ramp(self, eps, b):
        with pytest.raises(ValueError):
            build_chi(eps, b)


class TestPartitions:
    @pytest.mark.parametrize("eps,b", _eps_b_pairs())
    def test_partition_of_unity(self, eps, b):
        chi, phi, psi = build_partition(eps, b)
        x = np.random.default_rng(0).uniform(-b, 2.0 * b, size=1000)
        np.testing.assert_allclose(chi(x) + phi(x) + psi(x), 1.0, atol=1e-12)

    @pytest.mark.parametrize("eps,b", _eps_b_pairs())
    def test_power_partition(self, eps, b):
        chi, phi_tilde, psi = build_power_partition(eps, b, 2)
        x = np.random.default_rng(1).uniform(-b, 2.0 * b, size=1000)
        np.testing.assert_allclose(chi(x) ** 2 + phi_tilde(x) ** 2 + psi(x), 1.0, atol=1e-10)

    def test_partition_supports(self):
        eps, b = 1.0, 8.0
        chi, phi, psi = build_partition(eps, b)
        assert phi(np.array([0.75 * eps]))[0] == 1.0
        x = _lattice(-b, 2.0 * b)
        assert np.all(psi(x[x > eps / 2.0]) == 0.0)
        assert np.all(phi(x[(x < eps / 4.0) | (x > b)]) == 0.0)

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_power_partition_supports(self, k):
        eps, b = 1.0, 8.0
        chi, phi_tilde, psi = build_power_partition(eps, b, k)
        assert phi_tilde(np.array([0.75 * eps]))[0] == pytest.approx(1.0)
        x = _lattice(-b, eps / 4.0, 500)
        assert np.all(phi_tilde(x) == 0.0)
        x = np.random.default_rng(k).uniform(-b, 2.0 * b, size=1000)
        np.testing.assert_allclose(chi(x) ** k + phi_tilde(x) ** k + psi(x), 1.0, atol=1e-10)

    def test_power_partition_derivative_is_finite(self):
        _, phi_tilde, _ = build_power_partition(1.0, 8.0, 3)
        assert np.isfinite(phi_tilde.derivative(_lattice(-1.0, 10.0))).all()

    def test_power_must_be_at_least_two(self):
        with pytest.raises(ValueError):
            build_power_partition(1.0, 8.0, 1)


class TestCutoffs:
    def test_theta_eta_plateaus(self):
        eps, b = 1.0, 6.0
        theta, eta = build_theta_eta(eps, b)
        assert theta(np.array([eps / 5.0]))[0] == pytest.approx(1.0, abs=1e-12)
        assert theta(np.array([b + eps]))[0] == 0.0
        assert eta(np.array([b + 0.75 * eps]))[0] == pytest.approx(1.0, abs=1e-12)

    def test_eta_covers_theta_and_theta_covers_chi_slope(self):
        eps, b = 0.5, 5.0
        theta, eta = build_theta_eta(eps, b)
        chi = build_chi(eps, b)
        on_theta = _lattice(theta.value_lo, theta.value_hi)
        assert eta(on_theta).min() == pytest.approx(1.0, abs=1e-12)
        on_slope = _lattice(chi.support_lo, chi.support_hi)
        assert theta(on_slope).min() == pytest.approx(1.0, abs=1e-12)

    def test_plateau_rejects_unordered_breakpoints(self):
        with pytest.raises(ValueError):
            build_plateau(0.0, 2.0, 1.0, 3.0)

    def test_smooth_step_bounds(self):
        step = smooth_step(0.0, 0.5)
        x = _lattice(-2.0, 2.0, 401)
        values = step(x)
        assert values[0] == 0.0 and values[-1] == 1.0
        assert np.all(np.diff(values) >= 0.0)

    def test_constant_weight(self):
        w = constant_weight(2.0)
        x = _lattice(-1.0, 1.0, 11)
        np.testing.assert_array_equal(w(x), 2.0)
        np.testing.assert_array_equal(w.derivative(x), 0.0)


class TestPsiSequence:
    @pytest.mark.parametrize("ell", [1, 2, 3, 4])
    def test_slope_plateau_and_bounds(self, ell):
        A = 8.0
        slope = build_psi_slope(A, ell)
        assert slope(np.array([0.0]))[0] == 1.0
        x = _lattice(-2.0 * A, 2.0 * A)
        values = slope(x)
        assert values.min() >= 0.0 and values.max() <= 1.0
        outer = 2.0 ** (-(ell - 0.5)) * A
        assert np.all(values[np.abs(x) > outer] == 0.0)

    @pytest.mark.parametrize("ell", [1, 2, 3])
    def test_supports_nest(self, ell):
        A = 8.0
        current, following = build_psi_slope(A, ell), build_psi_slope(A, ell + 1)
        gap = current.plateau[1] - following.support_hi
        assert gap >= (2.0 ** (-ell) - 2.0 ** (-(ell + 0.5))) * A - 1e-12
        assert gap > 0.0

    def test_sequence_is_antiderivative_of_slope(self):
        psi = build_psi_sequence(8.0, 2)
        x = _lattice(-6.0, 6.0, 600)
        h = 1e-6
        numeric = (psi(x + h) - psi(x - h)) / (2.0 * h)
        np.testing.assert_allclose(numeric, psi.derivative(x), atol=1e-5)
        assert psi(np.array([-10.0]))[0] == 0.0

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            build_psi_slope(0.0, 1)
        with pytest.raises(ValueError):
            build_psi_slope(1.0, 0)


class TestHelpers:
    def test_translate_shifts_values_and_supports(self):
        chi = build_chi(1.0, 6.0)
        moved = translate(chi, 2.5)
        x = _lattice(-5.0, 10.0, 301)
        np.testing.assert_array_equal(moved(x), chi(x + 2.5))
        np.testing.assert_array_equal(moved.derivative(x), chi.derivative(x + 2.5))
        assert moved.support_lo == pytest.approx(chi.support_lo - 2.5)
        assert moved.support_hi == pytest.approx(chi.support_hi - 2.5)

    def test_translate_by_zero_is_identity(self):
        chi = build_chi(1.0, 6.0)
        assert translate(chi, 0.0) is chi

    @pytest.mark.parametrize(
        "first,second,expected",
        [((0.0, 1.0), (2.0, 3.0), 1.0), ((2.0, 3.0), (0.0, 1.0), 1.0), ((0.0, 2.0), (1.0, 3.0), 0.0)],
    )
    def test_interval_distance(self, first, second, expected):
        assert interval_distance(first, second) == expected

    @settings(max_examples=40, deadline=None)
    @given(eps=st.floats(0.01, 3.0), ratio=st.floats(5.0, 40.0), shift=st.floats(-10.0, 10.0))
    def test_translated_chi_stays_in_unit_interval(self, eps, ratio, shift):
        chi = translate(build_chi(eps, eps * ratio), shift)
        x = np.linspace(-60.0 - abs(shift), 60.0 * ratio, 2001)
        values = chi(x)
        assert values.min() >= 0.0 and values.max() <= 1.0
        assert chi.derivative(x).min() >= 0.0
