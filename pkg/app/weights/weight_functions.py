"""Smooth cutoffs, ramps and partitions of unity built from one mollifier.

Everything here is assembled from three profiles on the reference interval
[-1, 1]:

    rho(y) = C exp(-1 / (1 - y^2))       unit-mass bump
    H(y)   = int_{-1}^{y} rho            smooth step, 0 -> 1
    G(y)   = int_{-1}^{y} H              smooth ramp, G(y) = y for y >= 1

rho and rho' are evaluated in closed form; H and G are tabulated once and
interpolated with cubic Hermite splines whose slopes are the exact
derivatives, so w and w' stay consistent to interpolation accuracy.
"""
import logging
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicHermiteSpline

from app.models.weight_models import WeightFn

logger = logging.getLogger(__name__)

TABLE_SIZE = 2 ** 16 + 1
EDGE_CLAMP_FRACTION = 1.0 / 100.0


def _bump(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = np.abs(y) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
    return out


class MollifierProfile:
    def __init__(self, size: int = TABLE_SIZE):
        y = np.linspace(-1.0, 1.0, size)
        bump = _bump(y)
        step = cumulative_trapezoid(bump, y, initial=0.0)
        self.norm = 1.0 / step[-1]
        step *= self.norm
        # H(y) + H(-y) = 1 exactly on the table
        step = 0.5 * (step + 1.0 - step[::-1])
        ramp = cumulative_trapezoid(step, y, initial=0.0)
        ramp /= ramp[-1]
        self._step = CubicHermiteSpline(y, step, self.norm * bump)
        self._ramp = CubicHermiteSpline(y, ramp, step)
        logger.debug(f"Mollifier tables built on {size} points, C={self.norm:.12f}")

    def rho(self, y) -> np.ndarray:
        return self.norm * _bump(y)

    def drho(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        inside = np.abs(y) < 1.0
        yi = y[inside]
        out[inside] = self.norm * np.exp(-1.0 / (1.0 - yi ** 2)) * (-2.0 * yi / (1.0 - yi ** 2) ** 2)
        return out

    def step(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        inner = np.clip(self._step(np.clip(y, -1.0, 1.0)), 0.0, 1.0)
        return np.where(y <= -1.0, 0.0, np.where(y >= 1.0, 1.0, inner))

    def ramp(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        inner = np.maximum(self._ramp(np.clip(y, -1.0, 1.0)), 0.0)
        return np.where(y <= -1.0, 0.0, np.where(y >= 1.0, y, inner))


@lru_cache(maxsize=1)
def get_profile() -> MollifierProfile:
    return MollifierProfile()


def _check_eps_b(eps: float, b: float) -> None:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if b < 5.0 * eps:
        raise ValueError(f"b must be at least 5*eps, got b={b}, eps={eps}")


# ------------- Elementary shapes -------------
def smooth_step(center: float, half_width: float, name: str = "step") -> WeightFn:
    """0 left of center - half_width, 1 right of center + half_width."""
    if not half_width > 0:
        raise ValueError(f"half_width must be positive, got {half_width}")
    profile = get_profile()
    lo, hi = center - half_width, center + half_width

    def evaluate(x):
        return profile.step((np.asarray(x, dtype=float) - center) / half_width)

    def derivative(x):
        return profile.rho((np.asarray(x, dtype=float) - center) / half_width) / half_width

    def second_derivative(x):
        return profile.drho((np.asarray(x, dtype=float) - center) / half_width) / half_width ** 2

    return WeightFn(name, evaluate, derivative, lo, hi, lo, np.inf, second_derivative, (hi, np.inf))


def build_plateau(
    rise_start: float, rise_end: float, fall_start: float, fall_end: float, name: str = "plateau"
) -> WeightFn:
    """Bump equal to 1 on [rise_end, fall_start] and 0 outside (rise_start, fall_end)."""
    if not rise_start < rise_end <= fall_start < fall_end:
        raise ValueError(
            f"Plateau breakpoints must increase, got {(rise_start, rise_end, fall_start, fall_end)}"
        )
    left = smooth_step(0.5 * (rise_start + rise_end), 0.5 * (rise_end - rise_start))
    right = smooth_step(0.5 * (fall_start + fall_end), 0.5 * (fall_end - fall_start))

    def evaluate(x):
        return np.clip(left.evaluate(x) - right.evaluate(x), 0.0, 1.0)

    def derivative(x):
        return left.derivative(x) - right.derivative(x)

    def second_derivative(x):
        return left.second_derivative(x) - right.second_derivative(x)

    return WeightFn(
        name, evaluate, derivative, rise_start, fall_end, rise_start, fall_end,
        second_derivative, (rise_end, fall_start),
    )


def constant_weight(value: float) -> WeightFn:
    def evaluate(x):
        return np.full_like(np.asarray(x, dtype=float), value)

    def zero(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return WeightFn(f"const[{value:g}]", evaluate, zero, 0.0, 0.0, second_derivative=zero, constant=value)


# ------------- Families -------------
def build_chi(eps: float, b: float) -> WeightFn:
    """Monotone ramp from 0 (x <= eps) to 1 (x >= b).

    A linear ramp on [13eps/8, b - 13eps/8] mollified at width eps/4, so
    chi' = 1/(b - 13eps/4) on [15eps/8, b - 15eps/8] and supp chi' is
    [11eps/8, b - 11eps/8].
    """
    _check_eps_b(eps, b)
    profile = get_profile()
    delta = eps / 4.0
    a0 = 13.0 * eps / 8.0
    a1 = b - 13.0 * eps / 8.0
    span = a1 - a0

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        raw = delta * (profile.ramp((x - a0) / delta) - profile.ramp((x - a1) / delta)) / span
        return np.where(x >= a1 + delta, 1.0, np.clip(raw, 0.0, 1.0))

    def derivative(x):
        x = np.asarray(x, dtype=float)
        return (profile.step((x - a0) / delta) - profile.step((x - a1) / delta)) / span

    def second_derivative(x):
        x = np.asarray(x, dtype=float)
        return (profile.rho((x - a0) / delta) - profile.rho((x - a1) / delta)) / (delta * span)

    return WeightFn(
        f"chi[eps={eps:g},b={b:g}]", evaluate, derivative,
        a0 - delta, a1 + delta, a0 - delta, np.inf, second_derivative, (a1 + delta, np.inf),
    )


def _left_cutoff(eps: float) -> WeightFn:
    # 0 for x <= eps/4, 1 for x >= eps/2
    return smooth_step(3.0 * eps / 8.0, eps / 8.0)


def build_partition(eps: float, b: float) -> Tuple[WeightFn, WeightFn, WeightFn]:
    """chi + phi + psi = 1 with supp psi in (-inf, eps/2] and phi = 1 on [eps/2, eps]."""
    chi = build_chi(eps, b)
    step = _left_cutoff(eps)
    right_edge = chi.support_hi

    def phi_value(x):
        return np.clip(step.evaluate(x) - chi.evaluate(x), 0.0, 1.0)

    def phi_derivative(x):
        return step.derivative(x) - chi.derivative(x)

    def phi_second(x):
        return step.second_derivative(x) - chi.second_derivative(x)

    def psi_value(x):
        return 1.0 - step.evaluate(x)

    def psi_derivative(x):
        return -step.derivative(x)

    def psi_second(x):
        return -step.second_derivative(x)

    phi = WeightFn(
        f"phi[eps={eps:g},b={b:g}]", phi_value, phi_derivative,
        step.support_lo, right_edge, step.support_lo, right_edge,
        phi_second, (step.support_hi, chi.support_lo),
    )
    psi = WeightFn(
        f"psi[eps={eps:g}]", psi_value, psi_derivative,
        step.support_lo, step.support_hi, -np.inf, step.support_hi,
        psi_second, (-np.inf, step.support_lo),
    )
    return chi, phi, psi


def build_power_partition(eps: float, b: float, k: int) -> Tuple[WeightFn, WeightFn, WeightFn]:
    """chi^k + phi_tilde^k + psi = 1, phi_tilde being the k-th root of the remainder.

    phi_tilde' is reported as 0 within eps/100 of either end of supp phi_tilde,
    where the root loses smoothness.
    """
    if k < 2:
        raise ValueError(f"Partition power must be >= 2, got {k}")
    chi, _, psi = build_partition(eps, b)
    step = _left_cutoff(eps)
    lo, hi = step.support_lo, chi.support_hi
    margin = EDGE_CLAMP_FRACTION * eps

    def radicand(x):
        return np.clip(step.evaluate(x) - chi.evaluate(x) ** k, 0.0, 1.0)

    def evaluate(x):
        return radicand(x) ** (1.0 / k)

    def derivative(x):
        x = np.asarray(x, dtype=float)
        value = evaluate(x)
        d_rad = step.derivative(x) - k * chi.evaluate(x) ** (k - 1) * chi.derivative(x)
        near_edge = (np.abs(x - lo) < margin) | (np.abs(x - hi) < margin) | (value <= 0.0)
        safe = np.where(near_edge, 1.0, value)
        return np.where(near_edge, 0.0, d_rad / (k * safe ** (k - 1)))

    phi_tilde = WeightFn(
        f"phi_tilde[eps={eps:g},b={b:g},k={k}]", evaluate, derivative,
        lo, hi, lo, hi, plateau=(step.support_hi, chi.support_lo),
    )
    return chi, phi_tilde, psi


def build_theta_eta(eps: float, b: float) -> Tuple[WeightFn, WeightFn]:
    """theta = 1 on [eps/5, b + eps/4] inside [eps/6, b + eps/2]; eta = 1 on [eps/7, b + 3eps/4] inside [eps/8, b + eps]."""
    _check_eps_b(eps, b)
    theta = build_plateau(eps / 6.0, eps / 5.0, b + eps / 4.0, b + eps / 2.0, f"theta[eps={eps:g},b={b:g}]")
    eta = build_plateau(eps / 8.0, eps / 7.0, b + 3.0 * eps / 4.0, b + eps, f"eta[eps={eps:g},b={b:g}]")
    return theta, eta


def build_psi_slope(A: float, ell: int) -> WeightFn:
    """psi_ell' = 1 on [-2^-ell A, 2^-ell A], supported in [-2^-(ell-1/2) A, 2^-(ell-1/2) A]."""
    if not A > 0:
        raise ValueError(f"A must be positive, got {A}")
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    inner = 2.0 ** (-ell) * A
    outer = 2.0 ** (-(ell - 0.5)) * A
    return build_plateau(-outer, -inner, inner, outer, f"psi_{ell}'[A={A:g}]")


def build_psi_sequence(A: float, ell: int) -> WeightFn:
    """psi_ell as the antiderivative of build_psi_slope, vanishing on the far left."""
    slope = build_psi_slope(A, ell)
    profile = get_profile()
    inner, outer = slope.plateau[1], slope.support_hi
    width = 0.5 * (outer - inner)
    center = 0.5 * (outer + inner)

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        return width * (profile.ramp((x + center) / width) - profile.ramp((x - center) / width))

    return WeightFn(
        f"psi_{ell}[A={A:g}]", evaluate, slope.evaluate, -outer, outer,
        -outer, np.inf, slope.derivative,
    )


def translate(w: WeightFn, shift: float) -> WeightFn:
    """x -> w(x + shift); supports move by -shift."""
    if shift == 0.0:
        return w

    def evaluate(x):
        return w.evaluate(np.asarray(x, dtype=float) + shift)

    def derivative(x):
        return w.derivative(np.asarray(x, dtype=float) + shift)

    second = None
    if w.second_derivative is not None:
        def second(x):
            return w.second_derivative(np.asarray(x, dtype=float) + shift)

    plateau = None
    if w.plateau is not None:
        plateau = (w.plateau[0] - shift, w.plateau[1] - shift)
    return WeightFn(
        f"{w.name}(x{shift:+g})", evaluate, derivative,
        w.support_lo - shift, w.support_hi - shift,
        w.value_lo - shift, w.value_hi - shift,
        second, plateau, w.constant,
    )


def interval_distance(first: Tuple[float, float], second: Tuple[float, float]) -> float:
    """Gap between two closed intervals, 0 when they overlap."""
    return max(0.0, second[0] - first[1], first[0] - second[1])
