"""Modified Bessel functions I_0, I_1, K_0, K_1 for positive real arguments.

I: ascending power series up to x = 15, Hankel asymptotic expansion beyond.
K: power series with the logarithmic term up to x = 2, the integral
representation K_nu(x) = int_0^inf exp(-x cosh s) cosh(nu s) ds in between
(trapezoid rule, which converges geometrically for this integrand), and the
asymptotic expansion beyond x = 15.

``scaled=True`` returns exp(-x) I_nu(x) and exp(x) K_nu(x) respectively.
"""

from __future__ import annotations

import math

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061
SERIES_MAX_I = 15.0
SERIES_MAX_K = 2.0
ASYMPTOTIC_MIN_K = 15.0
I_OVERFLOW = 700.0


def _check(order: int, x: float) -> None:
    if order not in (0, 1):
        raise DomainError(f"order must be 0 or 1, got {order}")
    if not x > 0.0:
        raise DomainError(f"argument must be positive, got {x}")


def _i_series(order: int, x: float) -> float:
    y = 0.25 * x * x
    term = 1.0 if order == 0 else 0.5 * x
    total = term
    k = 0
    while True:
        k += 1
        term *= y / (k * (k + order))
        total += term
        if term < 1e-17 * total:
            return total


def _asymptotic_terms(order: int, x: float, sign: float) -> float:
    """sum_k sign^k a_k(nu) / x^k, truncated at the smallest term."""
    mu = 4.0 * order * order
    total = 1.0
    term = 1.0
    k = 0
    while k < 60:
        k += 1
        nxt = term * sign * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(nxt) >= abs(term) or nxt == 0.0:
            break
        term = nxt
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return total


def _k_series(order: int, x: float) -> float:
    y = 0.25 * x * x
    log_half = math.log(0.5 * x)
    if order == 0:
        # K0 = -(ln(x/2) + gamma) I0 + sum y^k/(k!)^2 H_k
        term = 1.0
        harmonic = 0.0
        total = -(log_half + EULER_GAMMA)
        k = 0
        while True:
            k += 1
            term *= y / (k * k)
            harmonic += 1.0 / k
            inc = term * (harmonic - log_half - EULER_GAMMA)
            total += inc
            if abs(inc) < 1e-17 * abs(total) and k > 2:
                return total
    # K1 = 1/x + ln(x/2) I1 - (x/4) sum y^k/(k!(k+1)!) (psi(k+1) + psi(k+2))
    total = 1.0 / x + log_half * _i_series(1, x)
    term = 1.0
    psi1 = -EULER_GAMMA  # psi(k+1)
    psi2 = 1.0 - EULER_GAMMA  # psi(k+2)
    acc = psi1 + psi2
    k = 0
    while True:
        k += 1
        term *= y / (k * (k + 1))
        psi1 += 1.0 / k
        psi2 += 1.0 / (k + 1)
        inc = term * (psi1 + psi2)
        acc += inc
        if abs(inc) < 1e-17 * abs(acc) and k > 2:
            break
    return total - 0.25 * x * acc


def _k_integral_scaled(order: int, x: float) -> float:
    """exp(x) K_nu(x) by the trapezoid rule on int_0^inf exp(-x (cosh s - 1)) cosh(nu s) ds."""
    h = 0.05 / max(1.0, math.sqrt(x) / 4.0)
    total = 0.5
    k = 0
    while True:
        k += 1
        s = k * h
        f = math.exp(-x * (math.cosh(s) - 1.0)) * (math.cosh(order * s) if order else 1.0)
        total += f
        if f < 1e-18 * total:
            return total * h


def bessel_i(order: int, x: float, scaled: bool = False) -> float:
    _check(order, x)
    if x <= SERIES_MAX_I:
        v = _i_series(order, x)
        return v * math.exp(-x) if scaled else v
    body = _asymptotic_terms(order, x, -1.0) / math.sqrt(2.0 * math.pi * x)
    if scaled:
        return body
    if x > I_OVERFLOW:
        raise DomainError(f"I_{order}({x}) overflows; request the scaled value")
    return body * math.exp(x)


def bessel_k(order: int, x: float, scaled: bool = False) -> float:
    _check(order, x)
    if x <= SERIES_MAX_K:
        v = _k_series(order, x)
        return v * math.exp(x) if scaled else v
    if x <= ASYMPTOTIC_MIN_K:
        body = _k_integral_scaled(order, x)
    else:
        body = math.sqrt(math.pi / (2.0 * x)) * _asymptotic_terms(order, x, 1.0)
    return body if scaled else body * math.exp(-x)


def bessel_i_prime(order: int, x: float) -> float:
    if order == 0:
        return bessel_i(1, x)
    return bessel_i(0, x) - bessel_i(1, x) / x


def bessel_k_prime(order: int, x: float) -> float:
    if order == 0:
        return -bessel_k(1, x)
    return -bessel_k(0, x) - bessel_k(1, x) / x


def wronskian_residual(order: int, x: float) -> float:
    """Relative deviation of I K' - I' K from -1/x."""
    w = bessel_i(order, x) * bessel_k_prime(order, x) - bessel_i_prime(order, x) * bessel_k(order, x)
    return abs(w * x + 1.0)
