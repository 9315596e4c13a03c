"""Adaptive Dormand-Prince 5(4) stepping for two-component complex linear systems.

The state is renormalized to unit norm whenever its norm leaves
[RENORM_LO, RENORM_HI]; the discarded logarithmic magnitude is accumulated
so that the true solution is ``exp(logmag) * state`` for a unit initial state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import StepUnderflow

RENORM_LO = 1e-6
RENORM_HI = 1e6
MIN_STEP = 1e-14

Rhs = Callable[[float, complex, complex], tuple[complex, complex]]

# Dormand-Prince tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40


@dataclass(frozen=True)
class RenormResult:
    state: tuple[complex, complex]
    logmag: float
    steps: int
    rejected: int


def integrate_system(
    rhs: Rhs,
    t_from: float,
    t_to: float,
    init: tuple[complex, complex],
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_steps: int = 5_000_000,
) -> RenormResult:
    if t_from == t_to:
        raise ValueError("t_from and t_to must differ")
    y0, y1 = complex(init[0]), complex(init[1])
    norm = math.hypot(abs(y0), abs(y1))
    if norm == 0.0:
        raise ValueError("initial state must be nonzero")
    logmag = math.log(norm)
    y0, y1 = y0 / norm, y1 / norm

    span = t_to - t_from
    direction = 1.0 if span > 0 else -1.0
    t = t_from
    k1 = rhs(t, y0, y1)
    d1 = math.hypot(abs(k1[0]), abs(k1[1]))
    h = 0.01 / d1 if d1 > 1e-5 else 0.01
    h = direction * min(h, abs(span))
    steps = rejected = 0

    while (t_to - t) * direction > MIN_STEP * max(1.0, abs(t_to)):
        if steps + rejected > max_steps:
            raise StepUnderflow("step budget exhausted")
        if (t + h - t_to) * direction > 0:
            h = t_to - t
        if abs(h) < MIN_STEP * max(1.0, abs(t)):
            raise StepUnderflow(f"step size {abs(h):.3e} below minimum at t = {t}")
        a0, a1 = k1
        s0, s1 = y0 + h * A21 * a0, y1 + h * A21 * a1
        b0, b1 = rhs(t + C2 * h, s0, s1)
        s0 = y0 + h * (A31 * a0 + A32 * b0)
        s1 = y1 + h * (A31 * a1 + A32 * b1)
        c0, c1 = rhs(t + C3 * h, s0, s1)
        s0 = y0 + h * (A41 * a0 + A42 * b0 + A43 * c0)
        s1 = y1 + h * (A41 * a1 + A42 * b1 + A43 * c1)
        d0_, d1_ = rhs(t + C4 * h, s0, s1)
        s0 = y0 + h * (A51 * a0 + A52 * b0 + A53 * c0 + A54 * d0_)
        s1 = y1 + h * (A51 * a1 + A52 * b1 + A53 * c1 + A54 * d1_)
        e0, e1 = rhs(t + C5 * h, s0, s1)
        s0 = y0 + h * (A61 * a0 + A62 * b0 + A63 * c0 + A64 * d0_ + A65 * e0)
        s1 = y1 + h * (A61 * a1 + A62 * b1 + A63 * c1 + A64 * d1_ + A65 * e1)
        f0, f1 = rhs(t + h, s0, s1)
        n0 = y0 + h * (B1 * a0 + B3 * c0 + B4 * d0_ + B5 * e0 + B6 * f0)
        n1 = y1 + h * (B1 * a1 + B3 * c1 + B4 * d1_ + B5 * e1 + B6 * f1)
        g0, g1 = rhs(t + h, n0, n1)
        err0 = h * (E1 * a0 + E3 * c0 + E4 * d0_ + E5 * e0 + E6 * f0 + E7 * g0)
        err1 = h * (E1 * a1 + E3 * c1 + E4 * d1_ + E5 * e1 + E6 * f1 + E7 * g1)
        ynorm = max(math.hypot(abs(y0), abs(y1)), math.hypot(abs(n0), abs(n1)))
        scale = atol + rtol * ynorm
        err = math.hypot(abs(err0), abs(err1)) / (scale * math.sqrt(2.0))

        if err <= 1.0:
            t = t + h
            y0, y1 = n0, n1
            k1 = (g0, g1)
            steps += 1
            norm = math.hypot(abs(y0), abs(y1))
            if norm < RENORM_LO or norm > RENORM_HI:
                logmag += math.log(norm)
                y0, y1 = y0 / norm, y1 / norm
                k1 = (g0 / norm, g1 / norm)
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        else:
            rejected += 1
            fac = max(0.2, 0.9 * err ** -0.2)
        h *= fac

    norm = math.hypot(abs(y0), abs(y1))
    logmag += math.log(norm)
    return RenormResult(state=(y0 / norm, y1 / norm), logmag=logmag, steps=steps, rejected=rejected)
