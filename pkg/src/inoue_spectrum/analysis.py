"""Per-mode analysis: the two-component system for (u, v), its decaying
solutions, the matching determinant and the weighted-space bookkeeping.

For a mode with coefficients P (real) and Q (complex) the unknowns obey

    u' = -P e^t u + Q e^{-t/2} v
    v' = conj(Q) e^{-t/2} u + (1/2 + P e^t) v

and decouple into -u'' + U_u u = 0, -v'' + U_v v = 0 with the potentials
below.  A mode contributes to the spectrum only if some nonzero solution
decays at both ends of the line.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .algebra import EigenData
from .bessel import bessel_i, bessel_k
from .errors import BranchUndefined, DomainError, EmptyInput
from .integrate import RenormResult, integrate_system
from .lattice import ModeCoeff

log = logging.getLogger(__name__)

P_ZERO = 1e-8
RATE = 40.0
FLAG_THRESHOLD = 1e-3


@dataclass(frozen=True)
class TwistParameter:
    z: complex
    mu: complex
    delta: float

    @classmethod
    def from_z(cls, z: complex, alpha: float) -> "TwistParameter":
        z = complex(z)
        if z == 0:
            raise DomainError("twist must be nonzero")
        mu = cmath.log(z)
        return cls(z=z, mu=mu, delta=mu.real / math.log(alpha) - 0.25)

    @classmethod
    def from_delta(cls, delta: float, alpha: float, phase: float = 0.0) -> "TwistParameter":
        mu = complex((delta + 0.25) * math.log(alpha), phase)
        return cls(z=cmath.exp(mu), mu=mu, delta=float(delta))


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    rate: float = RATE
    flag_threshold: float = FLAG_THRESHOLD


@dataclass(frozen=True)
class MatchingResult:
    mode: tuple[int, int, int]
    delta: float
    det: complex
    logmag_plus: float
    logmag_minus: float
    T_plus: float
    T_minus: float
    steps: int
    flagged: bool
    branch: str = "shooting"
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mode": list(self.mode),
            "delta": self.delta,
            "det": {"re": self.det.real, "im": self.det.imag},
            "abs_det": abs(self.det),
            "logmag_plus": self.logmag_plus,
            "logmag_minus": self.logmag_minus,
            "T_plus": self.T_plus,
            "T_minus": self.T_minus,
            "steps": self.steps,
            "flagged": self.flagged,
            "branch": self.branch,
            **({"diagnostics": self.diagnostics} if self.diagnostics else {}),
        }


def ode_velocity(c: ModeCoeff, t: float, s: tuple[complex, complex]) -> tuple[complex, complex]:
    u, v = s
    ept = c.P * math.exp(t)
    off = math.exp(-0.5 * t)
    return (-ept * u + c.Q * off * v, c.Q.conjugate() * off * u + (0.5 + ept) * v)


def _rhs(c: ModeCoeff) -> Callable[[float, complex, complex], tuple[complex, complex]]:
    P, Q, Qc = c.P, c.Q, c.Q.conjugate()
    exp = math.exp

    def rhs(t: float, u: complex, v: complex) -> tuple[complex, complex]:
        ept = P * exp(t)
        off = exp(-0.5 * t)
        return (-ept * u + Q * off * v, Qc * off * u + (0.5 + ept) * v)

    return rhs


def sl_potential_u(c: ModeCoeff, t):
    pe = c.P * np.exp(t)
    return pe * (pe - 1.0) + abs(c.Q) ** 2 * np.exp(-t)


def sl_potential_v(c: ModeCoeff, t):
    pe = c.P * np.exp(t)
    return pe * (pe + 2.0) + abs(c.Q) ** 2 * np.exp(-t) + 0.25


def system_matrix(c: ModeCoeff, t: float) -> np.ndarray:
    ept = c.P * math.exp(t)
    off = math.exp(-0.5 * t)
    return np.array([[-ept, c.Q * off], [c.Q.conjugate() * off, 0.5 + ept]], dtype=complex)


def truncation_times(c: ModeCoeff, rate: float = RATE) -> tuple[float, float]:
    """(T_minus, T_plus) such that the eigen-gap integrated from each end to
    t = 0 is about 2*rate, i.e. the unwanted solution is suppressed by e^{-2 rate}."""
    T_plus = math.log1p(rate / abs(c.P))
    T_minus = 2.0 * math.log1p(rate / (2.0 * abs(c.Q)))
    return T_minus, T_plus


def _unit_phase(vec: np.ndarray) -> tuple[complex, complex]:
    vec = vec / np.linalg.norm(vec)
    k = int(np.argmax(np.abs(vec)))
    vec = vec * (abs(vec[k]) / vec[k])
    return complex(vec[0]), complex(vec[1])


def decaying_init(c: ModeCoeff, end: Literal["plus", "minus"], T: float) -> tuple[complex, complex]:
    """Unit direction of the solution decaying at the given end, from the
    frozen-coefficient eigenvector at t = +T (most negative rate) or t = -T
    (most positive rate)."""
    if abs(c.P) <= P_ZERO:
        raise BranchUndefined(f"|P| = {abs(c.P):.3e}: use the Bessel branch")
    if end not in ("plus", "minus"):
        raise ValueError("end must be 'plus' or 'minus'")
    t = T if end == "plus" else -T
    w, V = np.linalg.eigh(system_matrix(c, t))
    idx = 0 if end == "plus" else 1
    return _unit_phase(V[:, idx])


def integrate_renormalized(
    c: ModeCoeff,
    t_from: float,
    t_to: float,
    init: tuple[complex, complex],
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> RenormResult:
    return integrate_system(_rhs(c), t_from, t_to, init, rtol=rtol, atol=atol)


def trajectory(c: ModeCoeff, ts: np.ndarray, init: tuple[complex, complex], rtol: float = 1e-12, atol: float = 1e-14) -> np.ndarray:
    """Solution values (not renormalized) at the points ``ts``, shape (len(ts), 2)."""
    out = np.empty((len(ts), 2), dtype=complex)
    state, logmag = (complex(init[0]), complex(init[1])), 0.0
    out[0] = state
    for i in range(1, len(ts)):
        r = integrate_renormalized(c, float(ts[i - 1]), float(ts[i]), state, rtol=rtol, atol=atol)
        logmag += r.logmag
        state = r.state
        out[i] = np.array(state) * math.exp(logmag)
    return out


def decoupling_residual(c: ModeCoeff, t0: float, length: float, init: tuple[complex, complex]) -> tuple[float, float]:
    """Worst relative residual of -y'' + U y along a trajectory, for y = u and y = v.

    Second derivatives come from a five-point stencil with step 0.02 / (local
    rate), which balances stencil truncation against integrator noise.
    Points where |y| is below 1e-3 of its maximum are skipped.
    """
    probe = np.linspace(t0, t0 + length, 64)
    lam = math.sqrt(max(np.abs(sl_potential_u(c, probe)).max(), np.abs(sl_potential_v(c, probe)).max(), 1.0))
    h = 0.02 / lam
    n = max(8, int(length / h))
    h = length / n
    ts = t0 + h * np.arange(n + 1)
    Y = trajectory(c, ts, init)
    out = []
    for k, U in ((0, sl_potential_u), (1, sl_potential_v)):
        y = Y[:, k]
        d2 = (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (12 * h * h)
        Uy = U(c, ts[2:-2]) * y[2:-2]
        res = np.abs(Uy - d2) / np.maximum(np.abs(d2), np.abs(Uy))
        mask = np.abs(y[2:-2]) > 1e-3 * np.abs(y).max()
        out.append(float(res[mask].max()))
    return out[0], out[1]


@dataclass(frozen=True)
class _Shooting:
    det: complex
    logmag_plus: float
    logmag_minus: float
    T_plus: float
    T_minus: float
    steps: int


def _shoot(c: ModeCoeff, cfg: IntegratorConfig, T_shift: float = 0.0) -> _Shooting:
    T_minus, T_plus = truncation_times(c, cfg.rate)
    T_minus += T_shift
    T_plus += T_shift
    d_plus = decaying_init(c, "plus", T_plus)
    d_minus = decaying_init(c, "minus", T_minus)
    rp = integrate_renormalized(c, T_plus, 0.0, d_plus, cfg.rtol, cfg.atol)
    rm = integrate_renormalized(c, -T_minus, 0.0, d_minus, cfg.rtol, cfg.atol)
    (m0, m1), (p0, p1) = rm.state, rp.state
    det = m0 * p1 - m1 * p0
    return _Shooting(det, rp.logmag, rm.logmag, T_plus, T_minus, rp.steps + rm.steps)


def matching_determinant(
    c: ModeCoeff,
    tw: TwistParameter,
    cfg: IntegratorConfig = IntegratorConfig(),
    T_shift: float = 0.0,
) -> MatchingResult:
    """Determinant of the two end-decaying unit directions transported to t = 0.

    The system does not involve the twist; super-exponential decay at both
    ends dominates every weight e^{(delta - 1/4) t}, so ``tw.delta`` is only
    carried for reporting.
    """
    if c.mode == (0, 0, 0):
        raise BranchUndefined("the zero mode is the finite orbit")
    s = _shoot(c, cfg, T_shift)
    return _result_from(c, tw.delta, s, cfg)


def _result_from(c: ModeCoeff, delta: float, s: _Shooting, cfg: IntegratorConfig) -> MatchingResult:
    return MatchingResult(
        mode=tuple(c.mode), delta=float(delta), det=s.det,
        logmag_plus=s.logmag_plus, logmag_minus=s.logmag_minus,
        T_plus=s.T_plus, T_minus=s.T_minus, steps=s.steps,
        flagged=abs(s.det) < cfg.flag_threshold,
    )


def matching_over_grid(c: ModeCoeff, deltas, cfg: IntegratorConfig = IntegratorConfig()) -> list[MatchingResult]:
    """One shooting run reused for every delta of the grid."""
    if c.mode == (0, 0, 0):
        raise BranchUndefined("the zero mode is the finite orbit")
    s = _shoot(c, cfg)
    return [_result_from(c, d, s, cfg) for d in deltas]


# ---------------------------------------------------------------------------
# finite-difference oracle


def _fd_sigma_min(potential: np.ndarray, h: float) -> float:
    from scipy.sparse import diags
    from scipy.sparse.linalg import eigsh

    n = potential.size
    off = np.full(n - 1, -1.0 / h**2)
    L = diags([off, 2.0 / h**2 + potential, off], [-1, 0, 1], format="csc")
    # fixed start vector: ARPACK otherwise seeds randomly and the last digits drift
    w = eigsh(L, k=1, sigma=0.0, which="LM", v0=np.ones(n), return_eigenvectors=False)
    return float(abs(w[0]))


def fd_oracle(c: ModeCoeff, rate: float = RATE, points_per_unit: float | None = None) -> dict:
    """Smallest singular values of the Dirichlet discretizations of both
    Sturm-Liouville forms on [-T_minus, T_plus].

    A two-sided decaying solution would put both operators near a kernel, so
    the near-kernel indicator is the larger of the two values.
    """
    T_minus, T_plus = truncation_times(c, rate)
    u_peak = max(float(sl_potential_u(c, T_plus)), float(sl_potential_u(c, -T_minus)), 1.0)
    v_peak = max(float(sl_potential_v(c, T_plus)), float(sl_potential_v(c, -T_minus)), 1.0)
    h = 0.05 / math.sqrt(max(u_peak, v_peak))
    if points_per_unit is not None:
        h = min(h, 1.0 / points_per_unit)
    n = int(math.ceil((T_plus + T_minus) / h))
    h = (T_plus + T_minus) / n
    t = -T_minus + h * np.arange(1, n)
    sigma_u = _fd_sigma_min(sl_potential_u(c, t), h)
    sigma_v = _fd_sigma_min(sl_potential_v(c, t), h)
    return {"sigma_u": sigma_u, "sigma_v": sigma_v, "sigma": max(sigma_u, sigma_v), "h": h, "points": n - 1}


# ---------------------------------------------------------------------------
# weighted spaces


def weighted_norm(t, values, w: float) -> float:
    """Trapezoid approximation of (int e^{2 w t} |f(t)|^2 dt)^{1/2}."""
    t = np.asarray(t, dtype=float)
    f = np.asarray(values)
    if t.size == 0:
        raise EmptyInput("no samples")
    if t.size == 1:
        return 0.0
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise ValueError("samples must be strictly increasing in t")
    if np.ptp(dt) > 1e-9 * max(1.0, abs(dt[0])) * t.size:
        raise ValueError("samples must be uniformly spaced")
    integrand = np.exp(2.0 * w * t) * np.abs(f) ** 2
    return float(math.sqrt(np.trapezoid(integrand, t)))


@dataclass(frozen=True)
class SeriesNorms:
    series: float
    line: float


def assemble_series(
    eigen: EigenData,
    f: Callable[[np.ndarray], np.ndarray],
    tw: TwistParameter,
    n_terms: int,
    component: Literal["b", "c"] = "b",
    step: float = 1e-3,
) -> SeriesNorms:
    """Norm of the Fourier-Laplace transformed orbit series over one period
    versus the weighted line norm with weight delta - 1/4.

    ``component="b"``: ``f`` is u = b_0, terms carry conj(beta)^n e^{n mu},
    transform parameter conj(beta) e^mu.  ``component="c"``: ``f`` is
    v = e^{t/2} c_0, terms carry e^{n mu}, transform parameter e^mu.
    Distinct orbit modes have orthonormal torus characters, so the fibre
    integral reduces to a sum over n of one-period integrals.
    """
    if n_terms < 1:
        raise EmptyInput("need at least one term on each side")
    L = eigen.log_alpha
    k = max(2, int(math.ceil(L / step)))
    tt = np.linspace(0.0, L, k + 1)
    if component == "b":
        zt = eigen.beta.conjugate() * cmath.exp(tw.mu)
        coef = eigen.beta.conjugate() * cmath.exp(tw.mu)

        def g(s):
            return f(s)
    elif component == "c":
        zt = cmath.exp(tw.mu)
        coef = cmath.exp(tw.mu)

        def g(s):
            return np.exp(-0.5 * s) * f(s)
    else:
        raise ValueError("component must be 'b' or 'c'")
    transform = np.abs(np.exp(tt / L * cmath.log(zt)))
    total = 0.0
    for n in range(-n_terms, n_terms + 1):
        vals = transform * abs(coef**n) * np.abs(g(tt + n * L))
        total += float(np.trapezoid(vals**2, tt))
    series = math.sqrt(total)
    # independent, finer grid so the comparison also exercises the quadrature
    grid = np.linspace(-n_terms * L, (n_terms + 1) * L, 3 * (2 * n_terms + 1) * k + 1)
    line = weighted_norm(grid, f(grid), tw.delta - 0.25)
    return SeriesNorms(series=series, line=line)


# ---------------------------------------------------------------------------
# P = 0 branch


@dataclass(frozen=True)
class PZeroVerdict:
    solution_found: bool
    coefficients: tuple[float, float] | None
    tails: dict

    @property
    def kind(self) -> str:
        return "SolutionFound" if self.solution_found else "NoNonzeroSolution"


def _log_weighted_integrand(kind: str, q: float, delta: float, t: np.ndarray) -> np.ndarray:
    """log of e^{2(delta-1/4)t} |f(t)|^2 for a Bessel basis function of
    x = 2 q e^{-t/2}, computed from the scaled functions to avoid overflow."""
    order = 1 if kind[1] == "1" else 0
    out = np.empty_like(t)
    for i, ti in enumerate(t):
        x = 2.0 * q * math.exp(-0.5 * ti)
        if kind[0] == "I":
            lf = math.log(bessel_i(order, x, scaled=True)) + x
        else:
            lf = math.log(bessel_k(order, x, scaled=True)) - x
        out[i] = 2.0 * lf + 2.0 * (delta - 0.25) * ti
    return out


def p_zero_membership(q: float, delta: float, t_max: float = 60.0, slope_tol: float = 1e-2, samples: int = 241) -> PZeroVerdict:
    """Weighted-L^2 membership of the P = 0 solutions.

    With x = 2 q e^{-t/2}, the solutions are v = C1 I_1(x) + C2 K_1(x) and,
    through the first equation of the system, u proportional to
    C1 I_0(x) - C2 K_0(x).  A basis function is convergent at an end when the
    log of its weighted integrand decreases with slope below -slope_tol over
    the far half of the tail window.  Within each pair one function dominates
    the other at every end, so a combination converges at an end iff its
    coefficients vanish on the divergent members there.
    """
    if not q > 0:
        raise DomainError("q must be positive")
    tails: dict[str, dict[str, float]] = {}
    convergent = {0: True, 1: True}
    basis = {"v": ("I1", "K1"), "u": ("I0", "K0")}
    for comp, kinds in basis.items():
        for idx, kind in enumerate(kinds):
            for end, sign in (("minus", -1.0), ("plus", 1.0)):
                t = sign * np.linspace(0.5 * t_max, t_max, samples)
                lg = _log_weighted_integrand(kind, q, delta, t)
                slope = float(np.polyfit(np.abs(t), lg, 1)[0])
                conv = slope < -slope_tol
                tails[f"{comp}:{kind}:{end}"] = {"slope": slope, "convergent": conv}
                convergent[idx] = convergent[idx] and conv
    for idx in (0, 1):
        if convergent[idx]:
            coeffs = (1.0, 0.0) if idx == 0 else (0.0, 1.0)
            return PZeroVerdict(True, coeffs, tails)
    return PZeroVerdict(False, None, tails)


def p_zero_result(c: ModeCoeff, delta: float) -> MatchingResult:
    """MatchingResult-shaped record for a mode routed to the Bessel branch."""
    log.warning("mode %s has |P| = %.3e <= %.1e; using the Bessel branch", c.mode, abs(c.P), P_ZERO)
    verdict = p_zero_membership(abs(c.Q), delta)
    return MatchingResult(
        mode=tuple(c.mode), delta=float(delta), det=complex(0.0 if verdict.solution_found else 1.0),
        logmag_plus=0.0, logmag_minus=0.0, T_plus=0.0, T_minus=0.0, steps=0,
        flagged=verdict.solution_found, branch="bessel",
        diagnostics={"verdict": verdict.kind},
    )
