import cmath
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from inoue_spectrum import TwistParameter, assemble_series, matching_determinant, mode_coefficients, weighted_norm
from inoue_spectrum.analysis import (
    IntegratorConfig,
    decaying_init,
    decoupling_residual,
    fd_oracle,
    integrate_renormalized,
    matching_over_grid,
    ode_velocity,
    p_zero_membership,
    p_zero_result,
    sl_potential_u,
    sl_potential_v,
    system_matrix,
    truncation_times,
)
from inoue_spectrum.bessel import bessel_i, bessel_k
from inoue_spectrum.errors import BranchUndefined, DomainError, EmptyInput, StepUnderflow
from inoue_spectrum.lattice import ModeCoeff, apply_monodromy, orbit_representatives

X = (9, 9, 9)  # placeholder mode for synthetic coefficients


def coeff(P, Q):
    return ModeCoeff(mode=X, P=P, Q=complex(Q))


def test_ode_velocity_examples():
    assert ode_velocity(coeff(0, 0), 0.0, (1, 1)) == (0, 0.5)
    assert ode_velocity(coeff(1, 0), 0.0, (1, 0)) == (-1, 0)
    assert ode_velocity(coeff(0, 2), 0.0, (0, 1)) == (2, 0.5)


def test_ode_velocity_conjugate_coupling():
    du, dv = ode_velocity(coeff(0, 1 + 2j), 0.0, (1, 0))
    assert du == 0 and dv == 1 - 2j


def test_potential_examples():
    q = 1.7
    for t in (-3.0, 0.0, 2.5):
        assert sl_potential_u(coeff(0, q), t) == pytest.approx(q * q * math.exp(-t))
        p = 0.8
        U = sl_potential_u(coeff(-p, q), t)
        assert U == pytest.approx(p * math.exp(t) * (p * math.exp(t) + 1) + q * q * math.exp(-t))
        assert U >= p * p * math.exp(2 * t)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 50), st.floats(1e-6, 50), st.floats(-20, 10))
def test_potential_positivity(p, q, t):
    assert sl_potential_u(coeff(-p, q), t) > 0
    assert sl_potential_v(coeff(p, q), t) > 0


def test_system_matrix_is_hermitian():
    A = system_matrix(coeff(1.3, 2 - 1j), 0.4)
    np.testing.assert_allclose(A, A.conj().T)


def test_decaying_init_plus_directions():
    d = decaying_init(coeff(-1.0, 1 + 1j), "plus", 12.0)
    assert abs(d[0]) < 1e-6 and abs(abs(d[1]) - 1) < 1e-12
    d = decaying_init(coeff(1.0, 1 + 1j), "plus", 12.0)
    assert abs(d[1]) < 1e-6 and abs(abs(d[0]) - 1) < 1e-12


def test_decaying_init_plus_growth_backward():
    # carried inward from T + 1 to T the decaying solution grows like exp(|P| e^t)
    c = coeff(-1.0, 0.5)
    d = decaying_init(c, "plus", 11.0)
    r = integrate_renormalized(c, 11.0, 10.0, d)
    assert r.logmag == pytest.approx(math.exp(11) - math.exp(10) - 0.5, rel=1e-4)


def test_decaying_init_minus_growth_factor():
    c = coeff(0.7, 2.0 - 1.0j)
    T = 8.0
    d = decaying_init(c, "minus", T + 1)
    q = abs(c.Q)
    assert abs(d[0] - c.Q / q * d[1]) < 1e-2  # dominant balance u ~ (Q/|Q|) v
    r = integrate_renormalized(c, -T - 1, -T, d)
    expected = 2 * q * (math.exp((T + 1) / 2) - math.exp(T / 2))
    # trace / 2 = 1/4 adds to the rate
    assert abs(r.logmag - expected) < 0.3 + 1e-3 * expected


def test_decaying_init_branch_undefined():
    with pytest.raises(BranchUndefined):
        decaying_init(coeff(1e-9, 1.0), "plus", 5.0)


def test_integrate_diagonal_closed_form():
    P = -0.6
    r = integrate_renormalized(coeff(P, 0), 0.0, 1.0, (0, 1))
    assert r.logmag == pytest.approx(0.5 + P * (math.e - 1), abs=1e-8)
    assert abs(r.state[0]) == 0 and abs(abs(r.state[1]) - 1) < 1e-14


def test_integrate_reversal_inverts_logmag():
    c = coeff(-0.6, 0)
    f = integrate_renormalized(c, 0.0, 1.5, (0, 1))
    b = integrate_renormalized(c, 1.5, 0.0, (0, 1))
    assert f.logmag == pytest.approx(-b.logmag, abs=1e-8)


def test_integrate_renormalizes_long_growth():
    P = -1.0
    r = integrate_renormalized(coeff(P, 0), 0.0, 3.0, (0, 1), rtol=1e-12, atol=1e-16)
    assert r.logmag == pytest.approx(1.5 + P * (math.exp(3) - 1), abs=1e-8)


def test_integrate_rejects_zero_length():
    with pytest.raises(ValueError):
        integrate_renormalized(coeff(1, 1), 1.0, 1.0, (1, 0))


def test_integrate_step_underflow():
    with pytest.raises(StepUnderflow):
        integrate_renormalized(coeff(1, 1), 0.0, 1.0, (1, 0), rtol=1e-30, atol=1e-300)


def test_integrate_deterministic():
    c = coeff(2.1, 0.3 + 4j)
    a = integrate_renormalized(c, 2.0, 0.0, (0.6, 0.8j))
    b = integrate_renormalized(c, 2.0, 0.0, (0.6, 0.8j))
    assert a == b


def test_transport_matches_independent_integrator(a0):
    """Any generic start at large t, carried backward by scipy, converges to
    the decaying-at-+infinity direction; likewise forward from very negative t."""
    _, _, B = a0
    for mode in [(1, 0, 0), (0, 1, -1), (-3, 2, 1)]:
        c = mode_coefficients(B, mode)
        T_minus, T_plus = truncation_times(c)
        res = matching_determinant(c, TwistParameter.from_delta(0.0, 2.0))

        def f(t, y):
            du, dv = ode_velocity(c, t, (y[0] + 1j * y[1], y[2] + 1j * y[3]))
            return [du.real, du.imag, dv.real, dv.imag]

        ours = []
        for t_start, d in ((T_plus, decaying_init(c, "plus", T_plus)), (-T_minus, decaying_init(c, "minus", T_minus))):
            ours.append(integrate_renormalized(c, t_start, 0.0, d).state)
        refs = []
        for t_start in (T_plus + 0.5, -T_minus - 0.5):
            # generic start, short hop then renormalize manually
            y = np.array([0.3, 0.1, 0.5, -0.2])
            ts = np.linspace(t_start, 0.0, 400)
            for a, b in zip(ts[:-1], ts[1:]):
                sol = solve_ivp(f, (a, b), y, method="DOP853", rtol=1e-12, atol=1e-14)
                y = sol.y[:, -1]
                y = y / np.linalg.norm(y)
            refs.append((y[0] + 1j * y[1], y[2] + 1j * y[3]))
        for (a0_, a1_), (b0_, b1_) in zip(ours, refs):
            assert abs(a0_ * b1_ - a1_ * b0_) < 1e-8
        det_ref = refs[1][0] * refs[0][1] - refs[1][1] * refs[0][0]
        assert abs(abs(det_ref) - abs(res.det)) < 1e-8


def test_matching_zero_mode_rejected(a0):
    c = mode_coefficients(a0[2], (0, 0, 0))
    with pytest.raises(BranchUndefined):
        matching_determinant(c, TwistParameter.from_delta(0.0, 2.0))


def test_matching_a0_mode100(a0):
    _, E, B = a0
    c = mode_coefficients(B, (1, 0, 0))
    res = matching_determinant(c, TwistParameter.from_delta(0.0, E.alpha))
    assert abs(res.det) > 1e-3
    assert abs(res.det) <= 1 + 1e-12
    assert not res.flagged
    assert fd_oracle(c)["sigma"] > 1e-3


def test_matching_independent_of_delta(a0):
    _, E, B = a0
    c = mode_coefficients(B, (0, 2, -1))
    dets = [matching_determinant(c, TwistParameter.from_delta(d, E.alpha)).det for d in (-0.25, 0.0, 0.25)]
    assert max(abs(d - dets[0]) for d in dets) <= 1e-10
    grid = matching_over_grid(c, [-0.25, 0.25])
    assert abs(grid[0].det - dets[0]) <= 1e-10


def test_matching_truncation_invariance(a0):
    M, E, B = a0
    tw = TwistParameter.from_delta(0.1, E.alpha)
    for r in orbit_representatives(M, 1, B):
        c = mode_coefficients(B, r)
        d0 = matching_determinant(c, tw)
        d1 = matching_determinant(c, tw, T_shift=1.0)
        assert abs(abs(d0.det) - abs(d1.det)) <= 2e-3


def test_matching_orbit_consistency(surfaces):
    for m in (0, 1):
        M, E, B = surfaces[m]
        tw = TwistParameter.from_delta(-0.2, E.alpha)
        for r in orbit_representatives(M, 1, B)[:6]:
            a = matching_determinant(mode_coefficients(B, r), tw)
            b = matching_determinant(mode_coefficients(B, apply_monodromy(M, r)), tw)
            assert a.flagged == b.flagged is False


def test_fd_oracle_detects_planted_kernel():
    """Sanity of the oracle itself: a potential with a known zero mode."""
    from inoue_spectrum.analysis import _fd_sigma_min

    # -y'' + (1 - 2 sech^2 t) y = 0 has the L^2 solution sech t
    h = 0.005
    t = np.arange(-20 + h, 20, h)
    U = 1 - 2 / np.cosh(t) ** 2
    assert _fd_sigma_min(U, h) < 1e-3
    assert _fd_sigma_min(U + 0.5, h) > 0.4


def test_decoupling_consistency(a0):
    _, _, B = a0
    rng = random.Random(7)
    for _ in range(4):
        mode = (rng.randint(-3, 3), rng.randint(-3, 3), rng.randint(1, 3))
        c = mode_coefficients(B, mode)
        ph = rng.uniform(0, 2 * math.pi)
        ru, rv = decoupling_residual(c, rng.uniform(-2, 1), 1.0, (math.cos(ph), math.sin(ph) * cmath.exp(1j * ph)))
        assert ru <= 1e-6 and rv <= 1e-6


def test_twist_parameter_roundtrip():
    alpha = 1.7548776662466927
    for delta in (-0.25, 0.0, 0.13, 0.25):
        tw = TwistParameter.from_delta(delta, alpha, phase=0.7)
        assert abs(abs(tw.z) - alpha ** (delta + 0.25)) <= 1e-12
        back = TwistParameter.from_z(tw.z, alpha)
        assert back.delta == pytest.approx(delta, abs=1e-12)
        assert -math.pi < back.mu.imag <= math.pi
    assert TwistParameter.from_z(1.0, alpha).delta == pytest.approx(-0.25)
    with pytest.raises(DomainError):
        TwistParameter.from_z(0, alpha)


def test_band_membership_matches_delta():
    alpha = 2.3
    for r in np.linspace(0.5, 2.0, 31):
        tw = TwistParameter.from_z(r * cmath.exp(0.3j), alpha)
        inside = 1 <= abs(tw.z) <= alpha**0.5
        assert inside == (-0.25 - 1e-12 <= tw.delta <= 0.25 + 1e-12)


# weighted norms and series


def test_weighted_norm_zero():
    t = np.linspace(-1, 1, 11)
    assert weighted_norm(t, np.zeros_like(t), 0.3) == 0.0


def test_weighted_norm_symmetric_exponential():
    t = np.arange(-20000, 20001) * 1e-3
    assert weighted_norm(t, np.exp(-np.abs(t)), 0.0) == pytest.approx(1.0, abs=1e-4)


def test_weighted_norm_one_sided():
    t = np.arange(0, 40001) * 1e-3
    f = np.exp(-t)
    assert weighted_norm(t, f, 0.25) == pytest.approx(math.sqrt(2 / 3), abs=1e-4)


def test_weighted_norm_empty_and_unsorted():
    with pytest.raises(EmptyInput):
        weighted_norm([], [], 0.0)
    with pytest.raises(ValueError):
        weighted_norm([0, 2, 1], [1, 1, 1], 0.0)
    with pytest.raises(ValueError):
        weighted_norm([0, 1, 3], [1, 1, 1], 0.0)


def test_series_zero(a0):
    _, E, _ = a0
    r = assemble_series(E, np.zeros_like, TwistParameter.from_delta(0.0, E.alpha), 4)
    assert r.series == 0.0 and r.line == 0.0


@pytest.mark.parametrize("delta", [-0.25, 0.0, 0.25])
@pytest.mark.parametrize("component", ["b", "c"])
def test_series_norm_identity(a0, delta, component):
    _, E, _ = a0
    tw = TwistParameter.from_delta(delta, E.alpha, phase=1.1)
    r = assemble_series(E, lambda t: np.exp(-t * t), tw, 8, component=component)
    assert r.series == pytest.approx(r.line, rel=1e-3)


def test_series_weight_exponent_doubles(a0):
    """Doubling delta - 1/4 doubles the exponent of the t-weight."""
    _, E, _ = a0
    t = np.linspace(-5, 5, 10001)
    f = np.exp(-t * t)
    for w in (-0.1, -0.3):
        tw1 = TwistParameter.from_delta(w + 0.25, E.alpha)
        tw2 = TwistParameter.from_delta(2 * w + 0.25, E.alpha)
        z1 = abs(E.beta.conjugate() * cmath.exp(tw1.mu)) ** (1 / E.log_alpha)
        z2 = abs(E.beta.conjugate() * cmath.exp(tw2.mu)) ** (1 / E.log_alpha)
        assert z1 == pytest.approx(math.exp(w), rel=1e-12)
        assert z2 == pytest.approx(math.exp(2 * w), rel=1e-12)
        n1 = assemble_series(E, lambda s: np.exp(-s * s), tw1, 8).line
        n2 = assemble_series(E, lambda s: np.exp(-s * s), tw2, 8).line
        assert n1 == pytest.approx(weighted_norm(t, f, w), rel=1e-6)
        assert n2 == pytest.approx(weighted_norm(t, f, 2 * w), rel=1e-6)


def test_series_rejects_empty(a0):
    _, E, _ = a0
    with pytest.raises(EmptyInput):
        assemble_series(E, np.exp, TwistParameter.from_delta(0.0, E.alpha), 0)


# P = 0 branch


@pytest.mark.parametrize("q", [0.5, 1.0, 5.0])
@pytest.mark.parametrize("delta", [-0.25, 0.0, 0.25])
def test_p_zero_no_solution(q, delta):
    v = p_zero_membership(q, delta)
    assert not v.solution_found and v.kind == "NoNonzeroSolution"
    assert not v.tails["v:I1:minus"]["convergent"]
    assert not v.tails["v:K1:plus"]["convergent"]
    assert v.tails["v:K1:minus"]["convergent"]
    assert v.tails["v:I1:plus"]["convergent"]


def test_p_zero_detects_solution_below_band():
    # delta < -1/4: K-branch becomes square integrable, z would be spectral
    v = p_zero_membership(1.0, -0.5)
    assert v.solution_found and v.coefficients == (0.0, 1.0)


def test_p_zero_domain():
    with pytest.raises(DomainError):
        p_zero_membership(0.0, 0.0)


def test_p_zero_result_record():
    r = p_zero_result(ModeCoeff(mode=(1, 2, 3), P=0.0, Q=1.0 + 0j), 0.0)
    assert r.branch == "bessel" and not r.flagged and r.diagnostics["verdict"] == "NoNonzeroSolution"


@pytest.mark.parametrize("q", [0.5, 2.0])
def test_order_zero_pair_solves_u_equation(q):
    """u = K0(2 q e^{-t/2}) against direct integration of -u'' + q^2 e^{-t} u = 0."""
    def f(t, y):
        return [y[1], q * q * math.exp(-t) * y[0]]

    def K0(t):
        return bessel_k(0, 2 * q * math.exp(-t / 2))

    def K0p(t):
        x = 2 * q * math.exp(-t / 2)
        return bessel_k(1, x) * x / 2

    sol = solve_ivp(f, (0.0, 3.0), [K0(0.0), K0p(0.0)], method="DOP853", rtol=1e-12, atol=1e-14)
    assert sol.y[0, -1] == pytest.approx(K0(3.0), rel=1e-9)


@pytest.mark.parametrize("Q", [1.0 + 0j, 0.3 - 2j])
def test_bessel_pair_solves_coupled_system(Q):
    """With P = 0: v = C1 I1(x) + C2 K1(x) pairs with u = -(q / conj Q)(C1 I0(x) - C2 K0(x))."""
    q = abs(Q)
    c = ModeCoeff(mode=X, P=0.0, Q=Q)
    for C1, C2 in ((1.0, 0.0), (0.0, 1.0), (0.4, -1.3)):
        def state(t):
            x = 2 * q * math.exp(-t / 2)
            v = C1 * bessel_i(1, x) + C2 * bessel_k(1, x)
            u = -(q / Q.conjugate()) * (C1 * bessel_i(0, x) - C2 * bessel_k(0, x))
            return u, v

        h = 1e-5
        for t in (-1.0, 0.0, 2.0):
            (up, vp), (um, vm) = state(t + h), state(t - h)
            du, dv = (up - um) / (2 * h), (vp - vm) / (2 * h)
            eu, ev = ode_velocity(c, t, state(t))
            assert abs(du - eu) < 1e-6 * max(1, abs(eu))
            assert abs(dv - ev) < 1e-6 * max(1, abs(ev))


def test_integrator_config_defaults():
    cfg = IntegratorConfig()
    assert (cfg.rtol, cfg.atol, cfg.rate, cfg.flag_threshold) == (1e-10, 1e-12, 40.0, 1e-3)
