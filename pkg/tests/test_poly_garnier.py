"""Polynomial Hamiltonians, explicit flows, linearization, bridges, PVI."""

from dataclasses import replace

import numpy as np
import pytest

from garnier_lab.errors import (
    NotOnReduction,
    PoleEvaluation,
    ReductionLocus,
    ResonantInfinity,
    TimeCollision,
    ZeroGauge,
)
from garnier_lab.garnier_okamoto import extract_go
from garnier_lab.numerics import FDScheme, PathPlan, combine_stencil, stencil_multipliers
from garnier_lab.poly_garnier import (
    PGState,
    ThetaPG,
    ahat_matrices,
    bridge_lambda_from_q,
    bridge_q_from_lambda,
    elem_a,
    find_fixed_point,
    gen_pg,
    hamiltonian_HGar,
    integrate_pg,
    mu_p_relations,
    omega_to_t1,
    pg_rhs_explicit,
    pvi_hamiltonian,
    pvi_reduce,
    pvi_rhs,
    random_theta_pg,
    raw_rhs_pair,
    to_schlesinger,
    u_logderiv,
)


def _theta(**over):
    base = dict(th0=0.21 - 0.07j, th1=-0.33 + 0.11j, tht1=0.4 + 0.06j, tht2=-0.18 - 0.2j)
    base["thinf1"] = 0.52 + 0.13j
    base["thinf2"] = -(sum(base.values()))
    base.update(over)
    return ThetaPG(**base)


def _state(**over):
    defaults = dict(
        t1=0.28 + 0.03j,
        t2=0.71 - 0.06j,
        q1=0.45 - 0.21j,
        q2=-0.38 + 0.52j,
        p1=0.62 + 0.33j,
        p2=-0.27 - 0.44j,
        params=_theta(),
    )
    defaults.update(over)
    return PGState(**defaults)


# ---------------------------------------------------------------------------
# Hamiltonian
# ---------------------------------------------------------------------------

def test_hamiltonian_zero_momenta():
    s = _state(p1=0, p2=0)
    th = s.params
    for i, (qi, ti) in enumerate(((s.q1, s.t1), (s.q2, s.t2)), start=1):
        want = th.thinf2 * (th.thinf2 + th.th1) * qi / (ti * (ti - 1))
        assert abs(hamiltonian_HGar(i, s) - want) < 1e-15


def test_hamiltonian_zero_coordinates():
    # the Hamiltonian keeps theta^{t_i}(q_i-1)(q_i-t_i)p_i, which at q = 0
    # leaves t_i theta^{t_i} p_i (the only surviving term)
    s = _state(q1=0, q2=0)
    th = s.params
    for i, (pi, ti, thti) in enumerate(((s.p1, s.t1, th.tht1), (s.p2, s.t2, th.tht2)), start=1):
        want = ti * thti * pi / (ti * (ti - 1))
        assert abs(hamiltonian_HGar(i, s) - want) < 1e-15


def _hamiltonian_oracle(i, s):
    """Independent term-by-term transcription (different grouping)."""
    th = s.params
    if i == 1:
        ti, tn, qi, qn, pi, pn, a, b = s.t1, s.t2, s.q1, s.q2, s.p1, s.p2, th.tht1, th.tht2
    else:
        ti, tn, qi, qn, pi, pn, a, b = s.t2, s.t1, s.q2, s.q1, s.p2, s.p1, th.tht2, th.tht1
    t0, t1c, i2 = th.th0, th.th1, th.thinf2
    terms = [
        qi * (qi - 1) * (qi - ti) * pi * pi,
        (t0 + b + 1) * qi * (qi - 1) * pi,
        -(2 * i2 + t1c + t0 + a + b + 1) * qi * (qi - ti) * pi,
        a * (qi - 1) * (qi - ti) * pi,
        i2 * (i2 + t1c) * qi,
        (2 * qi * pi + qn * pn - t1c - 2 * i2) * qi * qn * pn,
        -ti * (ti - 1) * (pi * qi + a) * pi * qn / (ti - tn),
        ti * (tn - 1) * (2 * pi * qi + a) * pn * qn / (ti - tn),
        -tn * (ti - 1) * qi * (pn * pn * qn + b * (pn - pi)) / (ti - tn),
    ]
    return sum(terms) / (ti * (ti - 1))


def test_hamiltonian_second_implementation_oracle(rng):
    for k in range(25):
        th = random_theta_pg(900 + k)
        s = gen_pg(th, 950 + k)
        for i in (1, 2):
            got = hamiltonian_HGar(i, s)
            want = _hamiltonian_oracle(i, s)
            assert abs(got - want) < 1e-13 * (1 + abs(want))


def test_hamiltonian_time_guards():
    with pytest.raises(TimeCollision):
        hamiltonian_HGar(1, _state(t1=0.0))
    with pytest.raises(TimeCollision):
        hamiltonian_HGar(1, _state(t2=0.28 + 0.03j, t1=0.28 + 0.03j))


# ---------------------------------------------------------------------------
# explicit right-hand sides
# ---------------------------------------------------------------------------

def test_rhs_momentum_free_truncation():
    # with p = 0 only the four momentum-free terms of the q_i equation remain
    s = _state(p1=0, p2=0)
    th = s.params
    t1, t2, q1, q2 = s.t1, s.t2, s.q1, s.q2
    b = th.th1 + 2 * th.thinf2
    want = (
        -b * q1**2
        - (1 + th.th0 + th.tht1 + th.tht2) * q1
        + (1 + b + th.th0 + th.tht2) * t1 * q1
        + t1 * th.tht1
        + (t1 - 1) / (t1 - t2) * (t2 * th.tht2 * q1 - t1 * th.tht1 * q2)
    )
    got = pg_rhs_explicit(s)[0, 0] * (t1 * (t1 - 1))
    assert abs(got - want) < 1e-14


def test_rhs_coinciding_right_parts():
    for k in range(10):
        s = gen_pg(random_theta_pg(20 + k), 60 + k)
        r_opo, r_tqo = raw_rhs_pair(s)
        assert r_opo == r_tqo  # identical expressions, identical floats


def test_rhs_matches_hamiltonian_partials():
    scheme = FDScheme(order=4, step=1e-5, richardson=True)
    mults = stencil_multipliers(scheme, (1,))
    for k in range(20):
        s = gen_pg(random_theta_pg(100 + k), 140 + k)
        D = pg_rhs_explicit(s)

        def partial(i, name):
            h = scheme.scaled_step(getattr(s, name))
            vals = {m: hamiltonian_HGar(i, replace(s, **{name: getattr(s, name) + m * h})) for m in mults}
            return combine_stencil(vals, h, scheme, 1)

        for row, i in enumerate((1, 2)):
            ham = np.array([partial(i, "p1"), partial(i, "p2"), -partial(i, "q1"), -partial(i, "q2")])
            scale = np.max(np.abs(D[row])) + 1e-300
            assert np.max(np.abs(D[row] - ham)) / scale < 1e-8, f"flow {i}"


def test_flow_retrace_and_commutation():
    s0 = _state()
    a, b = (s0.t1, s0.t2), (s0.t1 + 0.1 + 0.08j, s0.t2 - 0.09 - 0.05j)
    loop = PathPlan([a, b, a], 0.03)
    end = integrate_pg(s0, loop)[-1][1]
    for name in ("q1", "q2", "p1", "p2"):
        assert abs(getattr(end, name) - getattr(s0, name)) < 1e-8, name
    # t1-then-t2 vs t2-then-t1
    mid1 = (b[0], a[1])
    mid2 = (a[0], b[1])
    e1 = integrate_pg(s0, PathPlan([a, mid1, b], 0.03))[-1][1]
    e2 = integrate_pg(s0, PathPlan([a, mid2, b], 0.03))[-1][1]
    for name in ("q1", "q2", "p1", "p2"):
        assert abs(getattr(e1, name) - getattr(e2, name)) < 1e-7, name


def test_flow_constant_at_fixed_point():
    # t-uniform equilibria need special exponents: theta^{t_i} = 0 and
    # theta_2^inf = 0 put one at the origin of phase space
    th = ThetaPG(th0=0.21 - 0.07j, th1=-0.33 + 0.11j, tht1=0.0, tht2=0.0,
                 thinf1=-(0.21 - 0.07j) - (-0.33 + 0.11j), thinf2=0.0)
    s_star = find_fixed_point(th, 0.28 + 0.03j, 0.71 - 0.06j, seed=11)
    assert s_star is not None, "seeded search found no fixed point"
    assert np.max(np.abs(pg_rhs_explicit(s_star))) < 1e-9
    path = PathPlan(
        [(s_star.t1, s_star.t2), (s_star.t1 + 0.05 + 0.04j, s_star.t2 - 0.05j)], 0.03
    )
    end = integrate_pg(s_star, path)[-1][1]
    for name in ("q1", "q2", "p1", "p2"):
        assert abs(getattr(end, name) - getattr(s_star, name)) < 1e-8, name


# ---------------------------------------------------------------------------
# linearization data
# ---------------------------------------------------------------------------

def test_ahat_at_origin():
    s = _state(q1=0, q2=0, p1=0, p2=0)
    th = s.params
    a0, a1, at1, at2 = ahat_matrices(s)
    assert np.max(np.abs(at1 - np.diag([th.tht1, 0.0]))) < 1e-15
    assert np.max(np.abs(at2 - np.diag([th.tht2, 0.0]))) < 1e-15


def test_ahat_a1_rank_one():
    for k in range(10):
        s = gen_pg(random_theta_pg(300 + k), 330 + k)
        _a0, a1, _at1, _at2 = ahat_matrices(s)
        det = a1[0, 0] * a1[1, 1] - a1[0, 1] * a1[1, 0]
        assert det == 0.0  # rows proportional by construction


def test_ahat_eigenvalues():
    for k in range(10):
        th = random_theta_pg(400 + k)
        s = gen_pg(th, 440 + k)
        names = ("th0", "th1", "tht1", "tht2")
        for m, name in zip(ahat_matrices(s), names):
            target = getattr(th, name)
            ev = sorted(np.linalg.eigvals(m), key=abs)
            assert abs(ev[0]) < 1e-10 and abs(ev[1] - target) < 1e-10, name


def test_elem_a_at_origin():
    # with the matrix-consistent corner entry (see the decisions ledger),
    # p = q = 0 gives theta_2^inf (theta^1 + theta_2^inf)
    s = _state(q1=0, q2=0, p1=0, p2=0)
    th = s.params
    assert abs(elem_a(s) - th.thinf2 * (th.th1 + th.thinf2)) < 1e-15


def test_elem_a_momenta_only():
    s = _state(q1=0, q2=0, params=_theta(thinf2=0.0, thinf1=None))
    # rebuild with thinf2 = 0 and Fuchs re-closed through thinf1
    th = s.params
    th = ThetaPG(th.th0, th.th1, th.tht1, th.tht2, -(th.th0 + th.th1 + th.tht1 + th.tht2), 0.0)
    s = replace(s, params=th)
    want = -s.t1 * s.p1 * th.tht1 - s.t2 * s.p2 * th.tht2
    assert abs(elem_a(s) - want) < 1e-15


def test_elem_a_matches_matrix_corner():
    for k in range(10):
        s = gen_pg(random_theta_pg(500 + k), 540 + k)
        a0, a1, at1, at2 = ahat_matrices(s)
        corner = -(a0 + a1 + at1 + at2)[1, 0]
        assert abs(elem_a(s) - corner) < 1e-12


def test_u_logderiv_zero_coordinates():
    s = _state(q1=0, q2=0)
    g1, g2 = u_logderiv(s)
    assert abs(g1 - s.params.tht1 / (s.t1 - 1)) < 1e-15
    assert abs(g2 - s.params.tht2 / (s.t2 - 1)) < 1e-15


def test_u_logderiv_closedness():
    # mixed partials of ln u agree along the flow
    s0 = _state()
    scheme = FDScheme(order=4, step=1e-5, richardson=True)
    mults = [m for m in stencil_multipliers(scheme, (1,)) if m != 0.0]

    def g_at(dt1, dt2):
        seg = PathPlan([(s0.t1, s0.t2), (s0.t1 + dt1, s0.t2 + dt2)], 0.004)
        return u_logderiv(integrate_pg(s0, seg, fixed_steps=24)[-1][1])

    h = scheme.scaled_step(s0.t2)
    d12 = combine_stencil({m: g_at(0, m * h)[0] for m in mults}, h, scheme, 1)
    h = scheme.scaled_step(s0.t1)
    d21 = combine_stencil({m: g_at(m * h, 0)[1] for m in mults}, h, scheme, 1)
    assert abs(d12 - d21) < 1e-6


def test_u_stays_finite_along_flow():
    s0 = _state()
    path = PathPlan([(s0.t1, s0.t2), (s0.t1 + 0.12 + 0.1j, s0.t2 - 0.08 - 0.09j)], 0.03)
    traj = integrate_pg(s0, path, samples=[0.25, 0.5, 0.75], with_lnu=True)
    for _s, _st, lnu in traj:
        assert np.isfinite(lnu.real) and np.isfinite(lnu.imag)
        assert abs(lnu) < 10.0  # u = exp(ln u) bounded away from 0 and inf


def test_to_schlesinger_kills_corner():
    for k in range(10):
        s = gen_pg(random_theta_pg(600 + k), 640 + k)
        q = to_schlesinger(s, u=1.3 - 0.4j)
        total = q.A.sum(axis=0)
        assert abs(total[0, 1]) < 1e-12 and abs(total[1, 0]) < 1e-12
        th = s.params
        assert abs(-total[0, 0] - th.thinf1) < 1e-12
        assert abs(-total[1, 1] - th.thinf2) < 1e-12


def test_to_schlesinger_preserves_spectra():
    s = _state()
    q = to_schlesinger(s, u=0.7 + 0.1j)
    th = s.params
    for m, target in zip(q.A, (th.tht1, th.tht2, th.th1, th.th0)):
        ev = sorted(np.linalg.eigvals(m), key=abs)
        assert abs(ev[0]) < 1e-12 and abs(ev[1] - target) < 1e-12


def test_to_schlesinger_offdiag_numerator_matches_coordinates():
    # entry "12" of sum A^xi/(x - t_xi), cleared of denominators, is the
    # quadratic (1-q1-q2) x^2 + [...] x + [...]; recover it by interpolation
    s = _state()
    q = to_schlesinger(s, u=1.0)
    t = q.tvec

    def numerator(x):
        q12 = sum(q.A[i, 0, 1] / (x - t[i]) for i in range(4))
        return q12 * np.prod([x - t[i] for i in range(4)])

    xs = np.array([2.1 + 0.3j, -1.4 + 0.9j, 0.5 + 2.2j])
    vand = np.vander(xs, 3)
    c2, c1, c0 = np.linalg.solve(vand, np.array([numerator(x) for x in xs]))
    assert abs(c2 - (1 - s.q1 - s.q2)) < 1e-10
    assert abs(c1 - (-s.t1 - s.t2 + s.q2 * (1 + s.t1) + s.q1 * (1 + s.t2))) < 1e-10
    assert abs(c0 - (s.t1 * s.t2 - s.q1 * s.t2 - s.q2 * s.t1)) < 1e-10


def test_to_schlesinger_guards():
    s = _state()
    th = s.params
    resonant = ThetaPG(th.th0, th.th1, th.tht1, th.tht2, 0.25 + 0.1j, 0.25 + 0.1j)
    s_res = replace(
        s, params=ThetaPG(th.th0, th.th1, th.tht1, -(th.th0 + th.th1 + th.tht1 + 0.5 + 0.2j), 0.25 + 0.1j, 0.25 + 0.1j)
    )
    with pytest.raises(ResonantInfinity):
        to_schlesinger(s_res, u=1.0)
    with pytest.raises(ZeroGauge):
        to_schlesinger(s, u=0.0)
    assert resonant is not None


# ---------------------------------------------------------------------------
# bridges and momentum relations
# ---------------------------------------------------------------------------

def test_bridge_q_vanishes_at_coincidence():
    t1, t2 = 0.3 + 0.02j, 0.7 - 0.05j
    lam2 = 1.4 + 0.6j
    q1, _q2 = bridge_q_from_lambda(t1, lam2, t1, t2)
    assert abs(q1) < 1e-15
    _q1, q2 = bridge_q_from_lambda(t2, lam2, t1, t2)
    assert abs(q2) < 1e-15


def test_bridge_symmetry():
    t1, t2 = 0.3 + 0.02j, 0.7 - 0.05j
    l1, l2 = 0.4 + 0.8j, -0.6 + 0.3j
    a = bridge_q_from_lambda(l1, l2, t1, t2)
    b = bridge_q_from_lambda(l2, l1, t1, t2)
    assert abs(a[0] - b[0]) + abs(a[1] - b[1]) < 1e-14
    # (q1, t1) <-> (q2, t2) swaps the lambda formulas into each other
    q1, q2 = 0.3 - 0.1j, 0.5 + 0.2j
    a = bridge_lambda_from_q(q1, q2, t1, t2)
    b = bridge_lambda_from_q(q2, q1, t2, t1)
    assert min(abs(a[0] - b[0]) + abs(a[1] - b[1]), abs(a[0] - b[1]) + abs(a[1] - b[0])) < 1e-12


def test_bridge_zero_coordinates_gives_times():
    t1, t2 = 0.3 + 0.02j, 0.7 - 0.05j
    lam = bridge_lambda_from_q(0.0, 0.0, t1, t2)
    assert min(abs(lam[0] - t1) + abs(lam[1] - t2), abs(lam[0] - t2) + abs(lam[1] - t1)) < 1e-14


def test_bridge_roundtrip():
    t1, t2 = 0.3 + 0.02j, 0.7 - 0.05j
    for k in range(20):
        rng = np.random.default_rng(700 + k)
        q1, q2 = (complex(*rng.uniform(-0.8, 0.8, 2)) for _ in range(2))
        if abs(1 - q1 - q2) < 0.05:
            continue
        l1, l2 = bridge_lambda_from_q(q1, q2, t1, t2)
        r1, r2 = bridge_q_from_lambda(l1, l2, t1, t2)
        assert abs(r1 - q1) + abs(r2 - q2) < 1e-10


def test_bridge_matches_extraction():
    for k in range(10):
        s = gen_pg(random_theta_pg(800 + k), 840 + k)
        g = extract_go(to_schlesinger(s, u=1.0))
        lb = bridge_lambda_from_q(s.q1, s.q2, s.t1, s.t2)
        err = min(
            abs(lb[0] - g.lam[0]) + abs(lb[1] - g.lam[1]),
            abs(lb[0] - g.lam[1]) + abs(lb[1] - g.lam[0]),
        )
        assert err < 1e-8


def test_bridge_reduction_locus_guard():
    with pytest.raises(ReductionLocus):
        bridge_lambda_from_q(0.4, 0.6, 0.3, 0.7)


def test_bridge_pole_guard():
    with pytest.raises(PoleEvaluation):
        bridge_q_from_lambda(1.0, 0.5j, 0.3, 0.7)


def test_mu_p_residuals_on_corresponding_pairs():
    for k in range(10):
        s = gen_pg(random_theta_pg(850 + k), 870 + k)
        g = extract_go(to_schlesinger(s, u=1.0))
        r1, r2 = mu_p_relations(s, g)
        assert abs(r1) < 1e-7 and abs(r2) < 1e-7


def test_mu_p_sensitivity_to_momentum():
    s = gen_pg(random_theta_pg(860), 880)
    g = extract_go(to_schlesinger(s, u=1.0))
    r1, _ = mu_p_relations(s, g)
    g2 = replace(g, mu=(g.mu[0] + 1.0, g.mu[1]))
    r1p, _ = mu_p_relations(s, g2)
    l1, l2 = g.lam
    pref = (l1 - 1) * (l2 - 1) / ((s.t1 - 1) * (s.t2 - 1))
    expected = abs(pref * (l1 - 1) * (l1 - s.t2) / (l1 - l2))
    assert abs(abs(r1p - r1) - expected) < 1e-8
    assert expected > 1e-3  # genuinely sensitive


def test_mu_p_relations_swap_into_each_other():
    s = gen_pg(random_theta_pg(861), 881)
    g = extract_go(to_schlesinger(s, u=1.0))
    th = s.params
    s_sw = replace(
        s,
        t1=s.t2, t2=s.t1, q1=s.q2, q2=s.q1, p1=s.p2, p2=s.p1,
        params=ThetaPG(th.th0, th.th1, th.tht2, th.tht1, th.thinf1, th.thinf2),
    )
    g_sw = replace(g, t1=g.t2, t2=g.t1)
    r = mu_p_relations(s, g)
    r_sw = mu_p_relations(s_sw, g_sw)
    assert abs(r[0] - r_sw[1]) < 1e-12 and abs(r[1] - r_sw[0]) < 1e-12


# ---------------------------------------------------------------------------
# Painleve VI reduction
# ---------------------------------------------------------------------------

def test_pvi_hamiltonian_momentum_free():
    th = random_theta_pg(901, kond=True)
    omega, Q = 0.4 + 0.2j, 0.7 - 0.3j
    want = th.thinf2 * (th.thinf2 + th.th1) * Q / (omega * (omega - 1))
    assert abs(pvi_hamiltonian(omega, Q, 0.0, th) - want) < 1e-15


def test_pvi_reduce_requires_locus_and_resonance():
    th = random_theta_pg(902, kond=True)
    s = gen_pg(th, 903, on_reduction=True)
    pv = pvi_reduce(s)
    assert abs(pv.omega - s.t1 * (s.t2 - 1) / (s.t2 - s.t1)) < 1e-14
    assert pv.Q == s.q1 and pv.P == s.p1 - s.p2
    with pytest.raises(NotOnReduction):
        pvi_reduce(replace(s, q1=s.q1 + 0.1))
    th_bad = random_theta_pg(904)  # generic exponents: no resonance
    with pytest.raises(NotOnReduction):
        pvi_reduce(gen_pg(th_bad, 905, on_reduction=True))


def test_pvi_locus_is_invariant():
    th = random_theta_pg(906, kond=True)
    s0 = gen_pg(th, 907, on_reduction=True)
    path = PathPlan([(s0.t1, s0.t2), (s0.t1 + 0.15 + 0.1j, s0.t2)], 0.02)
    for _s, st in integrate_pg(s0, path, samples=[0.3, 0.6]):
        assert abs(st.q1 + st.q2 - 1.0) < 1e-9


def test_pvi_hamilton_system_residual():
    th = random_theta_pg(908, kond=True)
    s0 = gen_pg(th, 909, on_reduction=True)
    pv0 = pvi_reduce(s0)
    scheme = FDScheme(order=4, step=1e-5, richardson=True)
    mults = [m for m in stencil_multipliers(scheme, (1,)) if m != 0.0]
    h = scheme.scaled_step(pv0.omega)
    vq, vp = {}, {}
    for m in mults:
        t1m = omega_to_t1(pv0.omega + m * h, s0.t2)
        seg = PathPlan([(s0.t1, s0.t2), (t1m, s0.t2)], 1e-7)
        pvm = pvi_reduce(integrate_pg(s0, seg, fixed_steps=16)[-1][1], tol=1e-5)
        vq[m], vp[m] = pvm.Q, pvm.P
    dQ = combine_stencil(vq, h, scheme, 1)
    dP = combine_stencil(vp, h, scheme, 1)
    rq, rp = pvi_rhs(pv0.omega, pv0.Q, pv0.P, th)
    assert abs(dQ - rq) < 1e-6 * max(1, abs(dQ))
    assert abs(dP - rp) < 1e-6 * max(1, abs(dP))


# ---------------------------------------------------------------------------
# parameters and serialization
# ---------------------------------------------------------------------------

def test_fuchs_validation():
    with pytest.raises(ValueError):
        ThetaPG(0.1, 0.2, 0.3, 0.4, 0.5, 0.6).validate()
    d = _theta().to_json()
    d["th0"] = [d["th0"][0] + 1e-6, d["th0"][1]]
    with pytest.raises(ValueError):
        ThetaPG.from_json(d)


def test_pg_json_roundtrip():
    s = _state()
    d = s.to_json()
    assert set(d) == {"t1", "t2", "q", "p", "theta"}
    assert set(d["theta"]) == {"th0", "th1", "tht1", "tht2", "thinf1", "thinf2"}
    back = PGState.from_json(d)
    assert back.q1 == s.q1 and back.p2 == s.p2
    assert back.params == s.params


def test_random_theta_satisfies_fuchs():
    for k in range(20):
        assert abs(random_theta_pg(k).fuchs_residual) < 1e-12
        thk = random_theta_pg(k, kond=True)
        assert abs(thk.fuchs_residual) < 1e-12
        assert abs(thk.thinf1 - thk.thinf2 - 1.0) < 1e-12
