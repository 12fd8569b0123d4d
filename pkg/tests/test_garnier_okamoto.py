"""Coordinate extraction, the two Hamiltonians, the flow, scalar-equation
coefficients."""

import numpy as np
import pytest

from garnier_lab.errors import ConditionIIIViolated, ConditionIVViolated
from garnier_lab.garnier_okamoto import (
    GOState,
    extract_go,
    extract_lambda,
    extract_mu,
    garx_coefficients,
    go_vector_field,
    hamiltonian_K,
    integrate_go,
)
from garnier_lab.numerics import FDScheme, PathPlan, combine_stencil, stencil_multipliers
from garnier_lab.schlesinger import SchlesingerState, ThetaGO, integrate_schlesinger, shift_normalization

T1, T2 = 0.3 + 0.05j, 0.62 - 0.04j
TVEC = np.array([T1, T2, 1.0, 0.0], dtype=complex)


def _theta(k_inf=0.37 - 0.11j):
    return ThetaGO(theta=(0.31 - 0.12j, 0.47 + 0.08j, -0.29 + 0.21j, 0.55 - 0.03j), k_inf=k_inf)


def _q_state_with_offdiag(targets, theta=None):
    """Q-state whose (1,2) residues are the partial fractions of a quadratic
    with the given zeros: q12^i = X (t_i - z1)(t_i - z2) / prod'(t_i - t_j)."""
    z1, z2, lead = targets
    mats = np.zeros((4, 2, 2), dtype=complex)
    for i in range(4):
        denom = np.prod([TVEC[i] - TVEC[j] for j in range(4) if j != i])
        mats[i, 0, 1] = lead * (TVEC[i] - z1) * (TVEC[i] - z2) / denom
    return SchlesingerState(T1, T2, mats, "Q", theta or _theta())


def test_extract_lambda_constructed_zeros():
    s = _q_state_with_offdiag((2.0, 3.0, 1.3 - 0.4j))
    l1, l2, X = extract_lambda(s)
    assert abs(l1 - 2.0) < 1e-11 and abs(l2 - 3.0) < 1e-11
    assert abs(X - (1.3 - 0.4j)) < 1e-12


def test_extract_lambda_back_substitution(b_state):
    q = shift_normalization(b_state, "BtoQ")
    l1, l2, _ = extract_lambda(q)
    scale = np.max(np.abs(q.A[:, 0, 1]))
    for lk in (l1, l2):
        q12 = sum(q.A[i, 0, 1] / (lk - q.tvec[i]) for i in range(4))
        assert abs(q12) < 1e-11 * scale


def test_extract_lambda_deterministic_ordering(b_state):
    # returned pair is (Re, Im)-lexicographically ordered, and as a set it
    # matches the underlying root pair
    q = shift_normalization(b_state, "BtoQ")
    l1, l2, _ = extract_lambda(q)
    assert (l1.real, l1.imag) <= (l2.real, l2.imag)


def test_extract_lambda_condition_iii():
    # numerator with vanishing leading coefficient: X = 0
    mats = np.zeros((4, 2, 2), dtype=complex)
    for i in range(4):
        denom = np.prod([TVEC[i] - TVEC[j] for j in range(4) if j != i])
        mats[i, 0, 1] = (TVEC[i] - 2.0) / denom  # numerator x - 2, degree 1
    s = SchlesingerState(T1, T2, mats, "Q", _theta())
    with pytest.raises(ConditionIIIViolated):
        extract_lambda(s)


def test_extract_lambda_condition_iv():
    s = _q_state_with_offdiag((2.0, 2.0, 1.0))
    with pytest.raises(ConditionIVViolated):
        extract_lambda(s)


def test_extract_lambda_warns_on_integer_exponents():
    th = ThetaGO(theta=(1.0, 0.47, -0.29, 0.55), k_inf=0.3)
    s = _q_state_with_offdiag((2.0, 3.0, 1.0), theta=th)
    with pytest.warns(UserWarning, match="near-.?integer"):
        extract_lambda(s)


def test_extract_mu_zero_entries():
    s = _q_state_with_offdiag((2.0, 3.0, 1.0))
    assert extract_mu(s, 5.0 + 1.0j) == 0.0


def test_extract_mu_single_pole():
    s = _q_state_with_offdiag((2.0, 3.0, 1.0))
    s.A[0, 0, 0] = 0.7 - 0.2j
    lam = 1.4 + 0.8j
    assert abs(extract_mu(s, lam) - (0.7 - 0.2j) / (lam - T1)) < 1e-15


def test_extract_mu_direct_sum_oracle(b_state):
    q = shift_normalization(b_state, "BtoQ")
    lam = 0.8 + 0.9j
    want = sum(q.A[i, 0, 0] / (lam - q.tvec[i]) for i in range(4))
    assert abs(extract_mu(q, lam) - want) < 1e-15


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------

def _go_state(mu=(0.4 - 0.2j, -0.7 + 0.5j), k_inf=None):
    th = _theta() if k_inf is None else _theta(k_inf)
    return GOState(T1, T2, lam=(0.15 + 0.45j, -0.35 - 0.25j), mu=mu, theta=th)


def test_hamiltonian_vanishes_at_zero_momenta_and_kappa():
    # kappa = 0 requires theta_inf = sum(theta) - 1, i.e. k_inf = sum - 2
    th0 = _theta()
    g = _go_state(mu=(0, 0), k_inf=th0.sum_theta - 2.0)
    assert abs(g.theta.kappa) < 1e-15
    assert abs(hamiltonian_K(1, g)) < 1e-15
    assert abs(hamiltonian_K(2, g)) < 1e-15


def test_hamiltonian_zero_momenta_kappa_term():
    g = _go_state(mu=(0, 0))
    kappa = g.theta.kappa
    for i, (ti, tn) in enumerate(((T1, T2), (T2, T1)), start=1):
        l1, l2 = g.lam
        Mi = -((l1 - ti) * (l2 - ti)) / ((ti - tn) * (ti - 1) * ti)
        want = 0.0
        for k, lk in enumerate(g.lam):
            lo = g.lam[1 - k]
            Mki = (lk - tn) * (lk - 1) * lk / (lk - lo)
            want += Mki * kappa / (lk * (lk - 1))
        want *= Mi
        assert abs(hamiltonian_K(i, g) - want) < 1e-14


def test_hamiltonian_index_symmetry():
    # K_2 equals K_1 after swapping (t1, theta1) <-> (t2, theta2)
    g = _go_state()
    th = g.theta
    swapped = GOState(
        t1=g.t2,
        t2=g.t1,
        lam=g.lam,
        mu=g.mu,
        theta=ThetaGO(theta=(th.theta[1], th.theta[0], th.theta[2], th.theta[3]), k_inf=th.k_inf),
    )
    assert abs(hamiltonian_K(2, g) - hamiltonian_K(1, swapped)) < 1e-14


def test_hamiltonian_guards():
    g = _go_state()
    bad = GOState(g.t1, g.t2, lam=(0.5, 0.5), mu=g.mu, theta=g.theta)
    with pytest.raises(ConditionIVViolated):
        hamiltonian_K(1, bad)
    with pytest.raises(ValueError):
        hamiltonian_K(3, g)


# ---------------------------------------------------------------------------
# vector field and flow
# ---------------------------------------------------------------------------

def test_field_linear_momentum_coefficient_at_zero_mu():
    # at mu = 0 and kappa = 0, dlambda_k/dt_j is the -M_j M^{k,j} * (pole
    # sum) coefficient of the bracket, written out analytically
    th0 = _theta()
    g = _go_state(mu=(0, 0), k_inf=th0.sum_theta - 2.0)
    vf = go_vector_field(g)
    th = g.theta.theta
    ts = (g.t1, g.t2)
    for j in (1, 2):
        tj, tn = ts[j - 1], ts[j % 2]
        Mj = -((g.lam[0] - tj) * (g.lam[1] - tj)) / ((tj - tn) * (tj - 1) * tj)
        for k in (0, 1):
            lk, lo = g.lam[k], g.lam[1 - k]
            Mkj = (lk - tn) * (lk - 1) * lk / (lk - lo)
            pole = sum((th[m - 1] - (1 if m == j else 0)) / (lk - ts[m - 1]) for m in (1, 2))
            pole += th[2] / (lk - 1) + th[3] / lk
            want = -Mj * Mkj * pole
            assert abs(vf["dlam"][j - 1, k] - want) < 1e-9


def test_field_momentum_equation_is_minus_lambda_partial():
    # definition restated: -dK_j/dlambda_k from two step sizes agree
    g = _go_state()
    a = go_vector_field(g, FDScheme(order=4, step=1e-5, richardson=True))
    b = go_vector_field(g, FDScheme(order=4, step=2e-5, richardson=True))
    assert np.max(np.abs(a["dmu"] - b["dmu"])) < 1e-8


def test_flow_matches_schlesinger_extraction(b_state):
    # cross-picture: integrate both sides, compare endpoints
    q0 = shift_normalization(b_state, "BtoQ")
    g0 = extract_go(q0)
    path = PathPlan([(q0.t1, q0.t2), (q0.t1 + 0.09 + 0.12j, q0.t2 - 0.06 - 0.1j)], 0.03)
    traj = integrate_schlesinger(q0, path, samples=[0.25, 0.5, 0.75])
    for _s, st in traj:
        # back-substitution residual at every stored trajectory point
        l1, l2, _x = extract_lambda(st)
        scale = np.max(np.abs(st.A[:, 0, 1]))
        for lk in (l1, l2):
            q12 = sum(st.A[i, 0, 1] / (lk - st.tvec[i]) for i in range(4))
            assert abs(q12) < 1e-11 * scale
    end_s = extract_go(traj[-1][1])
    end_g = integrate_go(g0, path, rtol=1e-11)[-1][1]
    lam_err = min(
        abs(end_s.lam[0] - end_g.lam[0]) + abs(end_s.lam[1] - end_g.lam[1]),
        abs(end_s.lam[0] - end_g.lam[1]) + abs(end_s.lam[1] - end_g.lam[0]),
    )
    mu_err = min(
        abs(end_s.mu[0] - end_g.mu[0]) + abs(end_s.mu[1] - end_g.mu[1]),
        abs(end_s.mu[0] - end_g.mu[1]) + abs(end_s.mu[1] - end_g.mu[0]),
    )
    scale = max(abs(v) for v in end_s.lam + end_s.mu)
    assert lam_err / scale < 1e-6 and mu_err / scale < 1e-6


def test_flow_retrace(b_state):
    g0 = extract_go(shift_normalization(b_state, "BtoQ"))
    there = (g0.t1 + 0.08 + 0.1j, g0.t2 - 0.07 - 0.06j)
    loop = PathPlan([(g0.t1, g0.t2), there, (g0.t1, g0.t2)], 0.03)
    end = integrate_go(g0, loop, rtol=1e-11)[-1][1]
    err = max(abs(a - b) for a, b in zip(end.lam + end.mu, g0.lam + g0.mu))
    assert err < 1e-7


def test_flow_single_time_restriction(b_state):
    # a t2-constant segment only engages the K_1 flow
    g0 = extract_go(shift_normalization(b_state, "BtoQ"))
    dt = 0.02 + 0.01j
    path = PathPlan([(g0.t1, g0.t2), (g0.t1 + dt, g0.t2)], 0.03)
    end = integrate_go(g0, path, rtol=1e-11)[-1][1]
    # first-order prediction from the t1-component of the field alone
    vf = go_vector_field(g0)
    pred = np.array(g0.lam) + dt * vf["dlam"][0]
    assert np.max(np.abs(np.array(end.lam) - pred)) < 5e-3 * max(1, abs(dt))


# ---------------------------------------------------------------------------
# scalar-equation coefficients
# ---------------------------------------------------------------------------

def _coeff_fixture(b_state):
    g = extract_go(shift_normalization(b_state, "BtoQ"))
    return g, hamiltonian_K(1, g), hamiltonian_K(2, g)


def test_garx_pole_residues_at_t(b_state):
    g, K1, K2 = _coeff_fixture(b_state)
    eps = 1e-7
    for i in range(4):
        ti = g.tvec[i]
        got = garx_coefficients(g, K1, K2, ti + eps, min_dist=1e-9)[0] * eps
        want = g.theta.theta[i] - 1.0
        assert abs(got - want) < 1e-4, f"pole {i}"


def test_garx_unit_residues_at_apparent_singularities(b_state):
    g, K1, K2 = _coeff_fixture(b_state)
    eps = 1e-7
    for lk in g.lam:
        got = garx_coefficients(g, K1, K2, lk + eps, min_dist=1e-9)[0] * eps
        assert abs(got - 1.0) < 1e-4


def test_garx_large_x_decay(b_state):
    g, K1, K2 = _coeff_fixture(b_state)
    x = 1e6 + 0.7j
    got = garx_coefficients(g, K1, K2, x)[0] * x
    want = sum(t - 1 for t in g.theta.theta) + 2.0
    assert abs(got - want) < 1e-5


def test_go_state_json(b_state):
    g = extract_go(shift_normalization(b_state, "BtoQ"))
    d = g.to_json()
    assert set(d) == {"t1", "t2", "lambda", "mu", "theta", "kappa"}
    assert len(d["lambda"]) == 2 and len(d["mu"]) == 2
