import cmath
import itertools

import numpy as np
import pytest

from qnek import lax as L
from qnek.blocks import delta, hvec
from qnek.partitions import enumerate_tuples, nekrasov_factor, size
from qnek.qspecial import log_q_barnes

THETA_INF = np.array([-0.2454291 - 0.03860476j, 0.2454291 + 0.03860476j])
THETA_0 = np.array([-0.27749395 - 0.06701226j, 0.27749395 + 0.06701226j])
THETAS = (0.25 + 0.015j, 0.25 - 0.015j)
SIGMA = np.array([-0.02908525 - 0.18729229j, 0.02908525 + 0.18729229j])
S = np.array([[1.34820885 + 1.66372399j, 1.82528271 + 0.65914775j]])


def params(q=0.1, t=(1.0, 0.005), s=S):
    return L.LaxParams.create(2, q, THETA_INF, THETA_0, THETAS, [SIGMA], s, list(t))


def brute_tau(p, radius, cutoff):
    """The lattice sum of s^n t-powers C Z for N = 2, m = 1, written out."""
    b = p.base
    th1, th2 = p.thetas
    lt1, lt2 = p.log_t
    dh = lambda th: 2 * th * th / 2  # noqa: E731  (Delta of 2 theta h_1 for N = 2)
    total = 0j
    for a in range(-radius, radius + 1):
        n = np.array([a, -a])
        sig = [p.theta_inf, p.sigmas[0] + n, p.theta_0]
        s_n = complex(p.s[0, 0]) ** a * complex(p.s[0, 1]) ** (-a)
        logc = sum(log_q_barnes(1 + sig[0][k] - th1 - sig[1][kk], b) for k in range(2) for kk in range(2))
        logc += sum(log_q_barnes(1 + sig[1][k] - th2 - sig[2][kk], b) for k in range(2) for kk in range(2))
        logc -= sum(log_q_barnes(1 + sig[1][k] - sig[1][kk], b) for k in range(2) for kk in range(2) if k != kk)
        logt = (delta(sig[0]) - dh(th1) - delta(sig[1])) * lt1 + (delta(sig[1]) - dh(th2) - delta(sig[2])) * lt2
        z = 0j
        for lam in enumerate_tuples(2, cutoff):
            term = cmath.exp((lt2 - lt1) * sum(size(x) for x in lam))
            for k, kk in itertools.product(range(2), repeat=2):
                term *= nekrasov_factor((), lam[kk], b.power(sig[0][k] - th1 - sig[1][kk]), b)
                term *= nekrasov_factor(lam[k], (), b.power(sig[1][k] - th2 - sig[2][kk]), b)
                term /= nekrasov_factor(lam[k], lam[kk], b.power(sig[1][k] - sig[1][kk]), b)
            z += term
        total += s_n * cmath.exp(logt + logc) * z
    return total


@pytest.fixture(scope="module")
def p01():
    return params()


def test_tau_matches_brute_force():
    p = params(q=0.3, t=(1.0, 0.1))
    ref = brute_tau(p, 1, 3)
    assert abs(L.tau(p, L.LatticeWindow(1), 3) - ref) / abs(ref) < 1e-12


def test_tau_single_term():
    p = params(q=0.3, t=(1.0, 0.1))
    assert L.tau(p, L.LatticeWindow(0), 0) == pytest.approx(brute_tau(p, 0, 0), rel=1e-13)


def test_tau_block_form_and_normalizations(p01):
    for rep in L.verify_tau_forms(p01, L.LatticeWindow(2), 4):
        assert rep.passed, rep.line()


def test_tau_window_converges(p01):
    t2 = L.tau(p01, L.LatticeWindow(2), 4)
    t3 = L.tau(p01, L.LatticeWindow(3), 4)
    assert abs(t3 - t2) / abs(t3) < 1e-6


def test_tau_family_diagonal_is_tau(p01):
    fam = L.tau_family(p01, L.LatticeWindow(1), 3)
    assert np.all(np.diag(fam.tau_ij) == fam.tau)


def test_lattice_window():
    w = L.LatticeWindow(2)
    assert len(w.root_points(2)) == 5
    assert len(w.root_points(3)) == 19
    assert w.root_points(2)[0] == (0, 0)
    assert all(sum(v) == 0 for v in w.root_points(3))
    assert len(w.points(2, 2)) == 25
    with pytest.raises(ValueError):
        L.LatticeWindow(-1)


def test_validate_accepts_default(p01):
    L.validate(p01)


def test_validate_lists_every_problem():
    bad = L.LaxParams.create(2, 0.1, THETA_INF + 0.1, THETA_0, (0.9, 0.25), [SIGMA], np.zeros((1, 2)), [0.005, 1.0])
    with pytest.raises(ValueError) as e:
        L.validate(bad)
    msg = str(e.value)
    for part in ("theta_inf is not traceless", "|t_1| > |t_2|", "nonzero", "theta_1"):
        assert part in msg


def test_shift_t(p01):
    ps = p01.shift_t(2)
    assert ps.log_t[0] == p01.log_t[0]
    assert ps.log_t[1] == pytest.approx(p01.log_t[1] + p01.base.log)


def test_schlesinger_table(p01):
    h1 = hvec(1, 2)
    r1 = L.schlesinger(p01, "r", 1)
    assert np.allclose(r1.theta_inf, p01.theta_inf - h1)
    assert np.allclose(r1.sigmas[0], p01.sigmas[0])
    assert r1.thetas[0] == pytest.approx(p01.thetas[0] + 0.5)
    assert r1.log_t[1] == pytest.approx(p01.log_t[1] + p01.base.log)
    r2 = L.schlesinger(p01, "r", 2)
    assert np.allclose(r2.sigmas[0], p01.sigmas[0] - h1)
    assert r2.log_t == p01.log_t
    pp = L.schlesinger(p01, "p")
    assert np.allclose(pp.theta_0, p01.theta_0 - h1)
    assert pp.thetas == p01.thetas
    with pytest.raises(ValueError):
        L.schlesinger(p01, "r", 3)


def test_determinantal_identity_holds_and_detects_perturbation(p01):
    w, c = L.LatticeWindow(2), 4
    fam = L.tau_family(p01, w, c)
    good = L.tau_family(p01.shift_t(1), w, c)
    lhs, rhs = L.det_tau_sides(p01, 1, 1, 2, fam, good)
    assert abs(lhs - rhs) / abs(lhs) < 1e-6
    bad_p = params(s=S * np.array([[1.01, 1.0]]))
    bad = L.tau_family(bad_p.shift_t(1), w, c)
    lhs, rhs = L.det_tau_sides(p01, 1, 1, 2, fam, bad)
    assert abs(lhs - rhs) / abs(lhs) > 1e-4


def test_det_y_and_extraction(p01):
    xs = [20 * cmath.exp(1j * a) for a in np.linspace(-3, 3, 5)]
    for rep in L.verify_det_y(p01, xs, L.LatticeWindow(2), 6) + L.verify_extraction(p01, L.LatticeWindow(2), 5):
        assert rep.passed, rep.line()


def test_fundamental_solution_outside_annulus(p01):
    with pytest.raises(L.AnnulusError):
        L.fundamental_solution(0, 1e-4, p01, L.LatticeWindow(1), 3)


def test_connection_relation_at_small_q(p01):
    for k in (0, 1):
        rep = L.verify_connection_relation(p01, k, None, L.LatticeWindow(2), 6)
        assert rep.passed, rep.line()


def test_lax_samples_are_distinct_and_avoid_poles(p01):
    xs = L.lax_samples(p01, 5)
    assert len(xs) == 5
    assert len({round(abs(x), 12) for x in xs}) == 5
    for x in xs:
        assert np.isfinite(L.det_a_closed_form(p01, x))
