import cmath
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnek import blocks as Bk
from qnek.partitions import enumerate_tuples, nekrasov_factor, size
from qnek.qspecial import QBase, ResonanceError, q_pochhammer

Q3 = QBase(0.3)


def tl(*v):
    a = np.array(v, dtype=complex)
    return a - a.mean()


S0, S1, S2, S3 = tl(0.11 + 0.03j, 0), tl(0.27 - 0.08j, 0), tl(-0.05 + 0.12j, 0), tl(0.31, 0.02j)
TH = (0.35 + 0.1j, 0.42 - 0.05j, 0.3 + 0.02j)


def brute_instanton_sum(N, thetas, sigmas, ratios, cutoff, base):
    """The defining multi-sum over internal tuples, written out directly."""
    m = len(thetas)
    pool = enumerate_tuples(N, cutoff)
    empty = ((),) * N
    total = 0j
    for inner in itertools.product(pool, repeat=m - 1):
        lams = (empty,) + inner + (empty,)
        term = 1 + 0j
        for p in range(1, m):
            term *= ratios[p - 1] ** sum(size(x) for x in lams[p])
        for p in range(1, m + 1):
            for k in range(N):
                for kk in range(N):
                    e = sigmas[p][k] - thetas[p - 1] - sigmas[p - 1][kk]
                    term *= nekrasov_factor(lams[p][k], lams[p - 1][kk], base.power(e), base)
        for p in range(1, m):
            for k in range(N):
                for kk in range(N):
                    e = sigmas[p][k] - sigmas[p][kk]
                    term /= nekrasov_factor(lams[p][k], lams[p][kk], base.power(e), base)
        total += term
    return total


def test_instanton_sum_matches_brute_force():
    p = Bk.BlockParams(2, TH, (S0, S1, S2, S3), (0.0, cmath.log(2.0 + 0.5j), cmath.log(5.0 - 1j)))
    ratios = p.ratios(Q3)
    for cutoff in (0, 1, 2):
        ref = brute_instanton_sum(2, p.thetas, p.sigmas, ratios, cutoff, Q3)
        got = Bk.instanton_sum(p, cutoff, Q3)
        assert abs(got - ref) / abs(ref) < 1e-13


def test_first_order_coefficient_of_two_point_sum():
    # one internal tuple: the x-linear coefficient is a sum over |lam| = 1
    p = Bk.BlockParams(2, TH[:2], (S0, S1, S2), (0.0, cmath.log(3.0)))
    z = p.ratios(Q3)[0]
    c1 = Bk.instanton_sum(p, 1, Q3) - Bk.instanton_sum(p, 0, Q3)
    ref = brute_instanton_sum(2, p.thetas, p.sigmas, [1.0], 1, Q3) - 1
    assert abs(c1 / z - ref) / abs(ref) < 1e-13


def test_cutoff_zero_is_the_prefactor():
    p = Bk.BlockParams.from_display(TH[:2][::-1], [S2, S1, S0], [3.0, 1.0])
    assert Bk.instanton_sum(p, 0, Q3) == 1
    assert Bk.conformal_block(p, 0, Q3) == pytest.approx(Bk.block_prefactor(p, Q3), rel=1e-15)
    sums = Bk.block_partial_sums(p, 3, Q3)
    assert len(sums) == 4 and sums[0] == pytest.approx(Bk.block_prefactor(p, Q3), rel=1e-15)


def test_from_display_reverses_order():
    p = Bk.BlockParams.from_display([TH[1], TH[0]], [S2, S1, S0], log_points=[1.0, 0.0])
    assert p.thetas == (TH[0], TH[1])
    assert np.array_equal(p.sigmas[0], S0)
    assert p.log_points == (0.0, 1.0)


def test_block_params_validation():
    with pytest.raises(ValueError):
        Bk.BlockParams(2, TH[:2], (S0, S1), (0.0, 1.0))
    with pytest.raises(ValueError):
        Bk.BlockParams(2, TH[:1], (S0, np.array([0.3, 0.1])), (0.0,))
    p = Bk.BlockParams(2, TH[:2], (S0, S1, S2), (0.0, cmath.log(0.01)))
    with pytest.raises(ValueError):
        Bk.conformal_block(p, 2, Q3)


def test_degenerate_normalization_drops_vanishing_factor():
    i = 1
    s2 = S1
    s1 = s2 + Bk.hvec(i, 2)
    assert Bk.degenerate_index(0.5, s2, s1, 2) == i
    assert Bk.degenerate_index(0.5 + 1e-3, s2, s1, 2) is None
    val = Bk.normalization(0.5, s2, s1, Q3, degenerate_index=i)
    assert np.isfinite(val) and val != 0
    with pytest.raises(AssertionError):
        Bk.normalization(0.4, s2, s1, Q3, degenerate_index=i)


@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("kind", ["zero", "infinity"])
def test_reduction_to_hypergeometric(N, kind):
    rng = np.random.default_rng(N)
    s2 = tl(*(rng.uniform(-0.3, 0.3, N) + 0.1j * rng.uniform(-1, 1, N)))
    s0 = tl(*(rng.uniform(-0.3, 0.3, N) + 0.1j * rng.uniform(-1, 1, N)))
    lx = (cmath.log(1.3 + 0.2j), cmath.log(0.4 - 0.1j)) if kind == "zero" else (cmath.log(0.3 + 0.2j), cmath.log(1.4))
    for i in range(1, N + 1):
        rep = Bk.verify_reduction(kind, 0.3 + 0.05j, s2, s0, i, *lx, Q3, cutoff=8)
        assert rep.passed, rep.line()


def test_q_binomial_theorem():
    # 1phi0(q^a; ; q, z) = (q^a z; q)_inf / (z; q)_inf
    b = QBase(0.4)
    a, z = 0.37 - 0.2j, 0.3 + 0.1j
    val = Bk.q_hypergeometric([a], [], z, b, 80)
    ref = q_pochhammer(b.power(a) * z, float("inf"), b) / q_pochhammer(z, float("inf"), b)
    assert abs(val - ref) / abs(ref) < 1e-13


@pytest.mark.parametrize("N", [2, 3])
def test_connection_matrix_laws(N):
    rng = np.random.default_rng(10 + N)
    for _ in range(5):
        s2 = tl(*(rng.uniform(-0.4, 0.4, N) + 0.2j * rng.uniform(-1, 1, N)))
        s0 = tl(*(rng.uniform(-0.4, 0.4, N) + 0.2j * rng.uniform(-1, 1, N)))
        th = complex(rng.uniform(0.2, 0.8), rng.uniform(-0.2, 0.2))
        u = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3))
        for rep in Bk.verify_matrix_laws(th, s2, s0, u, Q3):
            assert rep.passed, rep.line()


def test_connection_matrix_resonance():
    with pytest.raises(ResonanceError):
        Bk.connection_matrix(0.3, S1, tl(0.2, 0.2), 0.1, Q3)


FOUR = {"theta1": 0.6 + 0.02j, "sigma2": tl(0.13 - 0.05j, 0), "sigma0": tl(-0.21 + 0.04j, 0)}


def _four_point_ratios(r):
    return [cmath.log(r) + 1j * (0.4 + 2.0 * a) for a in range(3)]


def test_four_point_connection_holds():
    rep = Bk.verify_connection("four_point", FOUR, (0.2 + 0.3j, _four_point_ratios(0.9)), 12, Q3, 1e-6)
    assert rep.passed, rep.line()


def test_four_point_connection_detects_perturbed_matrix():
    def bad(*a):
        B = Bk.connection_matrix(*a)
        B[0, 1] *= 1.01
        return B

    rep = Bk.verify_connection("four_point", FOUR, (0.2 + 0.3j, _four_point_ratios(0.9)), 12, Q3, 1e-6,
                               matrix_fn=bad)
    assert not rep.passed and rep.residual > 1e-4


def test_four_point_rejects_points_outside_overlap():
    with pytest.raises(ValueError):
        Bk.verify_connection("four_point", FOUR, (0.0, [cmath.log(0.1)]), 4, Q3, 1e-6)


@pytest.mark.parametrize("which", ["S1", "S2", "S3"])
@pytest.mark.parametrize("N", [2, 3])
def test_contiguity_examples(which, N):
    rng = np.random.default_rng(10 * N + int(which[1]))
    pool = enumerate_tuples(N, 1)
    lam, nu = pool[-1], pool[1]
    i, j = (1, 1) if which == "S3" else (1, 2)
    params = {"theta2": 0.31 + 0.04j, "sigma1": tl(*rng.uniform(-0.3, 0.3, N)), "sigma3": tl(*(0.2j * rng.uniform(-1, 1, N))),
              "i": i, "j": j}
    m = max(len(lam[j - 1]), 1)
    rep = Bk.verify_contiguity(which, lam, nu, params, m, 4, Q3)
    assert rep.passed, rep.line()


@settings(max_examples=25, deadline=None)
@given(u=st.builds(complex, st.floats(-0.5, 0.5), st.floats(-0.3, 0.3)))
def test_connection_det_closed_form(u):
    B = Bk.connection_matrix(0.55 + 0.05j, S1, S2, u, Q3)
    d = Bk.connection_det(0.55 + 0.05j, S1, S2, u, Q3)
    assert abs(np.linalg.det(B) - d) <= 1e-10 * max(1.0, abs(d))
