import numpy as np
import pytest

from tcfv import ModelParams, PathInversionError
from tcfv import model as m
from tcfv import quadpath as qp

PARAMS = ModelParams(gamma=1.4, cv=2.5, cs=1.1, ch=0.8, tau1=0.2, tau2=0.4,
                     eps_mode="constant", eps=0.0)

NORMAL = np.array([1.0, 0.0, 0.0])


def sample_pair(seed=0):
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(2):
        rho = rng.uniform(0.6, 2.5)
        v = rng.uniform(-0.8, 0.8, 3)
        S = rng.uniform(-0.4, 0.4)
        A = np.eye(3) + 0.15 * rng.uniform(-1, 1, (3, 3))
        J = rng.uniform(-0.4, 0.4, 3)
        states.append(m.pack(rho, rho * v, rho * S, A, J))
    return states[0], states[1]


class TestQuadrature:
    def test_unit_interval_rules(self):
        for n in (1, 2, 3, 5):
            x, w = qp.gauss_legendre_unit(n)
            assert np.all((x > 0) & (x < 1))
            assert np.sum(w) == pytest.approx(1.0, rel=1e-14)
            # degree-(2n-1) exactness on monomials
            for k in range(2 * n):
                assert np.sum(w * x**k) == pytest.approx(1.0 / (k + 1), rel=1e-13)

    def test_invalid_order(self):
        with pytest.raises(ValueError):
            qp.gauss_legendre_unit(0)


class TestCompatibleFlux:
    def test_consistency_with_zero_jump(self):
        qL, _ = sample_pair(1)
        f = qp.compatible_euler_flux(qL, qL, NORMAL, PARAMS)
        np.testing.assert_allclose(f, m.euler_flux(qL, NORMAL, PARAMS)[:5],
                                   rtol=1e-13, atol=1e-13)

    def test_energy_flux_single_valued(self):
        # the implied total-energy flux agrees from both sides of the face
        # to <= 1e-10 at 5 quadrature nodes for moderate random gas jumps
        rng = np.random.default_rng(2)
        quad = qp.UnitQuadrature(5)
        for _ in range(20):
            rho = rng.uniform(0.95, 1.05, 2)
            v = rng.uniform(-0.1, 0.1, (2, 3))
            p = rng.uniform(0.95, 1.05, 2)
            qL = m.state_from_primitives(rho[0], v[0], p[0], params=PARAMS)
            qR = m.state_from_primitives(rho[1], v[1], p[1], params=PARAMS)
            fhat = qp.compatible_euler_flux(qL, qR, NORMAL, PARAMS, quad)
            FL, FR = qp.compatible_energy_flux(qL, qR, fhat, NORMAL, PARAMS)
            assert abs(FL - FR) <= 1e-10 * (1.0 + abs(FL))

    def test_flux_condition_residual_shrinks(self):
        # the jump condition dp . fhat = d(u L) is met to quadrature error,
        # which must drop by well over 10x from 2 to 5 nodes
        qL, qR = sample_pair(3)
        res = []
        for n in (2, 5):
            fhat = qp.compatible_euler_flux(qL, qR, NORMAL, PARAMS,
                                            qp.UnitQuadrature(n))
            FL, FR = qp.compatible_energy_flux(qL, qR, fhat, NORMAL, PARAMS)
            res.append(abs(FL - FR))
        assert res[1] < res[0] / 10.0

    def test_batched_matches_scalar(self):
        pairs = [sample_pair(s) for s in range(6)]
        qL = np.stack([p[0] for p in pairs])
        qR = np.stack([p[1] for p in pairs])
        batched = qp.compatible_euler_flux(qL, qR, NORMAL, PARAMS)
        for k, (a, b) in enumerate(pairs):
            np.testing.assert_allclose(
                batched[k], qp.compatible_euler_flux(a, b, NORMAL, PARAMS),
                rtol=1e-14)

    def test_inadmissible_segment_raises(self):
        qL, qR = sample_pair(4)
        # a huge entropy makes the density along the dual segment underflow
        qbad = qR.copy()
        qbad[m.I_RHOS] = 500.0 * qbad[m.I_RHO]
        with pytest.raises(PathInversionError):
            qp.compatible_euler_flux(qL, qbad, NORMAL,
                                     PARAMS.with_(gamma=1.001))


class TestRoeAverage:
    def test_jump_identity(self):
        # H_avg (qR - qL) == p(qR) - p(qL) up to quadrature error
        qL, qR = sample_pair(5)
        H = qp.roe_hessian(qL, qR, PARAMS, qp.UnitQuadrature(8))
        dq = qR - qL
        dp = m.dual_variables(qR, PARAMS) - m.dual_variables(qL, PARAMS)
        np.testing.assert_allclose(H @ dq, dp, rtol=1e-6, atol=1e-6)

    def test_quadform_matches_matrix(self):
        qL, qR = sample_pair(6)
        rng = np.random.default_rng(6)
        dq = rng.uniform(-1, 1, m.NCOMP)
        H = qp.roe_hessian(qL, qR, PARAMS)
        got = qp.roe_quadform(qL, qR, dq, PARAMS)
        assert got == pytest.approx(dq @ H @ dq, rel=1e-6, abs=1e-8)

    def test_quadform_nonnegative(self):
        # the energy is convex on the sampled region, so the averaged
        # quadratic form is nonnegative
        rng = np.random.default_rng(7)
        for s in range(10):
            qL, qR = sample_pair(s)
            dq = rng.uniform(-1, 1, m.NCOMP)
            assert qp.roe_quadform(qL, qR, dq, PARAMS) >= -1e-12

    def test_L_pp_is_inverse(self):
        qL, qR = sample_pair(8)
        H = qp.roe_euler_block(qL, qR, PARAMS)
        L = qp.roe_L_pp(qL, qR, PARAMS)
        np.testing.assert_allclose(L @ H, np.eye(5), rtol=0, atol=1e-11)


class TestTimeAverage:
    def test_reduces_to_point_value(self):
        qL, _ = sample_pair(9)
        pt = qp.time_averaged_dual(qL, qL, PARAMS)
        np.testing.assert_allclose(pt, m.dual_variables(qL, PARAMS), rtol=1e-14)

    def test_energy_jump_identity(self):
        # p_tilde . (qn1 - qn) == E(qn1) - E(qn) up to quadrature error,
        # exactly the telescoping used by the fully discrete scheme
        qn, qn1 = sample_pair(10)
        pt = qp.time_averaged_dual(qn, qn1, PARAMS, qp.UnitQuadrature(8))
        dE = m.total_energy(qn1, PARAMS) - m.total_energy(qn, PARAMS)
        assert float(pt @ (qn1 - qn)) == pytest.approx(dE, rel=1e-7, abs=1e-9)
