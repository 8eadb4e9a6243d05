import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tcfv import InvalidStateError, ModelParams
from tcfv import model as m


def rng_state(rng, n=None):
    """Random admissible packed state(s): rho in [0.5, 3], A near identity."""
    shape = () if n is None else (n,)
    rho = rng.uniform(0.5, 3.0, shape)
    v = rng.uniform(-1.0, 1.0, shape + (3,))
    S = rng.uniform(-0.5, 0.5, shape)
    A = np.broadcast_to(np.eye(3), shape + (3, 3)) + 0.2 * rng.uniform(-1, 1, shape + (3, 3))
    J = rng.uniform(-0.5, 0.5, shape + (3,))
    return m.pack(rho, rho[..., None] * v, rho * S, A, J)


PARAMS = ModelParams(gamma=1.4, cv=2.5, rho0=1.0, T0=1.0, cs=1.3, ch=0.9,
                     tau1=0.3, tau2=0.7, eps_mode="constant", eps=0.0)
EULER = ModelParams(gamma=1.4, cv=1.0, cs=0.0, ch=0.0)


def fd_grad(f, q, h=1e-6):
    g = np.zeros_like(q)
    for j in range(q.size):
        qp, qm = q.copy(), q.copy()
        qp[j] += h
        qm[j] -= h
        g[j] = (f(qp) - f(qm)) / (2 * h)
    return g


class TestEnergy:
    def test_frozen_ideal_gas_values(self):
        # rho=1, v=0, S=0, A=I, J=0: E1 = 1/(gamma-1) = 2.5, others zero
        q = m.state_from_primitives(1.0, np.zeros(3), 1.0, params=EULER)
        parts = m.energy_parts(q, EULER)
        assert parts.e1 == pytest.approx(2.5, rel=1e-14)
        assert parts.e2 == 0.0 and parts.e3 == 0.0 and parts.e4 == 0.0
        assert m.temperature(q, EULER) == pytest.approx(2.5, rel=1e-14)
        assert m.pressure(q, EULER) == pytest.approx(1.0, rel=1e-14)

    def test_elastic_and_thermal_parts(self):
        A = np.diag([1.1, 0.9, 1.0])
        J = np.array([0.0, 0.2, 0.0])
        q = m.pack(1.0, np.zeros(3), 0.0, A, J)
        parts = m.energy_parts(q, PARAMS)
        G = A.T @ A
        devG = G - np.trace(G) / 3 * np.eye(3)
        assert parts.e3 == pytest.approx(0.25 * PARAMS.cs**2 * np.sum(devG * devG), rel=1e-14)
        assert parts.e4 == pytest.approx(0.5 * PARAMS.ch**2 * 0.04, rel=1e-14)

    def test_kinetic_energy(self):
        q = m.state_from_primitives(2.0, [3.0, -1.0, 0.5], 1.0, params=EULER)
        assert m.energy_parts(q, EULER).e2 == pytest.approx(0.5 * 2.0 * 10.25, rel=1e-14)

    def test_negative_density_rejected(self):
        q = m.state_from_primitives(1.0, np.zeros(3), 1.0, params=EULER)
        q[0] = -1.0
        with pytest.raises(InvalidStateError):
            m.total_energy(q, EULER)


class TestDuals:
    def test_gradient_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            q = rng_state(rng)
            p = m.dual_variables(q, PARAMS)
            g = fd_grad(lambda x: m.total_energy(x, PARAMS), q)
            np.testing.assert_allclose(p, g, rtol=1e-6, atol=1e-6)

    def test_beta_frozen(self):
        J = np.array([0.0, 0.2, 0.0])
        q = m.pack(1.0, np.zeros(3), 0.0, np.eye(3), J)
        _, _, _, _, beta = m.unpack(m.dual_variables(q, PARAMS))
        np.testing.assert_allclose(beta, PARAMS.ch**2 * J, rtol=1e-14)

    def test_generating_potential_identity(self):
        # p.q - E = (gamma-1) E1 + 4 E3 + 2 E4 = pressure + 4 E3 + 2 E4
        rng = np.random.default_rng(11)
        q = rng_state(rng, 20)
        L = m.generating_potential(q, PARAMS)
        parts = m.energy_parts(q, PARAMS)
        expect = (PARAMS.gamma - 1) * parts.e1 + 4 * parts.e3 + 2 * parts.e4
        np.testing.assert_allclose(L, expect, rtol=1e-12)

    def test_restricted_duals_round_trip(self):
        rng = np.random.default_rng(3)
        q = rng_state(rng, 40)
        pe = m.euler_restricted_duals(q, PARAMS)
        qe = m.euler_state_from_duals(pe, PARAMS)
        np.testing.assert_allclose(qe, q[..., :5], rtol=1e-12, atol=1e-12)

    def test_restricted_duals_match_full_without_elastic(self):
        # with cs = ch = 0 the full dual r equals the restricted r_E
        rng = np.random.default_rng(5)
        q = rng_state(rng, 10)
        p = m.dual_variables(q, EULER)
        pe = m.euler_restricted_duals(q, EULER)
        np.testing.assert_allclose(p[..., :5], pe, rtol=1e-13)


class TestFlux:
    def test_mass_flux_frozen(self):
        q = m.state_from_primitives(5.99924, [19.5975, 0.0, 0.0], 460.894, params=EULER)
        f = m.euler_flux(q, [1.0, 0.0, 0.0], EULER)
        assert f[0] == pytest.approx(117.5701, rel=1e-6)

    def test_flux_matches_dual_form(self):
        rng = np.random.default_rng(13)
        q = rng_state(rng, 15)
        n = np.array([1.0, 0.0, 0.0])
        pe = m.euler_restricted_duals(q, PARAMS)
        np.testing.assert_allclose(
            m.euler_flux_from_duals(pe, n, PARAMS),
            m.euler_flux(q, n, PARAMS)[..., :5],
            rtol=1e-11, atol=1e-11,
        )

    def test_signal_speed_frozen(self):
        q = m.state_from_primitives(1.0, np.zeros(3), 1.0, params=EULER)
        s = m.max_signal_speed(q, [1.0, 0.0, 0.0], EULER)
        assert s == pytest.approx(np.sqrt(1.4), rel=1e-14)

    def test_signal_speed_includes_elastic(self):
        q = m.state_from_primitives(1.0, np.zeros(3), 1.0, params=PARAMS)
        s = m.max_signal_speed(q, [1.0, 0.0, 0.0], PARAMS)
        T = m.temperature(q, PARAMS)
        expect = np.sqrt(1.4 + 4 / 3 * PARAMS.cs**2
                         + PARAMS.ch**2 * max(1.0, T / PARAMS.cv))
        assert s == pytest.approx(expect, rel=1e-14)


class TestHessian:
    def test_fd_oracle(self):
        rng = np.random.default_rng(19)
        q = rng_state(rng)
        H = m.hessian(q, PARAMS)
        np.testing.assert_allclose(H, H.T, rtol=0, atol=1e-13)
        for j in range(m.NCOMP):
            h = 1e-6 * max(1.0, abs(q[j]))
            qp, qm = q.copy(), q.copy()
            qp[j] += h
            qm[j] -= h
            col = (m.dual_variables(qp, PARAMS) - m.dual_variables(qm, PARAMS)) / (2 * h)
            np.testing.assert_allclose(H[:, j], col, rtol=1e-5, atol=1e-5)

    def test_quadform_matches_matrix(self):
        rng = np.random.default_rng(23)
        for _ in range(5):
            q = rng_state(rng)
            dq = rng.uniform(-1, 1, m.NCOMP)
            H = m.hessian(q, PARAMS)
            np.testing.assert_allclose(
                m.hessian_quadform(q, dq, PARAMS), dq @ H @ dq, rtol=1e-6, atol=1e-8)

    def test_quadform_batched(self):
        rng = np.random.default_rng(29)
        q = rng_state(rng, 8)
        dq = rng.uniform(-1, 1, (8, m.NCOMP))
        batched = m.hessian_quadform(q, dq, PARAMS)
        single = [m.hessian_quadform(q[k], dq[k], PARAMS) for k in range(8)]
        np.testing.assert_allclose(batched, single, rtol=1e-13)

    def test_euler_block_positive_definite(self):
        rng = np.random.default_rng(31)
        q = rng_state(rng, 30)
        H = m.euler_hessian_block(q, PARAMS)
        w = np.linalg.eigvalsh(H)
        assert np.all(w > 0.0)


class TestRelaxation:
    def test_compatibility_identity(self):
        # T*dS + alpha:dA + beta.dJ = 0 exactly (entropy production balances
        # the energy released by relaxing A and J)
        rng = np.random.default_rng(37)
        q = rng_state(rng, 25)
        src = m.relaxation_sources(q, PARAMS)
        p = m.dual_variables(q, PARAMS)
        residual = np.einsum("...i,...i->...", p, src)
        scale = np.max(np.abs(p)) * np.max(np.abs(src))
        np.testing.assert_allclose(residual, 0.0, atol=1e-13 * max(scale, 1.0))

    def test_entropy_production_nonnegative(self):
        rng = np.random.default_rng(41)
        q = rng_state(rng, 50)
        src = m.relaxation_sources(q, PARAMS)
        assert np.all(src[..., m.I_RHOS] >= 0.0)

    def test_mass_momentum_untouched(self):
        rng = np.random.default_rng(43)
        src = m.relaxation_sources(rng_state(rng, 10), PARAMS)
        assert np.all(src[..., m.I_RHO] == 0.0)
        assert np.all(src[..., m.I_MOM] == 0.0)

    def test_zero_wave_speed_guards(self):
        rng = np.random.default_rng(47)
        q = rng_state(rng, 10)
        no_shear = PARAMS.with_(cs=0.0)
        src = m.relaxation_sources(q, no_shear)
        # J still relaxes; distortion source is finite (wave speed cancels)
        assert np.all(np.isfinite(src))
        no_heat = PARAMS.with_(ch=0.0)
        src = m.relaxation_sources(q, no_heat)
        assert np.all(np.isfinite(src))

    def test_degenerate_distortion_rejected(self):
        q = m.pack(1.0, np.zeros(3), 0.0, np.zeros((3, 3)), np.zeros(3))
        with pytest.raises(InvalidStateError):
            m.relaxation_sources(q, PARAMS)


class TestTransport:
    def test_tau_frozen_values(self):
        p = ModelParams(cs=50.0, ch=50.0, T0=1.0)
        tau1, _ = m.tau_from_transport(2e-2, 1e-3, p)
        assert tau1 == pytest.approx(4.8e-5, rel=1e-14)
        p = ModelParams(cs=1.0, ch=1.0)
        tau1, tau2 = m.tau_from_transport(1e-2, 2e-2, p)
        assert tau1 == pytest.approx(6e-2, rel=1e-14)
        assert tau2 == pytest.approx(2e-2, rel=1e-14)

    def test_zero_transport_rejected(self):
        with pytest.raises(ValueError):
            m.tau_from_transport(0.0, 0.0, PARAMS)

    def test_viscosity_without_shear_speed_rejected(self):
        with pytest.raises(ValueError):
            m.tau_from_transport(1e-2, 0.0, ModelParams(cs=0.0, ch=1.0))


class TestParams:
    @pytest.mark.parametrize("kw", [
        dict(gamma=1.0), dict(cv=0.0), dict(cfl=0.0), dict(cfl=1.5),
        dict(cs=-1.0), dict(eps=-1.0), dict(eps_mode="bogus"), dict(tau1=0.0),
    ])
    def test_invalid_params_rejected(self, kw):
        with pytest.raises(ValueError):
            ModelParams(**kw)


@settings(max_examples=60, deadline=None)
@given(
    rho=st.floats(0.3, 5.0),
    vx=st.floats(-2.0, 2.0),
    S=st.floats(-1.0, 1.0),
    a=st.floats(-0.3, 0.3),
    j=st.floats(-0.5, 0.5),
)
def test_thermo_identities_property(rho, vx, S, a, j):
    """Temperature, pressure and the potential identity hold pointwise."""
    A = np.eye(3) + a * np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    q = m.pack(rho, np.array([rho * vx, 0.0, 0.0]), rho * S, A, np.array([j, 0.0, 0.0]))
    parts = m.energy_parts(q, PARAMS)
    T = m.temperature(q, PARAMS)
    assert T == pytest.approx(parts.e1 / (rho * PARAMS.cv), rel=1e-12)
    assert m.pressure(q, PARAMS) == pytest.approx((PARAMS.gamma - 1) * parts.e1, rel=1e-12)
    L = m.generating_potential(q, PARAMS)
    expect = (PARAMS.gamma - 1) * parts.e1 + 4 * parts.e3 + 2 * parts.e4
    assert L == pytest.approx(expect, rel=1e-11, abs=1e-13)

    src = m.relaxation_sources(q, PARAMS)
    p = m.dual_variables(q, PARAMS)
    assert abs(float(np.dot(p, src))) <= 1e-12 * (1.0 + float(np.max(np.abs(src))))
    assert src[m.I_RHOS] >= 0.0
