"""Thermodynamics of the unified hyperbolic continuum model.

The conserved state of a cell is packed into a flat vector of
``NCOMP = 17`` components::

    q = (rho, rho*v[3], rho*S, A[3x3] row-major, J[3])

where ``A`` is the distortion field and ``J`` the thermal impulse.
All operations in this module are pure functions of ``q`` and the model
parameters and broadcast over arbitrary leading axes, i.e. they accept
a single state of shape ``(17,)`` as well as whole grids of shape
``(n, 17)`` or ``(nx, ny, 17)``.

The total energy density splits into four parts

    E1 = rho^gamma * exp(S/cv) / (gamma - 1)      (ideal-gas internal)
    E2 = rho |v|^2 / 2                            (kinetic)
    E3 = rho cs^2 devG:devG / 4,  G = A^T A       (elastic shear)
    E4 = rho ch^2 |J|^2 / 2                       (thermal impulse)

and the dual vector p = dE/dq = (r, v, T, alpha, beta) generates the
fluxes through the potential L = p.q - E.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import InvalidStateError

NCOMP = 17

# slot ranges inside the packed state vector
I_RHO = 0
I_MOM = slice(1, 4)
I_RHOS = 4
I_A = slice(5, 14)
I_J = slice(14, 17)

_EPS_FD = np.finfo(float).eps ** (1.0 / 3.0)
_DET_FLOOR = 1e-12

#: relaxation times at or above this value are treated as infinite
#: (hyperelastic solid / no heat relaxation)
INF_TAU = 1e19


@dataclass(frozen=True)
class ModelParams:
    """Equation-of-state and relaxation constants plus dissipation policy.

    ``eps_mode`` selects the interface viscosity: ``"constant"`` uses the
    fixed value ``eps``, ``"limited"`` couples it to the local total-energy
    slope limiter and the maximum signal speed.
    """

    gamma: float = 1.4
    cv: float = 1.0
    rho0: float = 1.0
    T0: float = 1.0
    cs: float = 0.0
    ch: float = 0.0
    tau1: float = 1e20
    tau2: float = 1e20
    eps_mode: str = "limited"
    eps: float = 0.0
    cfl: float = 0.5

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        for name in ("cv", "rho0", "T0", "tau1", "tau2"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.cs < 0.0 or self.ch < 0.0:
            raise ValueError("wave speeds cs, ch must be nonnegative")
        if self.eps_mode not in ("constant", "limited"):
            raise ValueError(f"unknown eps_mode {self.eps_mode!r}")
        if self.eps < 0.0:
            raise ValueError("eps must be nonnegative")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")

    def with_(self, **kw) -> "ModelParams":
        return replace(self, **kw)


@dataclass
class EnergyParts:
    """The four contributions to the total energy density."""

    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    e4: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.e1 + self.e2 + self.e3 + self.e4


def unpack(q: np.ndarray):
    """Split a packed state into (rho, mom, rhoS, A, J) views."""
    q = np.asarray(q)
    rho = q[..., I_RHO]
    mom = q[..., I_MOM]
    rhoS = q[..., I_RHOS]
    A = q[..., I_A].reshape(q.shape[:-1] + (3, 3))
    J = q[..., I_J]
    return rho, mom, rhoS, A, J


def pack(rho, mom, rhoS, A, J) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    q = np.empty(rho.shape + (NCOMP,))
    q[..., I_RHO] = rho
    q[..., I_MOM] = mom
    q[..., I_RHOS] = rhoS
    q[..., I_A] = np.asarray(A).reshape(rho.shape + (9,))
    q[..., I_J] = J
    return q


def _check_positive_rho(rho):
    if np.any(rho <= 0.0) or not np.all(np.isfinite(rho)):
        raise InvalidStateError("non-positive or non-finite density")


def validate(q: np.ndarray, params: ModelParams) -> None:
    """Raise InvalidStateError if any state is inadmissible (no silent fixes)."""
    rho, _, _, _, _ = unpack(q)
    _check_positive_rho(rho)
    if not np.all(np.isfinite(q)):
        raise InvalidStateError("non-finite state component")
    T = temperature(q, params)
    if np.any(T <= 0.0):
        raise InvalidStateError("non-positive temperature")


def metric_tensors(A: np.ndarray):
    """Return G = A^T A and its trace-free part devG."""
    G = np.swapaxes(A, -1, -2) @ A
    devG = G.copy()
    d = (G[..., 0, 0] + G[..., 1, 1] + G[..., 2, 2]) / 3.0
    devG[..., 0, 0] -= d
    devG[..., 1, 1] -= d
    devG[..., 2, 2] -= d
    return G, devG


def energy_parts(q: np.ndarray, params: ModelParams) -> EnergyParts:
    """Evaluate the four energy densities E1..E4 for each state."""
    rho, mom, rhoS, A, J = unpack(q)
    _check_positive_rho(rho)
    S = rhoS / rho
    e1 = rho ** params.gamma * np.exp(S / params.cv) / (params.gamma - 1.0)
    e2 = 0.5 * (mom * mom).sum(-1) / rho
    if params.cs > 0.0:
        _, devG = metric_tensors(A)
        e3 = 0.25 * rho * params.cs**2 * (devG * devG).sum((-1, -2))
    else:
        e3 = np.zeros_like(rho)
    if params.ch > 0.0:
        e4 = 0.5 * params.ch**2 * rho * (J * J).sum(-1)
    else:
        e4 = np.zeros_like(rho)
    return EnergyParts(e1, e2, e3, e4)


def total_energy(q: np.ndarray, params: ModelParams) -> np.ndarray:
    return energy_parts(q, params).total


def temperature(q: np.ndarray, params: ModelParams) -> np.ndarray:
    """T = rho^(gamma-1) exp(S/cv) / ((gamma-1) cv)."""
    rho, _, rhoS, _, _ = unpack(q)
    _check_positive_rho(rho)
    S = rhoS / rho
    g = params.gamma
    return rho ** (g - 1.0) * np.exp(S / params.cv) / ((g - 1.0) * params.cv)


def pressure(q: np.ndarray, params: ModelParams) -> np.ndarray:
    """p = (gamma - 1) * E1 = rho^gamma exp(S/cv), the ideal-gas pressure
    of the entropy EOS."""
    rho, _, rhoS, _, _ = unpack(q)
    _check_positive_rho(rho)
    return rho ** params.gamma * np.exp(rhoS / (rho * params.cv))


def dual_variables(q: np.ndarray, params: ModelParams) -> np.ndarray:
    """Thermodynamic dual vector p = dE/dq, packed like the state.

    Components: (r, v[3], T, alpha[3x3], beta[3]) with
    r = dE/drho at fixed (rho v, rho S, A, J).
    """
    rho, mom, rhoS, A, J = unpack(q)
    _check_positive_rho(rho)
    g, cv = params.gamma, params.cv
    S = rhoS / rho
    v = mom / rho[..., None]
    e1 = rho**g * np.exp(S / cv) / (g - 1.0)
    T = e1 / (rho * cv)
    r = (e1 / rho) * (g - S / cv) - 0.5 * (v * v).sum(-1)
    if params.cs > 0.0:
        _, devG = metric_tensors(A)
        r = r + 0.25 * params.cs**2 * (devG * devG).sum((-1, -2))
        alpha = rho[..., None, None] * params.cs**2 * (A @ devG)
    else:
        alpha = np.zeros_like(A)
    if params.ch > 0.0:
        r = r + 0.5 * params.ch**2 * (J * J).sum(-1)
        beta = rho[..., None] * params.ch**2 * J
    else:
        beta = np.zeros_like(J)
    return pack(r, v, T, alpha, beta)


def generating_potential(q: np.ndarray, params: ModelParams) -> np.ndarray:
    """L = p.q - E, the Legendre transform of the total energy."""
    p = dual_variables(q, params)
    return (p * q).sum(-1) - total_energy(q, params)


def stress_and_heat(q: np.ndarray, params: ModelParams):
    """Shear stress sigma = A^T alpha, thermal stress omega = J (x) beta,
    heat flux h = T beta."""
    rho, _, _, A, J = unpack(q)
    _check_positive_rho(rho)
    p = dual_variables(q, params)
    _, _, T, alpha, beta = unpack(p)
    sigma = np.swapaxes(A, -1, -2) @ alpha
    omega = J[..., :, None] * beta[..., None, :]
    h = T[..., None] * beta
    return sigma, omega, h


def relaxation_sources(q: np.ndarray, params: ModelParams) -> np.ndarray:
    """Relaxation source vector (zero in the rho and momentum slots).

    dA = -alpha/theta1, dJ = -beta/theta2 and the matching nonnegative
    entropy production d(rho S) = (alpha:alpha)/(theta1 T) +
    (beta.beta)/(theta2 T).  The wave speeds cancel algebraically, so the
    formulas below stay finite for cs = 0 or ch = 0 (sources vanish then).
    """
    q = np.asarray(q, dtype=float)
    if _kernels.HAVE_NUMBA and q.ndim >= 1 and q.shape[-1] == NCOMP:
        flat = np.ascontiguousarray(q.reshape(-1, NCOMP))
        out = np.empty_like(flat)
        err = _kernels.relax_sources(
            flat, params.gamma, params.cv, params.cs, params.ch,
            params.rho0, params.T0, params.tau1, params.tau2, out)
        if err == _kernels.ERR_RHO:
            raise InvalidStateError("non-positive or non-finite density")
        if err != 0:
            raise InvalidStateError(
                "degenerate distortion field (det A <= 0)")
        return out.reshape(q.shape)
    rho, _, _, A, J = unpack(q)
    _check_positive_rho(rho)
    T = temperature(q, params)
    if np.any(T <= 0.0):
        raise InvalidStateError("non-positive temperature")

    _, devG = metric_tensors(A)
    AdevG = A @ devG
    # alpha/theta1 with theta1 = rho0 tau1 cs^2 |A|^(-5/3) / 3; cs^2 cancels,
    # but with cs = 0 the distortion carries no energy and does not relax.
    # An effectively infinite tau1 turns the term off without ever looking
    # at det A, so a sheared solid can keep running past a degenerate cell.
    if params.cs > 0.0 and params.tau1 < INF_TAU:
        detA = np.linalg.det(A)
        if np.any(detA <= _DET_FLOOR):
            raise InvalidStateError(
                "degenerate distortion field (det A <= 0)")
        dA = -3.0 * rho[..., None, None] * detA[..., None, None] ** (5.0 / 3.0) \
            * AdevG / (params.rho0 * params.tau1)
    else:
        dA = np.zeros_like(A)
    # beta/theta2 with theta2 = rho0 T0 tau2 ch^2 / T; ch^2 cancels likewise
    if params.ch > 0.0 and params.tau2 < INF_TAU:
        dJ = -rho[..., None] * T[..., None] * J / (params.rho0 * params.T0 * params.tau2)
    else:
        dJ = np.zeros_like(J)

    alpha = rho[..., None, None] * params.cs**2 * AdevG
    beta = rho[..., None] * params.ch**2 * J
    dS = -(
        (alpha * dA).sum((-1, -2))
        + (beta * dJ).sum(-1)
    ) / T
    zero = np.zeros_like(rho)
    return pack(zero, np.zeros_like(J), dS, dA, dJ)


def _relax_eig_root(gh: float, t: float, c: float) -> float:
    """Root g of g (1 + c (g - t))^2 = gh on the branch with positive
    multiplier, via a bracketed Newton iteration.

    phi(g) = g (1 + c (g - t))^2 is strictly increasing for
    g > max(0, t - 1/c) and vanishes at the bracket's lower end, so the
    root there is unique.
    """
    lo = max(0.0, t - 1.0 / c) if c > 0.0 else 0.0
    hi = max(gh, lo + 1.0)
    while hi * (1.0 + c * (hi - t)) ** 2 < gh:
        hi *= 2.0
    g = min(max(gh, lo), hi)
    for _ in range(100):
        mm = 1.0 + c * (g - t)
        f = g * mm * mm - gh
        if abs(f) <= 1e-15 * max(gh, 1e-300):
            break
        if f < 0.0:
            lo = g
        else:
            hi = g
        der = mm * (mm + 2.0 * g * c)
        gn = g - f / der if der > 0.0 else lo - 1.0
        g = gn if lo < gn < hi else 0.5 * (lo + hi)
    return g


def _relax_eigendecomp(ghat: np.ndarray, c: float) -> np.ndarray:
    """Multipliers m_i = 1 + c (g_i - tr/3) of the implicit distortion
    relaxation solve, given the eigenvalues ``ghat`` of G = A^T A.

    The relaxed eigenvalues satisfy g_i m_i^2 = ghat_i; eliminating them
    leaves one scalar equation for t = tr(G')/3, which is strictly
    monotone, so a bracketed Newton iteration always converges.
    """
    if c <= 0.0:
        return np.ones(3)
    tlo = 0.0
    thi = float(np.max(ghat)) + 1.0
    t = float(np.sum(ghat)) / 3.0
    gv = np.empty(3)
    for _ in range(100):
        for k in range(3):
            gv[k] = _relax_eig_root(float(ghat[k]), t, c)
        psi = (gv[0] + gv[1] + gv[2]) / 3.0 - t
        if abs(psi) <= 1e-15 * max(thi, 1.0):
            break
        if psi > 0.0:
            tlo = t
        else:
            thi = t
        dpsi = -1.0
        for k in range(3):
            mm = 1.0 + c * (gv[k] - t)
            dpsi += 2.0 * gv[k] * c / (3.0 * (mm + 2.0 * gv[k] * c))
        tn = t - psi / dpsi if dpsi < 0.0 else tlo - 1.0
        t = tn if tlo < tn < thi else 0.5 * (tlo + thi)
    return 1.0 + c * (gv - t)


def relaxation_update(q: np.ndarray, dt: float,
                      params: ModelParams) -> np.ndarray:
    """Backward-Euler solve of the cellwise relaxation ODE for (A, J).

    Solves A' = A - dt k(A') A' devG(A') and the analogous scalar
    equation for J, then picks the entropy slot so the cell total energy
    is preserved exactly: the gas internal energy absorbs whatever the
    elastic and thermal-impulse parts release, which also makes the
    produced entropy nonnegative.  The implicit solve is unconditionally
    stable and lands on the quasi-equilibrium deviation (the correct
    effective viscosity and heat conduction) even when dt is far larger
    than the relaxation times, which an explicit source treatment or an
    exact split ODE flow both get wrong.

    The distortion equation reduces, in the eigenbasis of G = A^T A, to
    three coupled scalar equations g_i (1 + c (g_i - tr/3))^2 = ghat_i
    solved with a Newton iteration; the thermal-impulse equation is a
    single scalar equation in the relaxed energy share.
    """
    g, cv, cs, ch = params.gamma, params.cv, params.cs, params.ch
    act1 = cs > 0.0 and params.tau1 < INF_TAU
    act2 = ch > 0.0 and params.tau2 < INF_TAU
    if (not act1 and not act2) or dt == 0.0:
        return np.array(q, dtype=float, copy=True)
    q = np.array(q, dtype=float, copy=True)
    if _kernels.HAVE_NUMBA and q.shape[-1] == NCOMP:
        flat = np.ascontiguousarray(q.reshape(-1, NCOMP))
        err = _kernels.relax_update(
            flat, float(dt), g, cv, cs, ch, params.rho0, params.T0,
            params.tau1, params.tau2)
        if err == _kernels.ERR_RHO:
            raise InvalidStateError("non-positive or non-finite density")
        if err == _kernels.ERR_DET:
            raise InvalidStateError("degenerate distortion field (det A <= 0)")
        if err != 0:
            raise InvalidStateError(
                "implicit relaxation solve failed")
        return flat.reshape(q.shape)

    rho, mom, rhoS, A, J = unpack(q)
    _check_positive_rho(rho)
    S = rhoS / rho
    e1 = rho**g * np.exp(S / cv) / (g - 1.0)
    e3 = np.zeros_like(rho)
    e4 = np.zeros_like(rho)
    if act1:
        _, devG = metric_tensors(A)
        e3 = 0.25 * cs * cs * rho * (devG * devG).sum((-1, -2))
    if act2:
        e4 = 0.5 * ch * ch * rho * (J * J).sum(-1)
    eint = e1 + e3 + e4
    if np.any(~np.isfinite(eint)) or np.any(eint <= 0.0):
        raise InvalidStateError("relaxation needs finite positive energy")

    if act1:
        detA = np.linalg.det(A)
        if np.any(detA <= _DET_FLOOR):
            raise InvalidStateError("degenerate distortion field (det A <= 0)")
        ghat, Q = np.linalg.eigh(np.swapaxes(A, -1, -2) @ A)
        flatA = A.reshape(-1, 3, 3)
        flatg = ghat.reshape(-1, 3)
        flatQ = Q.reshape(-1, 3, 3)
        flatd = detA.reshape(-1)
        flatr = np.broadcast_to(rho, detA.shape).reshape(-1)
        out = np.empty_like(flatA)
        for i in range(flatA.shape[0]):
            c = dt * 3.0 * flatr[i] * flatd[i] ** (5.0 / 3.0) \
                / (params.rho0 * params.tau1)
            # iterate c to consistency with det(A') = det(A) / det(M)
            detm_old = 1.0
            for _ in range(50):
                mfac = _relax_eigendecomp(flatg[i], c)
                detm = mfac[0] * mfac[1] * mfac[2]
                if detm <= 0.0 or not np.isfinite(detm):
                    raise InvalidStateError("implicit relaxation solve failed")
                c = dt * 3.0 * flatr[i] * (flatd[i] / detm) ** (5.0 / 3.0) \
                    / (params.rho0 * params.tau1)
                if abs(detm - detm_old) <= 1e-14 * detm:
                    break
                detm_old = detm
            Minv = flatQ[i] @ (flatQ[i] / mfac).T
            out[i] = flatA[i] @ Minv
        A = out.reshape(A.shape)
        _, devG = metric_tensors(A)
        e3 = 0.25 * cs * cs * rho * (devG * devG).sum((-1, -2))

    if act2:
        # e4' (1 + b (estar - e4'))^2 = e4hat with b collecting the heat
        # relaxation coefficient and estar the energy left for e1 + e4
        estar = eint - e3
        b = dt / (cv * params.rho0 * params.T0 * params.tau2)
        x = e4.copy()
        for _ in range(60):
            mfac = 1.0 + b * (estar - x)
            f = x * mfac**2 - e4
            df = mfac**2 - 2.0 * x * mfac * b
            xn = x - f / np.where(df == 0.0, 1.0, df)
            x = np.clip(xn, 0.0, np.maximum(e4, 0.0))
            if np.max(np.abs(f)) <= 1e-15 * max(np.max(e4), 1e-300):
                break
        mfac = 1.0 + b * (estar - x)
        if np.any(mfac <= 0.0):
            raise InvalidStateError("implicit relaxation solve failed")
        J = J / mfac[..., None]
        e4 = 0.5 * ch * ch * rho * (J * J).sum(-1)

    e1f = eint - e3 - e4
    if np.any(e1f <= 0.0):
        raise InvalidStateError("implicit relaxation solve failed")
    Sf = cv * (np.log((g - 1.0) * e1f) - g * np.log(rho))
    return pack(rho, mom, rho * Sf, A, J)


def euler_flux(q: np.ndarray, n: np.ndarray, params: ModelParams) -> np.ndarray:
    """Physical flux of the gasdynamic subsystem through unit normal n.

    Only the rho, momentum and rho*S slots are nonzero:
    f = (rho u, rho v u + p n, rho S u, 0, 0) with u = v.n.
    """
    rho, mom, rhoS, _, _ = unpack(q)
    _check_positive_rho(rho)
    n = np.asarray(n, dtype=float)
    p = pressure(q, params)
    u = (mom * n).sum(-1) / rho
    f = np.zeros(np.asarray(q).shape)
    f[..., I_RHO] = rho * u
    f[..., I_MOM] = mom * u[..., None] + p[..., None] * n
    f[..., I_RHOS] = rhoS * u
    return f


# ---------------------------------------------------------------------------
# restricted gasdynamic duals and their closed-form inversion
# ---------------------------------------------------------------------------

def euler_restricted_duals(q: np.ndarray, params: ModelParams) -> np.ndarray:
    """(r_E, v[3], T) with r_E = d(E1+E2)/drho, i.e. the dual of the
    gasdynamic subsystem alone (no elastic/thermal-impulse contribution)."""
    rho, mom, rhoS, _, _ = unpack(q)
    _check_positive_rho(rho)
    g, cv = params.gamma, params.cv
    S = rhoS / rho
    v = mom / rho[..., None]
    e1 = rho**g * np.exp(S / cv) / (g - 1.0)
    T = e1 / (rho * cv)
    rE = (e1 / rho) * (g - S / cv) - 0.5 * (v * v).sum(-1)
    out = np.empty(rho.shape + (5,))
    out[..., 0] = rE
    out[..., 1:4] = v
    out[..., 4] = T
    return out


def euler_state_from_duals(pe: np.ndarray, params: ModelParams) -> np.ndarray:
    """Invert (r_E, v, T) -> (rho, rho v, rho S).

    Closed form: S = gamma cv - (r_E + |v|^2/2)/T and
    rho = ((gamma-1) cv T exp(-S/cv))^(1/(gamma-1)).
    """
    pe = np.asarray(pe, dtype=float)
    g, cv = params.gamma, params.cv
    rE = pe[..., 0]
    v = pe[..., 1:4]
    T = pe[..., 4]
    if np.any(T <= 0.0) or not np.all(np.isfinite(pe)):
        raise InvalidStateError("dual inversion requires finite duals and T > 0")
    S = g * cv - (rE + 0.5 * (v * v).sum(-1)) / T
    rho = ((g - 1.0) * cv * T * np.exp(-S / cv)) ** (1.0 / (g - 1.0))
    if np.any(rho <= 0.0) or not np.all(np.isfinite(rho)):
        raise InvalidStateError("dual inversion produced a non-positive or "
                                "non-finite density")
    out = np.empty(pe.shape)
    out[..., 0] = rho
    out[..., 1:4] = rho[..., None] * v
    out[..., 4] = rho * S
    return out


def euler_flux_from_duals(pe: np.ndarray, n: np.ndarray, params: ModelParams) -> np.ndarray:
    """Gasdynamic flux (5 components) evaluated at the state q(pe)."""
    qe = euler_state_from_duals(pe, params)
    rho = qe[..., 0]
    mom = qe[..., 1:4]
    rhoS = qe[..., 4]
    S = rhoS / rho
    g, cv = params.gamma, params.cv
    p = rho**g * np.exp(S / cv)  # (gamma-1)*E1
    n = np.asarray(n, dtype=float)
    u = (mom * n).sum(-1) / rho
    f = np.empty(pe.shape)
    f[..., 0] = rho * u
    f[..., 1:4] = mom * u[..., None] + p[..., None] * n
    f[..., 4] = rhoS * u
    return f


# ---------------------------------------------------------------------------
# second derivatives of the energy
# ---------------------------------------------------------------------------

def euler_hessian_block(q: np.ndarray, params: ModelParams) -> np.ndarray:
    """Analytic 5x5 Hessian of E1+E2 w.r.t. (rho, rho v, rho S), batched."""
    rho, mom, rhoS, _, _ = unpack(q)
    _check_positive_rho(rho)
    g, cv = params.gamma, params.cv
    S = rhoS / rho
    v = mom / rho[..., None]
    e1 = rho**g * np.exp(S / cv) / (g - 1.0)
    T = e1 / (rho * cv)
    u = g - S / cv

    H = np.zeros(rho.shape + (5, 5))
    H[..., 0, 0] = (e1 / rho**2) * (u * u - u + S / cv) \
        + (v * v).sum(-1) / rho
    H[..., 0, 1:4] = -v / rho[..., None]
    H[..., 1:4, 0] = -v / rho[..., None]
    idx = np.arange(3)
    H[..., 1 + idx, 1 + idx] = (1.0 / rho)[..., None]
    H[..., 0, 4] = (T / rho) * (u - 1.0)
    H[..., 4, 0] = H[..., 0, 4]
    H[..., 4, 4] = T / (rho * cv)
    return H


def hessian_quadform(q: np.ndarray, dq: np.ndarray, params: ModelParams) -> np.ndarray:
    """Analytic quadratic form dq . (d^2 E/dq dq) . dq, batched.

    Evaluated as dq . dp(q; dq) where dp is the exact directional
    derivative of the dual vector; this avoids forming 17x17 matrices in
    the face loops.
    """
    rho, mom, rhoS, A, J = unpack(q)
    drho, dmom, drhoS, dA, dJ = unpack(np.asarray(dq, dtype=float))
    _check_positive_rho(rho)
    g, cv, cs, ch = params.gamma, params.cv, params.cs, params.ch

    S = rhoS / rho
    v = mom / rho[..., None]
    e1 = rho**g * np.exp(S / cv) / (g - 1.0)
    T = e1 / (rho * cv)
    u = g - S / cv

    dv = (dmom - v * drho[..., None]) / rho[..., None]
    dT = (T / rho) * (u - 1.0) * drho + T / (rho * cv) * drhoS

    h_rr = (e1 / rho**2) * (u * u - u + S / cv)
    dr = (
        (h_rr + (v * v).sum(-1) / rho) * drho
        - (v * dmom).sum(-1) / rho
        + (T / rho) * (u - 1.0) * drhoS
    )
    out = drho * dr + (dmom * dv).sum(-1) + drhoS * dT

    if cs > 0.0:
        _, devG = metric_tensors(A)
        dG = np.swapaxes(dA, -1, -2) @ A + np.swapaxes(A, -1, -2) @ dA
        ddevG = dG.copy()
        trd = (dG[..., 0, 0] + dG[..., 1, 1] + dG[..., 2, 2]) / 3.0
        ddevG[..., 0, 0] -= trd
        ddevG[..., 1, 1] -= trd
        ddevG[..., 2, 2] -= trd
        dalpha = cs**2 * (drho[..., None, None] * (A @ devG)
                          + rho[..., None, None] * (dA @ devG + A @ ddevG))
        dE3 = 0.5 * cs**2 * (devG * dG).sum((-1, -2))
        out += drho * dE3 + (dA * dalpha).sum((-1, -2))
    if ch > 0.0:
        dbeta = ch**2 * (drho[..., None] * J + rho[..., None] * dJ)
        dE4 = ch**2 * (J * dJ).sum(-1)
        out += drho * dE4 + (dJ * dbeta).sum(-1)
    return out


def hessian(q: np.ndarray, params: ModelParams) -> np.ndarray:
    """Full 17x17 symmetric Hessian of the total energy at one state.

    The gasdynamic block is analytic; every row/column touching the
    distortion or thermal-impulse slots comes from symmetrized central
    finite differences of the dual vector, which keeps those blocks
    directly auditable against `dual_variables`.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (NCOMP,):
        raise ValueError("hessian expects a single packed state")
    validate(q, params)
    H = np.zeros((NCOMP, NCOMP))
    H[:5, :5] = euler_hessian_block(q, params)
    for j in range(5, NCOMP):
        h = _EPS_FD * max(1.0, abs(q[j]))
        qp = q.copy()
        qm = q.copy()
        qp[j] += h
        qm[j] -= h
        col = (dual_variables(qp, params) - dual_variables(qm, params)) / (2.0 * h)
        H[:, j] = col
        H[j, :] = col
    return 0.5 * (H + H.T)


# ---------------------------------------------------------------------------
# construction helpers and transport coefficients
# ---------------------------------------------------------------------------

def entropy_from_pressure(rho, p, params: ModelParams):
    """S = cv * ln(p * rho^-gamma) so that pressure(q) == p."""
    rho = np.asarray(rho, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(rho <= 0.0) or np.any(p <= 0.0):
        raise InvalidStateError("primitive density and pressure must be positive")
    return params.cv * np.log(p * rho ** (-params.gamma))


def state_from_primitives(rho, v, p, A=None, J=None, params: ModelParams = None) -> np.ndarray:
    """Build a packed state from (rho, v, p, A, J); A defaults to the
    identity, J to zero."""
    rho = np.asarray(rho, dtype=float)
    v = np.broadcast_to(np.asarray(v, dtype=float), rho.shape + (3,))
    S = entropy_from_pressure(rho, p, params)
    if A is None:
        A = np.broadcast_to(np.eye(3), rho.shape + (3, 3))
    else:
        A = np.broadcast_to(np.asarray(A, dtype=float), rho.shape + (3, 3))
    if J is None:
        J = np.zeros(rho.shape + (3,))
    else:
        J = np.broadcast_to(np.asarray(J, dtype=float), rho.shape + (3,))
    return pack(rho, rho[..., None] * v, rho * S, A, J)


def primitives(q: np.ndarray, params: ModelParams):
    """Return (rho, v, p, S) from a packed state."""
    rho, mom, rhoS, _, _ = unpack(q)
    v = mom / rho[..., None]
    return rho, v, pressure(q, params), rhoS / rho


def max_signal_speed(q: np.ndarray, n: np.ndarray, params: ModelParams) -> np.ndarray:
    """Conservative upper bound on the fastest wave through normal n.

    |v.n| + sqrt(gamma p / rho + 4/3 cs^2 + ch^2 max(1, T/cv)); used only
    for the time step and the magnitude of the numerical dissipation.
    """
    rho, mom, _, _, _ = unpack(q)
    _check_positive_rho(rho)
    n = np.asarray(n, dtype=float)
    u = (mom * n).sum(-1) / rho
    p = pressure(q, params)
    T = temperature(q, params)
    return np.abs(u) + np.sqrt(
        params.gamma * p / rho
        + (4.0 / 3.0) * params.cs**2
        + params.ch**2 * np.maximum(1.0, T / params.cv)
    )


def tau_from_transport(mu: float, kappa: float, params: ModelParams):
    """Relaxation times matching shear viscosity mu and heat conductivity
    kappa in the stiff limit: tau1 = 6 mu / (rho0 cs^2),
    tau2 = kappa / (rho0 T0 ch^2)."""
    if mu < 0.0 or kappa < 0.0:
        raise ValueError("transport coefficients must be nonnegative")
    if mu > 0.0 and params.cs == 0.0:
        raise ValueError("nonzero viscosity requires cs > 0")
    if kappa > 0.0 and params.ch == 0.0:
        raise ValueError("nonzero conductivity requires ch > 0")
    if mu == 0.0 and kappa == 0.0:
        raise ValueError("zero transport gives tau = 0; use a large tau for solids")
    tau1 = 6.0 * mu / (params.rho0 * params.cs**2) if mu > 0.0 else params.tau1
    tau2 = kappa / (params.rho0 * params.T0 * params.ch**2) if kappa > 0.0 else params.tau2
    return tau1, tau2
