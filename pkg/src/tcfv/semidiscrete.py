"""Semi-discrete entropy-based finite volume scheme.

The entropy balance is the discretized equation; total energy
conservation follows algebraically from the choice of face terms:

* gasdynamic slots: path-integrated compatible flux plus a scalar
  dissipative flux g = eps (qR - qL) / delta;
* momentum: central face shear stress sigma and thermal stress omega
  differences;
* entropy: central heat-flux difference, plus the entropy production Pi
  matching the dissipative flux exactly through the dual-variable jump
  (the straight-path integral of the Hessian quadratic form), plus the
  nonnegative relaxation production;
* distortion / thermal impulse: central nonconservative products with
  compatibility-derived advection speeds u_A, u_J.

All face quantities for one axis are computed in a single vectorized
sweep; each face is evaluated once and scattered to both adjacent cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from . import model as m
from .errors import InvalidStateError
from .grid import Grid, pad_axis
from .quadpath import UnitQuadrature

_ZERO_DEN = 1e-14  # relative threshold for the u_A / u_J denominators

_UNIT = (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]),
         np.array([0.0, 0.0, 1.0]))


@dataclass
class SweepDiagnostics:
    """Figures recorded during one RHS assembly."""

    max_signal: float = 0.0
    min_production: float = np.inf
    min_face_eps: float = np.inf
    max_face_eps: float = 0.0

    def merge(self, other: "SweepDiagnostics") -> None:
        self.max_signal = max(self.max_signal, other.max_signal)
        self.min_production = min(self.min_production, other.min_production)
        self.min_face_eps = min(self.min_face_eps, other.min_face_eps)
        self.max_face_eps = max(self.max_face_eps, other.max_face_eps)


def face_epsilon(E_pad: np.ndarray, smax: np.ndarray, h: float,
                 params: m.ModelParams) -> np.ndarray:
    """Scalar face viscosity from the total-energy slope limiter.

    ``E_pad`` holds cell total energies with two ghost layers along axis
    0 (length n+4 for n+1 faces); ``smax`` is the per-face signal bound.
    Constant policy ignores the stencil.
    """
    if params.eps_mode == "constant":
        return np.full(smax.shape, params.eps)
    dE = E_pad[2:-1] - E_pad[1:-2]
    num_m = E_pad[1:-2] - E_pad[:-3]
    num_p = E_pad[3:] - E_pad[2:-1]
    scale = np.abs(E_pad[1:-2]) + np.abs(E_pad[2:-1])
    flat = np.abs(dE) <= _ZERO_DEN * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        h_m = np.where(flat, 0.0, num_m / np.where(flat, 1.0, dE))
        h_p = np.where(flat, 0.0, num_p / np.where(flat, 1.0, dE))
    phi_m = np.clip(h_m, 0.0, 1.0)
    phi_p = np.clip(h_p, 0.0, 1.0)
    phi = np.minimum(phi_m, phi_p)
    # 0/0: locally flat energy, no dissipation needed; x/0: full upwind
    both_flat = flat & (np.abs(num_m) <= _ZERO_DEN * scale) \
        & (np.abs(num_p) <= _ZERO_DEN * scale)
    phi = np.where(flat, np.where(both_flat, 1.0, 0.0), phi)
    return 0.5 * (1.0 - phi) * h * smax


class _CellData:
    """Per-cell thermodynamic quantities for one padded sweep array.

    Everything downstream of the equation of state is evaluated once per
    padded cell and sliced for the left/right sides of each face, so the
    exp/power calls are not repeated per side.
    """

    __slots__ = ("rho", "mom", "rhoS", "A", "J", "v", "T", "E", "un",
                 "r", "pe", "fgas", "smax", "alpha", "beta", "sig", "bn",
                 "e3s", "e4s")

    def __init__(self, q: np.ndarray, axis3: int, params: m.ModelParams):
        g, cv, cs, ch = params.gamma, params.cv, params.cs, params.ch
        rho, mom, rhoS, A, J = m.unpack(q)
        m._check_positive_rho(rho)
        self.rho, self.mom, self.rhoS, self.A, self.J = rho, mom, rhoS, A, J
        S = rhoS / rho
        v = mom / rho[..., None]
        self.v = v
        e1 = rho**g * np.exp(S / cv) / (g - 1.0)
        T = e1 / (rho * cv)
        self.T = T
        p = (g - 1.0) * e1
        rE = (e1 / rho) * (g - S / cv) - 0.5 * (v * v).sum(-1)
        un = v[..., axis3]
        self.un = un

        # elastic and thermal-impulse blocks (specific energies, duals,
        # face-normal stress columns); zero work when the block is off
        if cs > 0.0:
            _, devG = m.metric_tensors(A)
            self.e3s = 0.25 * cs * cs * (devG * devG).sum((-1, -2))
            self.alpha = (rho * cs * cs)[..., None, None] * (A @ devG)
            self.sig = (A * self.alpha[..., axis3][..., None]).sum(-2)
        else:
            self.e3s = np.zeros_like(rho)
            self.alpha = None
            self.sig = None
        if ch > 0.0:
            self.e4s = 0.5 * ch * ch * (J * J).sum(-1)
            self.beta = (rho * ch * ch)[..., None] * J
            self.bn = self.beta[..., axis3]
        else:
            self.e4s = np.zeros_like(rho)
            self.beta = None
            self.bn = None

        self.E = e1 + 0.5 * (mom * v).sum(-1) + rho * (self.e3s + self.e4s)
        self.r = rE + self.e3s + self.e4s
        pe = np.empty(rho.shape + (5,))
        pe[..., 0] = rE
        pe[..., 1:4] = v
        pe[..., 4] = T
        self.pe = pe
        fgas = np.empty(rho.shape + (5,))
        fgas[..., 0] = rho * un
        fgas[..., 1:4] = mom * un[..., None]
        fgas[..., 1 + axis3] += p
        fgas[..., 4] = rhoS * un
        self.fgas = fgas
        self.smax = np.abs(un) + np.sqrt(
            g * p / rho + (4.0 / 3.0) * cs * cs
            + ch * ch * np.maximum(1.0, T / cv))

    def side(self, sl: slice) -> "_CellData":
        out = object.__new__(_CellData)
        for name in self.__slots__:
            val = getattr(self, name)
            object.__setattr__(out, name, None if val is None else val[sl])
        return out


def _axis_face_contrib(q_pad: np.ndarray, axis3: int, delta: float,
                       params: m.ModelParams, quad: UnitQuadrature):
    """All face contributions along one axis.

    ``q_pad`` has the sweep axis first with two ghost layers; faces sit
    between padded cells (f+1, f+2) for f = 0..n.  Returns (CL, CR,
    diagnostics): CL[f] is the additive contribution (times delta) to
    the cell left of face f, CR[f] to the cell on the right.

    Dispatches to the compiled sweep when available; the numpy body
    below is the reference implementation.
    """
    if _kernels.HAVE_NUMBA:
        return _axis_face_contrib_fast(q_pad, axis3, delta, params, quad)
    return _axis_face_contrib_numpy(q_pad, axis3, delta, params, quad)


def _axis_face_contrib_fast(q_pad: np.ndarray, axis3: int, delta: float,
                            params: m.ModelParams, quad: UnitQuadrature):
    """Compiled variant of `_axis_face_contrib_numpy`."""
    npad = q_pad.shape[0]
    rest = q_pad.shape[1:-1]
    lines = int(np.prod(rest)) if rest else 1
    nf = npad - 3
    q2 = np.ascontiguousarray(
        np.moveaxis(q_pad, 0, -2).reshape(lines, npad, m.NCOMP))
    CL = np.empty((lines, nf, m.NCOMP))
    CR = np.empty((lines, nf, m.NCOMP))
    smax_f = np.empty((lines, nf))
    eps_f = np.empty((lines, nf))
    pi_f = np.empty((lines, nf))
    err = _kernels.face_sweep_batch(
        q2, axis3, delta, params.gamma, params.cv, params.cs, params.ch,
        params.rho0, params.T0, params.eps, params.eps_mode == "limited",
        np.ascontiguousarray(quad.nodes, dtype=float),
        np.ascontiguousarray(quad.weights, dtype=float),
        CL, CR, smax_f, eps_f, pi_f)
    if err == _kernels.ERR_RHO:
        raise InvalidStateError("non-positive or non-finite density")
    if err != 0:
        raise InvalidStateError(
            "dual inversion requires finite duals and T > 0")
    CL = np.moveaxis(CL.reshape(rest + (nf, m.NCOMP)), -2, 0)
    CR = np.moveaxis(CR.reshape(rest + (nf, m.NCOMP)), -2, 0)
    diag = SweepDiagnostics(
        max_signal=float(np.max(smax_f)),
        min_production=float(np.min(pi_f)),
        min_face_eps=float(np.min(eps_f)),
        max_face_eps=float(np.max(eps_f)),
    )
    return CL, CR, diag


def _axis_face_contrib_numpy(q_pad: np.ndarray, axis3: int, delta: float,
                             params: m.ModelParams, quad: UnitQuadrature):
    """Reference numpy implementation of the face sweep."""
    n3 = _UNIT[axis3]
    qL = q_pad[1:-2]
    qR = q_pad[2:-1]
    dq = qR - qL

    cells = _CellData(q_pad, axis3, params)
    L = cells.side(slice(1, -2))
    R = cells.side(slice(2, -1))

    # compatible gasdynamic flux along the dual segment
    dpe = R.pe - L.pe
    fhat = np.zeros(dpe.shape)
    for s, w in zip(quad.nodes, quad.weights):
        fhat += w * m.euler_flux_from_duals(L.pe + s * dpe, n3, params)

    # face viscosity from the limiter and the signal bound
    smax = np.maximum(L.smax, R.smax)
    eps = face_epsilon(cells.E, smax, delta, params)
    g = eps[..., None] * dq / delta

    dv = R.v - L.v
    dA = R.A - L.A
    dJ = R.J - L.J

    # entropy production matching the dissipative flux: the straight-path
    # integral of dq . Hessian . dq is exactly dq . (p_R - p_L), so the
    # energy contributed by g and by T * Pi cancels to machine precision
    if np.any(eps > 0.0):
        quadform = (
            (R.rho - L.rho) * (R.r - L.r)
            + ((R.mom - L.mom) * dv).sum(-1)
            + (R.rhoS - L.rhoS) * (R.T - L.T)
        )
        if L.alpha is not None:
            quadform += (dA * (R.alpha - L.alpha)).sum((-1, -2))
        if L.beta is not None:
            quadform += (dJ * (R.beta - L.beta)).sum(-1)
        piL = 0.5 * eps * quadform / (L.T * delta)
        piR = 0.5 * eps * quadform / (R.T * delta)
    else:
        piL = piR = np.zeros(eps.shape)

    # compatibility-derived advection speed for A and J
    vbar_n = 0.5 * (L.un + R.un)

    # assemble contributions (scaled by delta; the caller divides)
    CL = np.zeros(qL.shape)
    CR = np.zeros(qR.shape)
    CL[..., :5] = -(fhat - L.fgas)
    CR[..., :5] = fhat - R.fgas
    CL += g
    CR -= g
    CL[..., m.I_RHOS] += piL
    CR[..., m.I_RHOS] += piR

    if L.alpha is not None:
        alphabar = 0.5 * (L.alpha + R.alpha)
        Abar33 = 0.5 * (L.A + R.A)
        sig_face = (Abar33 * alphabar[..., axis3][..., None]).sum(-2)
        CL[..., m.I_MOM] -= sig_face - L.sig
        CR[..., m.I_MOM] += sig_face - R.sig
        numA = fhat[..., 0] * (R.e3s - L.e3s)
        denA = (alphabar * dA).sum((-1, -2))
        okA = np.abs(denA) > _ZERO_DEN * (1.0 + np.abs(numA))
        uA = np.where(okA, numA / np.where(okA, denA, 1.0), vbar_n)
    else:
        uA = vbar_n
    if L.beta is not None:
        betabar_n = 0.5 * (L.bn + R.bn)
        Jbar = 0.5 * (L.J + R.J)
        omg_face = Jbar * betabar_n[..., None]
        CL[..., m.I_MOM] -= omg_face - L.J * L.bn[..., None]
        CR[..., m.I_MOM] += omg_face - R.J * R.bn[..., None]
        CL[..., m.I_RHOS] -= betabar_n - L.bn
        CR[..., m.I_RHOS] += betabar_n - R.bn
        numJ = fhat[..., 0] * (R.e4s - L.e4s)
        denJ = (0.5 * (L.beta + R.beta) * dJ).sum(-1)
        okJ = np.abs(denJ) > _ZERO_DEN * (1.0 + np.abs(numJ))
        uJ = np.where(okJ, numJ / np.where(okJ, denJ, 1.0), vbar_n)
    else:
        Jbar = 0.5 * (L.J + R.J)
        uJ = vbar_n

    # central nonconservative products: identical for both cells
    Abar = 0.5 * (L.A + R.A)
    Adv = (Abar * dv[..., None, :]).sum(-1)
    centA = np.zeros(qL.shape[:-1] + (3, 3))
    centA[..., :, axis3] = 0.5 * Adv
    centA += 0.5 * uA[..., None, None] * dA
    centJ = np.zeros(qL.shape[:-1] + (3,))
    centJ[..., axis3] = 0.5 * ((Jbar * dv).sum(-1) + (R.T - L.T))
    centJ += 0.5 * uJ[..., None] * dJ
    centA9 = centA.reshape(qL.shape[:-1] + (9,))
    CL[..., m.I_A] -= centA9
    CR[..., m.I_A] -= centA9
    CL[..., m.I_J] -= centJ
    CR[..., m.I_J] -= centJ

    diag = SweepDiagnostics(
        max_signal=float(np.max(smax)),
        min_production=float(np.min(np.minimum(piL, piR))),
        min_face_eps=float(np.min(eps)),
        max_face_eps=float(np.max(eps)),
    )
    return CL, CR, diag


def rhs(q: np.ndarray, grid: Grid, params: m.ModelParams,
        quad: UnitQuadrature | None = None, include_sources: bool = True):
    """Semi-discrete right-hand side dq/dt on the whole grid.

    Returns (dqdt, SweepDiagnostics).  Relaxation sources are added
    pointwise unless ``include_sources`` is False.
    """
    if quad is None:
        quad = UnitQuadrature()
    out = np.zeros(q.shape)
    diag = SweepDiagnostics()
    for axis in range(grid.dim):
        delta = grid.spacing[axis]
        q_pad = pad_axis(q, grid, axis)
        q_pad = np.moveaxis(q_pad, axis, 0)
        CL, CR, d = _axis_face_contrib(q_pad, axis, delta, params, quad)
        contrib = (CL[1:] + CR[:-1]) / delta
        out += np.moveaxis(contrib, 0, axis)
        diag.merge(d)
    if include_sources:
        out += m.relaxation_sources(q, params)
    return out, diag


def max_stable_dt(q: np.ndarray, grid: Grid, params: m.ModelParams) -> float:
    """CFL time step: cfl * min(spacing) / max signal speed.

    The relaxation sources impose no additional restriction because the
    stepper integrates them in a split substage that follows the local
    contraction rates on its own."""
    smax = 0.0
    for axis in range(grid.dim):
        smax = max(smax, float(np.max(
            m.max_signal_speed(q, _UNIT[axis], params))))
    return params.cfl * min(grid.spacing) / smax


def _validated(q: np.ndarray, grid: Grid, params: m.ModelParams, stage: str):
    rho = q[..., m.I_RHO]
    bad = ~(np.isfinite(rho) & (rho > 0.0))
    if np.any(bad):
        where = tuple(int(i) for i in np.argwhere(bad)[0])
        raise InvalidStateError(
            f"invalid density in {stage} at cell index {where}")
    return q


def time_step(q: np.ndarray, grid: Grid, params: m.ModelParams, dt: float,
              method: str = "rk3", quad: UnitQuadrature | None = None,
              include_sources: bool = True):
    """Advance one explicit step with TVD-RK3 (Shu-Osher) or classical RK4.

    Each forward-Euler building block of the TVD-RK3 scheme is followed
    by the implicit cellwise relaxation solve, so every flux evaluation
    sees a state whose distortion and thermal impulse sit at their
    quasi-equilibrium deviation.  That keeps the step stable and the
    effective transport coefficients correct for arbitrarily stiff
    relaxation times, where treating the sources like a flux term or
    splitting them around the whole step both fail.
    Returns (q_new, SweepDiagnostics of the first stage).
    """
    def f(state, stage):
        _validated(state, grid, params, stage)
        return rhs(state, grid, params, quad, False)

    def euler(state, k):
        out = state + dt * k
        if include_sources:
            out = m.relaxation_update(out, dt, params)
        return out

    if method == "rk3":
        k1, diag = f(q, "stage 1")
        q1 = euler(q, k1)
        k2, _ = f(q1, "stage 2")
        q2 = 0.75 * q + 0.25 * euler(q1, k2)
        k3, _ = f(q2, "stage 3")
        qn = q / 3.0 + 2.0 / 3.0 * euler(q2, k3)
    elif method == "rk4":
        k1, diag = f(q, "stage 1")
        k2, _ = f(q + 0.5 * dt * k1, "stage 2")
        k3, _ = f(q + 0.5 * dt * k2, "stage 3")
        k4, _ = f(q + dt * k3, "stage 4")
        qn = q + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if include_sources:
            qn = m.relaxation_update(qn, dt, params)
    else:
        raise ValueError(f"unknown time integrator {method!r}")
    _validated(qn, grid, params, "step result")
    return qn, diag


def total_energy_sum(q: np.ndarray, grid: Grid, params: m.ModelParams) -> float:
    """Sum of cell total energies times the cell volume."""
    return grid.cell_volume * float(np.sum(m.total_energy(q, params)))


def energy_rate(q: np.ndarray, dqdt: np.ndarray, grid: Grid,
                params: m.ModelParams) -> float:
    """Instantaneous rate of change of total energy implied by the RHS,
    sum of |cell| p . dq/dt; zero on periodic grids up to quadrature
    error in the flux condition."""
    p = m.dual_variables(q, params)
    return grid.cell_volume * float(np.sum(
        np.einsum("...i,...i->...", p, dqdt)))
