"""Initial conditions and parameter sets for the benchmark cases."""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .. import model as m
from ..grid import PERIODIC, TRANSMISSIVE, BoundaryCondition, Grid
from .profiles import becker_shock_profile


@dataclass(frozen=True)
class CaseSetup:
    """A ready-to-run case: grid, parameters, initial state and end time."""

    name: str
    grid: Grid
    params: m.ModelParams
    q0: np.ndarray
    t_end: float
    extras: dict = field(default_factory=dict)


def isentropic_vortex_init(x, y, params: m.ModelParams) -> np.ndarray:
    """Stationary isentropic vortex of strength 5 centered at (5, 5).

    Temperature and velocity perturbations decay as a Gaussian in the
    distance from the center; the entropy is uniform, so rho = (p/rho)
    raised to 1/(gamma-1) and p = rho * (p/rho).
    """
    eps_v = 5.0
    g = params.gamma
    dx, dy = np.asarray(x) - 5.0, np.asarray(y) - 5.0
    r2 = dx**2 + dy**2
    dT = -(g - 1.0) * eps_v**2 * np.exp(1.0 - r2) / (8.0 * g * np.pi**2)
    T = 1.0 + dT
    fac = eps_v / (2.0 * np.pi) * np.exp(0.5 * (1.0 - r2))
    v = np.zeros(T.shape + (3,))
    v[..., 0] = -fac * dy
    v[..., 1] = fac * dx
    rho = T ** (1.0 / (g - 1.0))
    return m.state_from_primitives(rho, v, rho * T, params=params)


def smoothed_riemann_init(q_left: np.ndarray, q_right: np.ndarray,
                          chi: float = 0.01):
    """erf blend of two conserved states over a transition width chi."""
    if chi <= 0.0:
        raise ValueError("chi must be positive")
    q_left = np.asarray(q_left, dtype=float)
    q_right = np.asarray(q_right, dtype=float)

    def init(x):
        w = 0.5 * (1.0 + erf(np.asarray(x, dtype=float) / chi))
        return q_left + w[..., None] * (q_right - q_left)

    return init


# left/right (rho, u, v, p), end time, jump position, and model parameters
_RP_TABLE = {
    "rp1": ((1.0, 0.0, 0.0, 1.0), (0.125, 0.0, 0.0, 0.1), 0.2, 0.0, {}),
    "rp1s": ((1.0, 0.75, 0.0, 1.0), (0.125, 0.0, 0.0, 0.1), 0.2, -0.2, {}),
    "rp2": ((5.99924, 19.5975, 0.0, 460.894),
            (5.99242, -6.19633, 0.0, 46.095), 0.035, -0.2, {}),
    "rp3": ((1.0, 0.0, -0.2, 1.0), (0.5, 0.0, 0.2, 0.5), 0.2, 0.0,
            {"cs": 1.0, "ch": 1.0, "tau1": 2e-5, "tau2": 2e-5}),
    "rp4": ((1.0, 0.0, -0.2, 1.0), (0.5, 0.0, 0.2, 0.5), 0.2, 0.0,
            {"cs": 1.0, "ch": 1.0, "tau1": 1e20, "tau2": 1e20}),
}


def riemann_setup(name: str, n: int = 1024, chi: float = 0.0) -> CaseSetup:
    """Left/right-state cases on [-0.5, 0.5] with transmissive boundaries.

    ``chi > 0`` replaces the sharp jump with an erf blend of that width.
    """
    key = name.lower()
    if key not in _RP_TABLE:
        raise ValueError(f"unknown Riemann case {name!r}")
    left, right, t_end, xc, extra = _RP_TABLE[key]
    params = m.ModelParams(gamma=1.4, cv=1.0, eps_mode="limited", **extra)

    def make_state(rho, u, v, p):
        A = rho ** (1.0 / 3.0) * np.eye(3) if params.cs > 0.0 else None
        return m.state_from_primitives(rho, [u, v, 0.0], p, A=A, params=params)

    qL, qR = make_state(*left), make_state(*right)
    if params.cs > 0.0:
        # reference temperature: background (left-state) temperature
        params = params.with_(T0=float(m.temperature(qL, params)))
    grid = Grid((n,), (-0.5,), (0.5,), bc=((TRANSMISSIVE, TRANSMISSIVE),))
    x = grid.centers()[0]
    if chi > 0.0:
        q0 = smoothed_riemann_init(qL, qR, chi)(x - xc)
    else:
        q0 = np.where((x < xc)[:, None], qL, qR)
    return CaseSetup(key, grid, params, q0, t_end,
                     extras={"xc": xc, "left": left, "right": right})


def _shear_setup(n: int, mu) -> CaseSetup:
    params = m.ModelParams(gamma=1.4, cv=1.0, rho0=1.0, T0=2.5, cs=1.0,
                           ch=0.0, tau2=1e20, eps_mode="limited")
    if mu is None:  # solid limit: no relaxation, limited viscosity
        params = params.with_(tau1=1e20)
    else:  # fluid: physical dissipation only, no numerical viscosity
        tau1, _ = m.tau_from_transport(mu, 0.0, params.with_(tau1=1.0,
                                                             tau2=1.0))
        params = params.with_(tau1=tau1, eps_mode="constant", eps=0.0)
    v0 = 0.1
    qL = m.state_from_primitives(1.0, [0.0, -v0, 0.0], 1.0, params=params)
    qR = m.state_from_primitives(1.0, [0.0, v0, 0.0], 1.0, params=params)
    bc = ((BoundaryCondition("dirichlet", state=qL),
           BoundaryCondition("dirichlet", state=qR)),)
    grid = Grid((n,), (-0.5,), (0.5,), bc=bc)
    x = grid.centers()[0]
    q0 = np.where((x < 0.0)[:, None], qL, qR)
    return CaseSetup("shear", grid, params, q0, 0.4,
                     extras={"mu": mu, "v0": v0})


def _rotor_setup(n: int) -> CaseSetup:
    params = m.ModelParams(gamma=1.4, cv=1.0, rho0=1.0, T0=2.5, cs=1.0,
                           ch=1.0, tau1=1e20, tau2=1e20,
                           eps_mode="constant", eps=5e-4)
    grid = Grid((n, n), (-1.0, -1.0), (1.0, 1.0))
    x, y = grid.centers()
    R = 0.2
    r = np.sqrt(x**2 + y**2)
    inside = r <= R
    v = np.zeros(x.shape + (3,))
    v[..., 0] = np.where(inside, -y / R, 0.0)
    v[..., 1] = np.where(inside, x / R, 0.0)
    q0 = m.state_from_primitives(np.ones_like(x), v, np.ones_like(x),
                                 params=params)
    return CaseSetup("rotor", grid, params, q0, 0.3, extras={"R": R})


def _dsl_setup(n: int) -> CaseSetup:
    gamma, cv = 1.4, 1.0
    p0 = 100.0 / gamma
    T0 = p0 / ((gamma - 1.0) * cv)
    params = m.ModelParams(gamma=gamma, cv=cv, rho0=1.0, T0=T0, cs=8.0,
                           ch=2.0, tau1=6.0 * 2e-3 / 64.0, tau2=4e-3,
                           eps_mode="constant", eps=1e-6)
    grid = Grid((n, n), (0.0, 0.0), (1.0, 1.0))
    x, y = grid.centers()
    v = np.zeros(x.shape + (3,))
    v[..., 0] = np.where(y <= 0.5, np.tanh(30.0 * (y - 0.25)),
                         np.tanh(30.0 * (0.75 - y)))
    v[..., 1] = 0.05 * np.sin(2.0 * np.pi * x)
    q0 = m.state_from_primitives(np.ones_like(x), v, np.full_like(x, p0),
                                 params=params)
    return CaseSetup("dsl", grid, params, q0, 1.8)


def _cavity_setup(n: int) -> CaseSetup:
    gamma, cv = 1.4, 1.0
    p0 = 100.0
    T0 = p0 / ((gamma - 1.0) * cv)
    params = m.ModelParams(gamma=gamma, cv=cv, rho0=1.0, T0=T0, cs=8.0,
                           ch=2.0, tau1=6.0 * 1e-2 / 64.0, tau2=1e-2,
                           eps_mode="constant", eps=1e-3)
    wall = BoundaryCondition("wall")
    lid = BoundaryCondition("wall", wall_velocity=np.array([1.0, 0.0, 0.0]))
    grid = Grid((n, n), (0.0, 0.0), (1.0, 1.0),
                bc=((wall, wall), (wall, lid)))
    x, _ = grid.centers()
    q0 = m.state_from_primitives(np.ones_like(x), np.zeros(x.shape + (3,)),
                                 np.full_like(x, p0), params=params)
    return CaseSetup("cavity", grid, params, q0, 10.0)


def _vshock_setup(n: int) -> CaseSetup:
    gamma, cv, Ms, Re_s = 1.4, 2.5, 2.0, 100.0
    T0 = 1.0 / (gamma * (gamma - 1.0) * cv)  # upstream temperature
    params = m.ModelParams(gamma=gamma, cv=cv, rho0=1.0, T0=T0, cs=50.0,
                           ch=50.0, eps_mode="limited")
    tau1, tau2 = m.tau_from_transport(2e-2, 28.0 / 3.0 * 1e-2,
                                      params.with_(tau1=1.0, tau2=1.0))
    params = params.with_(tau1=tau1, tau2=tau2)

    grid = Grid((n,), (-0.5,), (0.5,), bc=((TRANSMISSIVE, TRANSMISSIVE),))
    x = grid.centers()[0]

    def profile_state(xs):
        # exact profile has flow in +x; the case has inflow from the right
        rho, u, T = becker_shock_profile(Ms, 0.75, Re_s, gamma, -np.asarray(xs),
                                         cv=cv)
        v = np.zeros(np.shape(rho) + (3,))
        v[..., 0] = -u
        p = (gamma - 1.0) * cv * rho * T
        A = (rho ** (1.0 / 3.0))[..., None, None] * np.eye(3)
        return m.state_from_primitives(rho, v, p, A=A, params=params)

    q0 = profile_state(x)
    qL = profile_state(np.array([grid.lower[0]]))[0]
    qR = profile_state(np.array([grid.upper[0]]))[0]
    bc = ((BoundaryCondition("dirichlet", state=qL),
           BoundaryCondition("dirichlet", state=qR)),)
    grid = Grid((n,), (-0.5,), (0.5,), bc=bc)
    return CaseSetup("vshock", grid, params, q0, 0.25,
                     extras={"Ms": Ms, "Re_s": Re_s,
                             "profile_state": profile_state})


_CANONICAL = {
    "shear": _shear_setup,
    "rotor": _rotor_setup,
    "dsl": _dsl_setup,
    "cavity": _cavity_setup,
    "vshock": _vshock_setup,
}

_DEFAULT_N = {"shear": 1024, "rotor": 128, "dsl": 256, "cavity": 128,
              "vshock": 1024}


def canonical_case_init(name: str, n: int = None, **kwargs) -> CaseSetup:
    """Build one of the named benchmark cases.

    Supported names: shear (keyword ``mu``: viscosity, or None for the
    solid limit), rotor, dsl, cavity, vshock.
    """
    key = name.lower()
    if key not in _CANONICAL:
        raise ValueError(f"unknown case {name!r}; expected one of "
                         f"{sorted(_CANONICAL)}")
    if n is None:
        n = _DEFAULT_N[key]
    if key == "shear":
        return _shear_setup(n, kwargs.pop("mu", 1e-2))
    if kwargs:
        raise TypeError(f"unexpected keyword arguments {sorted(kwargs)}")
    return _CANONICAL[key](n)
