"""Closed-form and ODE-based reference profiles for viscous flows."""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import erf


def stokes_first_problem(y, t: float, mu: float, rho0: float = 1.0,
                         v0: float = 0.1):
    """Tangential velocity of an impulsively sheared viscous half-space.

    The initial jump is -v0 for y < 0 and +v0 for y > 0; diffusion with
    kinematic viscosity nu = mu / rho0 smooths it into
    v(y, t) = v0 erf(y / (2 sqrt(nu t))).
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    nu = mu / rho0
    return v0 * erf(np.asarray(y, dtype=float) / (2.0 * np.sqrt(nu * t)))


def shock_jump(Ms: float, gamma: float = 1.4):
    """Rankine-Hugoniot density, velocity and pressure ratios across a
    stationary normal shock at upstream Mach number Ms."""
    if Ms <= 1.0:
        raise ValueError("Ms must exceed 1")
    rho_ratio = (gamma + 1.0) * Ms**2 / ((gamma - 1.0) * Ms**2 + 2.0)
    p_ratio = 1.0 + 2.0 * gamma / (gamma + 1.0) * (Ms**2 - 1.0)
    return rho_ratio, 1.0 / rho_ratio, p_ratio


def becker_shock_profile(Ms: float, Pr: float, Re_s: float, gamma: float,
                         x, cv: float = 2.5, rtol: float = 1e-12):
    """Stationary viscous shock profile of the Navier-Stokes equations.

    Normalization: upstream density and sound speed are 1, upstream
    pressure is 1/gamma, and the flow enters from x < 0 with speed Ms.
    At Prandtl number 3/4 the total enthalpy H = cp T + u^2/2 is uniform,
    which reduces the momentum balance to a single autonomous equation

        (4/3) mu du/dx = m u + p(u) - P,

    integrated here between the Rankine-Hugoniot end states with the
    profile centered so that u(0) = (u1 + u2) / 2.

    Returns
    -------
    rho, u, T : ndarray
        Density, velocity and temperature sampled at ``x``.
    """
    if abs(Pr - 0.75) > 1e-12:
        raise ValueError("closed-form profile requires Pr = 3/4")
    if Ms <= 1.0:
        raise ValueError("Ms must exceed 1")
    x = np.asarray(x, dtype=float)
    mu = Ms / Re_s  # Re_s = rho1 c1 Ms L / mu with rho1 = c1 = L = 1
    cp = gamma * cv

    rho1, u1, p1 = 1.0, Ms, 1.0 / gamma
    T1 = p1 / ((gamma - 1.0) * cv * rho1)
    rr, ur, _ = shock_jump(Ms, gamma)
    u2 = u1 * ur

    m = rho1 * u1
    P = m * u1 + p1
    H = cp * T1 + 0.5 * u1**2

    def dudx(_, u):
        p = (gamma - 1.0) / gamma * (m / u) * (H - 0.5 * u**2)
        return 3.0 * (m * u + p - P) / (4.0 * mu)

    u_mid = 0.5 * (u1 + u2)
    u_of_x = np.full(x.shape, u_mid)
    for lo, hi, limit in ((0.0, float(np.max(x, initial=0.0)), u2),
                          (0.0, float(np.min(x, initial=0.0)), u1)):
        if hi == lo:
            continue
        sel = (x > lo) if hi > 0 else (x < lo)
        sol = solve_ivp(dudx, (lo, hi), [u_mid], dense_output=True,
                        rtol=rtol, atol=1e-14, max_step=abs(hi - lo) / 50.0)
        if not sol.success:
            raise RuntimeError(f"profile integration failed: {sol.message}")
        vals = sol.sol(x[sel])[0]
        u_of_x[sel] = np.clip(vals, min(u1, u2), max(u1, u2)) if hi > 0 else vals
    u_of_x = np.clip(u_of_x, u2, u1)

    rho = m / u_of_x
    T = (H - 0.5 * u_of_x**2) / cp
    return rho, u_of_x, T
