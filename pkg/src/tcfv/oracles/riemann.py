"""Exact solution of the Riemann problem for the compressible Euler
equations.

Classic two-nonlinear-wave solver: the star-region pressure is found by
Newton iteration on the pressure function, then the self-similar solution
is sampled in the variable xi = x / t, including the interior of sonic
rarefactions.
"""

from dataclasses import dataclass

import numpy as np


def _pressure_function(p, rho_k, p_k, gamma):
    """Value and derivative of the one-sided pressure function f_K(p)."""
    c_k = np.sqrt(gamma * p_k / rho_k)
    if p > p_k:  # shock branch
        a_k = 2.0 / ((gamma + 1.0) * rho_k)
        b_k = (gamma - 1.0) / (gamma + 1.0) * p_k
        root = np.sqrt(a_k / (p + b_k))
        f = (p - p_k) * root
        df = root * (1.0 - 0.5 * (p - p_k) / (p + b_k))
    else:  # rarefaction branch
        ratio = p / p_k
        f = 2.0 * c_k / (gamma - 1.0) * (ratio ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)
        df = ratio ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho_k * c_k)
    return f, df


@dataclass(frozen=True)
class RiemannSolution:
    """Self-similar exact solution, sampled via :meth:`sample`."""

    gamma: float
    rho_l: float
    u_l: float
    p_l: float
    rho_r: float
    u_r: float
    p_r: float
    p_star: float
    u_star: float
    iterations: int

    @property
    def left_wave(self) -> str:
        return "shock" if self.p_star > self.p_l else "rarefaction"

    @property
    def right_wave(self) -> str:
        return "shock" if self.p_star > self.p_r else "rarefaction"

    def sample(self, xi):
        """Evaluate (rho, u, p) at similarity coordinates xi = x / t."""
        xi = np.asarray(xi, dtype=float)
        g = self.gamma
        gm, gp = g - 1.0, g + 1.0
        rho = np.empty_like(xi)
        u = np.empty_like(xi)
        p = np.empty_like(xi)

        def fill(mask, r_, u_, p_):
            rho[mask], u[mask], p[mask] = r_, u_, p_

        for side in ("left", "right"):
            if side == "left":
                rho_k, u_k, p_k = self.rho_l, self.u_l, self.p_l
                sign = 1.0
                star_side = xi <= self.u_star
            else:
                rho_k, u_k, p_k = self.rho_r, self.u_r, self.p_r
                sign = -1.0
                star_side = xi > self.u_star
            c_k = np.sqrt(g * p_k / rho_k)
            pr = self.p_star / p_k
            if self.p_star > p_k:  # shock on this side
                rho_star = rho_k * (pr + gm / gp) / (gm / gp * pr + 1.0)
                s_shock = u_k - sign * c_k * np.sqrt(gp / (2.0 * g) * pr + gm / (2.0 * g))
                ahead = star_side & (sign * (xi - s_shock) <= 0.0)
                behind = star_side & (sign * (xi - s_shock) > 0.0)
                fill(ahead, rho_k, u_k, p_k)
                fill(behind, rho_star, self.u_star, self.p_star)
            else:  # rarefaction on this side
                rho_star = rho_k * pr ** (1.0 / g)
                c_star = c_k * pr ** (gm / (2.0 * g))
                head = u_k - sign * c_k
                tail = self.u_star - sign * c_star
                ahead = star_side & (sign * (xi - head) <= 0.0)
                inside = star_side & (sign * (xi - head) > 0.0) & (sign * (xi - tail) < 0.0)
                behind = star_side & (sign * (xi - tail) >= 0.0)
                fill(ahead, rho_k, u_k, p_k)
                fill(behind, rho_star, self.u_star, self.p_star)
                if np.any(inside):
                    fac = 2.0 / gp + sign * gm / (gp * c_k) * (u_k - xi[inside])
                    fill(
                        inside,
                        rho_k * fac ** (2.0 / gm),
                        2.0 / gp * (sign * c_k + gm / 2.0 * u_k + xi[inside]),
                        p_k * fac ** (2.0 * g / gm),
                    )
        return rho, u, p


def exact_riemann_euler(left, right, gamma: float = 1.4,
                        tol: float = 1e-12, max_iters: int = 100) -> RiemannSolution:
    """Solve the Riemann problem for (rho, u, p) left/right states.

    The star pressure is iterated to a relative update below ``tol``.

    Raises
    ------
    ValueError
        If the data would generate vacuum, or the iteration stalls.
    """
    rho_l, u_l, p_l = (float(v) for v in left)
    rho_r, u_r, p_r = (float(v) for v in right)
    if min(rho_l, rho_r, p_l, p_r) <= 0.0:
        raise ValueError("non-physical input state (rho, p must be positive)")
    g = gamma
    c_l = np.sqrt(g * p_l / rho_l)
    c_r = np.sqrt(g * p_r / rho_r)
    if 2.0 * (c_l + c_r) / (g - 1.0) <= u_r - u_l:
        raise ValueError("initial states generate vacuum")

    # two-rarefaction initial guess, floored away from zero
    z = (g - 1.0) / (2.0 * g)
    p = ((c_l + c_r - 0.5 * (g - 1.0) * (u_r - u_l))
         / (c_l / p_l ** z + c_r / p_r ** z)) ** (1.0 / z)
    p = max(p, 1e-12 * min(p_l, p_r))

    for it in range(1, max_iters + 1):
        f_l, df_l = _pressure_function(p, rho_l, p_l, g)
        f_r, df_r = _pressure_function(p, rho_r, p_r, g)
        dp = (f_l + f_r + (u_r - u_l)) / (df_l + df_r)
        p_new = p - dp
        if p_new <= 0.0:
            p_new = 0.5 * p
        if abs(p_new - p) <= tol * p_new:
            p = p_new
            break
        p = p_new
    else:
        raise ValueError(f"star-pressure iteration did not converge in {max_iters} steps")

    f_l, _ = _pressure_function(p, rho_l, p_l, g)
    f_r, _ = _pressure_function(p, rho_r, p_r, g)
    u_star = 0.5 * (u_l + u_r) + 0.5 * (f_r - f_l)
    return RiemannSolution(g, rho_l, u_l, p_l, rho_r, u_r, p_r, p, u_star, it)
