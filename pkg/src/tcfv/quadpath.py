"""Path integrals along straight segments in state or dual space.

Two constructions share the same Gauss-Legendre machinery:

* the compatible interface flux, obtained by integrating the gasdynamic
  flux over a straight segment connecting the restricted dual vectors of
  the two adjacent cells -- this is what makes the discrete entropy flux
  and the discrete energy flux consistent with each other;
* the path-averaged (Roe-type) energy Hessian over a segment in state
  space, which satisfies H_avg (qR - qL) = pR - pL exactly in the limit
  of exact quadrature and is used inside the entropy-production terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import model as m
from .errors import PathInversionError

DEFAULT_NGP = 3


def gauss_legendre_unit(n: int):
    """Gauss-Legendre nodes and weights rescaled to the interval [0, 1]."""
    if n < 1:
        raise ValueError("quadrature order must be at least 1")
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class UnitQuadrature:
    """Gauss-Legendre rule on [0, 1] with cached nodes and weights."""

    n: int = DEFAULT_NGP
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nodes, weights = gauss_legendre_unit(self.n)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)


def compatible_euler_flux(qL: np.ndarray, qR: np.ndarray, n, params: m.ModelParams,
                          quad: UnitQuadrature | None = None) -> np.ndarray:
    """Interface flux of the gasdynamic subsystem, integrated over the
    straight segment between the restricted duals of qL and qR.

    Returns the 5 gasdynamic flux components (rho, momentum, rho S slots);
    broadcasting over leading axes.  The segment must stay inside the
    admissible region (positive temperature), otherwise a
    PathInversionError is raised.
    """
    if quad is None:
        quad = UnitQuadrature()
    peL = m.euler_restricted_duals(qL, params)
    peR = m.euler_restricted_duals(qR, params)
    dpe = peR - peL
    out = np.zeros(peL.shape)
    n = np.asarray(n, dtype=float)
    try:
        for s, w in zip(quad.nodes, quad.weights):
            out += w * m.euler_flux_from_duals(peL + s * dpe, n, params)
    except m.InvalidStateError as exc:
        raise PathInversionError(
            f"dual segment leaves the admissible region: {exc}") from exc
    return out


def compatible_energy_flux(qL, qR, fhat, n, params: m.ModelParams):
    """Total-energy flux implied by the compatible flux at a face.

    F = p_avg . fhat - (v.n)_avg L_avg is not needed in this averaged
    form; compatibility fixes F from either side as
    F_K = p_K . fhat - (v_K . n) L_K evaluated with the gasdynamic part
    of the duals and potential.  Returns the pair (F_L, F_R) so callers
    can audit that the scheme conserves total energy.
    """
    n = np.asarray(n, dtype=float)
    out = []
    for q in (qL, qR):
        pe = m.euler_restricted_duals(q, params)
        rho, mom, rhoS, _, _ = m.unpack(q)
        S = rhoS / rho
        prs = rho ** params.gamma * np.exp(S / params.cv)
        u = np.einsum("...i,...i->...", mom, np.broadcast_to(n, mom.shape)) / rho
        out.append(np.einsum("...i,...i->...", pe, fhat) - u * prs)
    return out[0], out[1]


def roe_hessian(qL: np.ndarray, qR: np.ndarray, params: m.ModelParams,
                quad: UnitQuadrature | None = None) -> np.ndarray:
    """Path average of the full 17x17 energy Hessian along the straight
    state-space segment from qL to qR (single pair of states).

    Satisfies H (qR - qL) ~= p(qR) - p(qL) up to quadrature error.
    """
    if quad is None:
        quad = UnitQuadrature()
    qL = np.asarray(qL, dtype=float)
    qR = np.asarray(qR, dtype=float)
    dq = qR - qL
    H = np.zeros((m.NCOMP, m.NCOMP))
    for s, w in zip(quad.nodes, quad.weights):
        H += w * m.hessian(qL + s * dq, params)
    return H


def roe_quadform(qL: np.ndarray, qR: np.ndarray, dq: np.ndarray,
                 params: m.ModelParams,
                 quad: UnitQuadrature | None = None) -> np.ndarray:
    """dq . H_avg . dq with H_avg the path-averaged Hessian, evaluated
    without forming matrices (batched over leading axes)."""
    if quad is None:
        quad = UnitQuadrature()
    qL = np.asarray(qL, dtype=float)
    qR = np.asarray(qR, dtype=float)
    seg = qR - qL
    out = 0.0
    for s, w in zip(quad.nodes, quad.weights):
        out = out + w * m.hessian_quadform(qL + s * seg, dq, params)
    return out


def time_averaged_dual(qn: np.ndarray, qn1: np.ndarray, params: m.ModelParams,
                       quad: UnitQuadrature | None = None) -> np.ndarray:
    """Path average of the full dual vector between two time levels,
    p_tilde = int_0^1 p(qn + s (qn1 - qn)) ds (batched)."""
    if quad is None:
        quad = UnitQuadrature()
    qn = np.asarray(qn, dtype=float)
    qn1 = np.asarray(qn1, dtype=float)
    dq = qn1 - qn
    out = np.zeros(qn.shape)
    for s, w in zip(quad.nodes, quad.weights):
        out += w * m.dual_variables(qn + s * dq, params)
    return out


def roe_euler_block(qL: np.ndarray, qR: np.ndarray, params: m.ModelParams,
                    quad: UnitQuadrature | None = None) -> np.ndarray:
    """Path-averaged 5x5 gasdynamic Hessian block (batched)."""
    if quad is None:
        quad = UnitQuadrature()
    qL = np.asarray(qL, dtype=float)
    qR = np.asarray(qR, dtype=float)
    dq = qR - qL
    H = np.zeros(qL.shape[:-1] + (5, 5))
    for s, w in zip(quad.nodes, quad.weights):
        H += w * m.euler_hessian_block(qL + s * dq, params)
    return H


def roe_L_pp(qL: np.ndarray, qR: np.ndarray, params: m.ModelParams,
             quad: UnitQuadrature | None = None) -> np.ndarray:
    """Inverse of the path-averaged gasdynamic Hessian block (batched).

    This is the Hessian of the dual potential with respect to the dual
    variables evaluated on the Roe average; it must be symmetric positive
    definite for the dissipation to produce entropy.
    """
    H = roe_euler_block(qL, qR, params, quad)
    w = np.linalg.eigvalsh(H)
    if np.any(w <= 0.0):
        raise PathInversionError(
            "path-averaged dual Hessian lost positive definiteness "
            f"(smallest eigenvalue {float(w.min()):.3e})")
    return np.linalg.inv(H)
