"""Second-order MUSCL-Hancock reference scheme (1D).

Independent cross-check solver: it evolves the total energy conservation
law instead of the entropy balance, uses minmod-limited primitive slopes,
a Rusanov flux for the conservative part and central differences for the
non-conservative products in the distortion and thermal-impulse equations.
Entropy is recomputed from the energy for output.
"""

import numpy as np

from .. import model as m
from ..errors import InvalidStateError
from ..grid import Grid, pad_axis

# energy-form state w = (rho, rho v, E, A, J); same layout as the packed
# entropy-form state except slot 4 carries the total energy density
_I_E = m.I_RHOS


def entropy_to_energy(q: np.ndarray, params: m.ModelParams) -> np.ndarray:
    w = np.array(q, dtype=float)
    w[..., _I_E] = m.total_energy(q, params)
    return w


def energy_to_entropy(w: np.ndarray, params: m.ModelParams) -> np.ndarray:
    """Recover the entropy slot from the total energy density."""
    q = np.array(w, dtype=float)
    rho, _, E, A, J = m.unpack(w)
    v = w[..., m.I_MOM] / rho[..., None]
    e2 = 0.5 * rho * np.einsum("...i,...i->...", v, v)
    _, devG = m.metric_tensors(A)
    e3 = 0.25 * rho * params.cs**2 * np.einsum("...ij,...ij->...", devG, devG)
    e4 = 0.5 * params.ch**2 * rho * np.einsum("...i,...i->...", J, J)
    e1 = E - e2 - e3 - e4
    if np.any(e1 <= 0.0):
        raise InvalidStateError("non-positive internal energy")
    S = params.cv * np.log((params.gamma - 1.0) * e1 * rho ** (-params.gamma))
    q[..., m.I_RHOS] = rho * S
    return q


def _flux(w: np.ndarray, params: m.ModelParams) -> np.ndarray:
    """Physical x-flux of the energy-form system (conservative part)."""
    q = energy_to_entropy(w, params)
    rho, mom, E, A, J = m.unpack(w)
    v = mom / rho[..., None]
    p = m.pressure(q, params)
    sigma, omega, h = m.stress_and_heat(q, params)
    stress = p[..., None, None] * np.eye(3) + sigma + omega
    f = np.zeros_like(w)
    f[..., m.I_RHO] = mom[..., 0]
    f[..., m.I_MOM] = v[..., 0, None] * mom + stress[..., :, 0]
    f[..., _I_E] = (v[..., 0] * E
                    + np.einsum("...i,...i->...", v, stress[..., :, 0])
                    + h[..., 0])
    # distortion flux (A v)_i delta_k1 and thermal impulse flux (J.v + T)n
    Av = np.einsum("...im,...m->...i", A, v)
    fA = np.zeros(A.shape[:-2] + (3, 3))
    fA[..., :, 0] = Av
    f[..., m.I_A] = fA.reshape(w[..., m.I_A].shape)
    T = m.temperature(q, params)
    f[..., 14] = np.einsum("...i,...i->...", J, v) + T
    return f


def _nonconservative(w: np.ndarray, dwdx: np.ndarray) -> np.ndarray:
    """Products v_m (d_m - d_k) acting on A and J rows, x-direction only:
    v1 dA_ik/dx - delta_k1 v_m dA_im/dx and the J analogue."""
    rho = w[..., m.I_RHO]
    v = w[..., m.I_MOM] / rho[..., None]
    dA = dwdx[..., m.I_A].reshape(w.shape[:-1] + (3, 3))
    dJ = dwdx[..., m.I_J]
    nc = np.zeros_like(w)
    ncA = v[..., 0, None, None] * dA
    ncA[..., :, 0] -= np.einsum("...m,...im->...i", v, dA)
    nc[..., m.I_A] = ncA.reshape(w[..., m.I_A].shape)
    ncJ = v[..., 0, None] * dJ
    ncJ[..., 0] -= np.einsum("...m,...m->...", v, dJ)
    nc[..., m.I_J] = ncJ
    return nc


def _sources(w: np.ndarray, params: m.ModelParams) -> np.ndarray:
    """Relaxation sources in energy form (the energy slot is untouched)."""
    src = m.relaxation_sources(energy_to_entropy(w, params), params)
    src[..., _I_E] = 0.0
    return src


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b > 0.0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def _primitives(w: np.ndarray) -> np.ndarray:
    wp = np.array(w, dtype=float)
    wp[..., m.I_MOM] = w[..., m.I_MOM] / w[..., m.I_RHO, None]
    return wp


def _conserved(wp: np.ndarray) -> np.ndarray:
    w = np.array(wp, dtype=float)
    w[..., m.I_MOM] = wp[..., m.I_MOM] * wp[..., m.I_RHO, None]
    return w


def muscl_reference_step(w: np.ndarray, grid: Grid, dt: float,
                         params: m.ModelParams) -> np.ndarray:
    """One MUSCL-Hancock step of the energy-form system on a 1D grid."""
    if grid.dim != 1:
        raise ValueError("reference scheme is one-dimensional")
    dx = grid.spacing[0]
    # boundary states are stored in entropy form, so pad there and convert
    q_pad = pad_axis(energy_to_entropy(w, params), grid, 0)
    wp = _primitives(entropy_to_energy(q_pad, params))
    slope = _minmod(wp[1:-1] - wp[:-2], wp[2:] - wp[1:-1])
    w_minus = _conserved(wp[1:-1] - 0.5 * slope)
    w_plus = _conserved(wp[1:-1] + 0.5 * slope)

    # Hancock predictor: conservative part from the in-cell flux jump,
    # non-conservative part with the cell-centered velocity
    dw_half = -0.5 * dt / dx * (
        _flux(w_plus, params) - _flux(w_minus, params)
        + _nonconservative(_conserved(wp[1:-1]), w_plus - w_minus))
    w_minus = w_minus + dw_half
    w_plus = w_plus + dw_half

    a = w_plus[:-1]  # right face value of the left cell
    b = w_minus[1:]  # left face value of the right cell
    qa = energy_to_entropy(a, params)
    qb = energy_to_entropy(b, params)
    n = np.array([1.0, 0.0, 0.0])
    smax = np.maximum(m.max_signal_speed(qa, n, params),
                      m.max_signal_speed(qb, n, params))
    fhat = 0.5 * (_flux(a, params) + _flux(b, params)) \
        - 0.5 * smax[..., None] * (b - a)

    wc = _conserved(wp)
    dwdx = (wc[3:-1] - wc[1:-3]) / (2.0 * dx)
    w_new = (w - dt / dx * (fhat[1:] - fhat[:-1])
             - dt * _nonconservative(w, dwdx))

    # relaxation, sub-cycled when stiff relative to the advective step
    tau_min = min(params.tau1 if params.cs > 0.0 else np.inf,
                  params.tau2 if params.ch > 0.0 else np.inf)
    n_sub = max(1, int(np.ceil(dt / (0.2 * tau_min))) if np.isfinite(tau_min)
                else 1)
    h = dt / n_sub
    for _ in range(n_sub):
        k1 = _sources(w_new, params)
        k2 = _sources(w_new + h * k1, params)
        w_new = w_new + 0.5 * h * (k1 + k2)
    return w_new


def muscl_run(q0: np.ndarray, grid: Grid, params: m.ModelParams,
              t_end: float, cfl: float = 0.45) -> np.ndarray:
    """Advance an entropy-form state to t_end; returns entropy form."""
    w = entropy_to_energy(q0, params)
    n = np.array([1.0, 0.0, 0.0])
    t = 0.0
    while t < t_end - 1e-14:
        q = energy_to_entropy(w, params)
        smax = float(np.max(m.max_signal_speed(q, n, params)))
        dt = min(cfl * grid.spacing[0] / smax, t_end - t)
        w = muscl_reference_step(w, grid, dt, params)
        t += dt
    return energy_to_entropy(w, params)
