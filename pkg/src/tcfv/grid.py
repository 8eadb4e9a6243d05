"""Uniform Cartesian grids in one and two space dimensions.

A grid stores only geometry and boundary descriptors; the state lives in
a separate packed array of shape ``grid.shape + (17,)``.  Ghost layers
(two per side) are materialized on demand, one axis at a time, which is
all the face sweeps need.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import model as m
from .errors import ConfigError

BC_KINDS = ("periodic", "transmissive", "dirichlet", "wall")


@dataclass(frozen=True)
class BoundaryCondition:
    """One side of one axis.

    ``dirichlet`` holds a fixed exterior state; ``wall`` is a no-slip
    wall moving tangentially with ``wall_velocity`` (normal component
    ignored).
    """

    kind: str
    state: np.ndarray | None = None
    wall_velocity: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in BC_KINDS:
            raise ConfigError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "dirichlet":
            if self.state is None or np.shape(self.state) != (m.NCOMP,):
                raise ConfigError("dirichlet boundary needs one packed state")


PERIODIC = BoundaryCondition("periodic")
TRANSMISSIVE = BoundaryCondition("transmissive")


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian grid; ``shape`` is (nx,) or (nx, ny)."""

    shape: tuple
    lower: tuple
    upper: tuple
    bc: tuple = ()  # per axis: (low side, high side)

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        lower = tuple(float(x) for x in self.lower)
        upper = tuple(float(x) for x in self.upper)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if len(shape) not in (1, 2):
            raise ConfigError("only 1D and 2D grids are supported")
        if len(lower) != len(shape) or len(upper) != len(shape):
            raise ConfigError("lower/upper extents must match the grid rank")
        if any(n < 1 for n in shape):
            raise ConfigError("cell counts must be positive")
        if any(u <= l for l, u in zip(lower, upper)):
            raise ConfigError("upper extent must exceed lower extent")
        bc = self.bc if self.bc else tuple((PERIODIC, PERIODIC) for _ in shape)
        bc = tuple(tuple(side) for side in bc)
        if len(bc) != len(shape) or any(len(side) != 2 for side in bc):
            raise ConfigError("need one (low, high) boundary pair per axis")
        for lo, hi in bc:
            if (lo.kind == "periodic") != (hi.kind == "periodic"):
                raise ConfigError("periodic boundaries must be paired")
        object.__setattr__(self, "bc", bc)

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> tuple:
        return tuple((u - l) / n
                     for l, u, n in zip(self.lower, self.upper, self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_centers(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return self.lower[axis] + h * (np.arange(self.shape[axis]) + 0.5)

    def centers(self):
        """Cell-center coordinate arrays, broadcastable to ``shape``."""
        axes = [self.axis_centers(a) for a in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))


def _wall_ghost(q_int: np.ndarray, axis: int, bc: BoundaryCondition) -> np.ndarray:
    """No-slip wall image of an interior state: normal velocity mirrored,
    tangential velocity set to 2 v_wall - v_interior, scalars, A and J
    copied componentwise."""
    g = q_int.copy()
    rho = q_int[..., m.I_RHO]
    v = q_int[..., m.I_MOM] / rho[..., None]
    vw = np.asarray(bc.wall_velocity, dtype=float)
    vg = 2.0 * vw - v
    # wall_velocity is tangential by definition; the normal component of
    # the image must mirror the interior regardless of vw
    vg[..., axis] = -v[..., axis]
    g[..., m.I_MOM] = rho[..., None] * vg
    return g


def pad_axis(q: np.ndarray, grid: Grid, axis: int, ghosts: int = 2) -> np.ndarray:
    """Return q extended by ghost layers along one axis per its BCs."""
    lo, hi = grid.bc[axis]
    n = grid.shape[axis]
    if ghosts > n and (lo.kind == "periodic"):
        raise ConfigError("grid too small for the requested ghost depth")
    qm = np.moveaxis(q, axis, 0)
    out = np.empty((n + 2 * ghosts,) + qm.shape[1:], dtype=q.dtype)
    out[ghosts:n + ghosts] = qm

    for side, bc in ((0, lo), (1, hi)):
        if bc.kind == "periodic":
            src = qm[-ghosts:] if side == 0 else qm[:ghosts]
        elif bc.kind == "transmissive":
            edge = qm[0] if side == 0 else qm[-1]
            src = np.broadcast_to(edge, (ghosts,) + edge.shape)
        elif bc.kind == "dirichlet":
            src = np.broadcast_to(bc.state, (ghosts,) + qm.shape[1:])
        else:  # wall: reflect the first interior layers
            inner = qm[:ghosts][::-1] if side == 0 else qm[-ghosts:][::-1]
            src = _wall_ghost(inner, axis, bc)
        if side == 0:
            out[:ghosts] = src
        else:
            out[n + ghosts:] = src
    return np.moveaxis(out, 0, axis)
