"""Deterministic CSV and legacy-VTK output of solution fields."""

import os

import numpy as np

from . import model as m
from .grid import Grid

_A_NAMES = [f"A{i}{k}" for i in (1, 2, 3) for k in (1, 2, 3)]
_COLUMNS = ["rho", "u", "v", "w", "p", "S"] + _A_NAMES + ["J1", "J2", "J3", "E"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _field_table(q: np.ndarray, params: m.ModelParams) -> np.ndarray:
    """Columns rho,u,v,w,p,S,A11..A33,J1..J3,E for flattened cells."""
    rho, v, p, S = m.primitives(q, params)
    E = m.total_energy(q, params)
    cols = ([rho] + [v[..., i] for i in range(3)] + [p, S]
            + [q[..., m.I_A][..., i] for i in range(9)]
            + [q[..., m.I_J][..., i] for i in range(3)] + [E])
    return np.stack([np.ravel(c) for c in cols], axis=-1)


def write_csv(path: str, grid: Grid, q: np.ndarray,
              params: m.ModelParams) -> str:
    """Write one row per cell: coordinates followed by the field columns."""
    coords = grid.centers()
    coord_names = ["x", "y"][: grid.dim]
    table = _field_table(q, params)
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(",".join(coord_names + _COLUMNS) + "\n")
            flat_coords = [np.ravel(c) for c in coords]
            for i in range(table.shape[0]):
                row = [_fmt(c[i]) for c in flat_coords]
                row += [_fmt(v) for v in table[i]]
                fh.write(",".join(row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV output to {path!r}: {exc}") from exc
    return path


def write_vtk(path: str, grid: Grid, q: np.ndarray,
              params: m.ModelParams) -> str:
    """Legacy ASCII VTK STRUCTURED_POINTS file with cell-center data.

    Scalars rho, p, S, E and each distortion component; vectors for the
    velocity and the thermal impulse.
    """
    nx = grid.shape[0]
    ny = grid.shape[1] if grid.dim == 2 else 1
    dx = grid.spacing[0]
    dy = grid.spacing[1] if grid.dim == 2 else 1.0
    ox = grid.lower[0] + 0.5 * dx
    oy = (grid.lower[1] + 0.5 * dy) if grid.dim == 2 else 0.0

    # VTK expects x varying fastest; fields are indexed [ix, iy]
    def flat(a):
        return np.ravel(a, order="F") if grid.dim == 2 else np.ravel(a)

    rho, v, p, S = m.primitives(q, params)
    E = m.total_energy(q, params)
    scalars = [("rho", rho), ("p", p), ("S", S), ("E", E)]
    scalars += [(name, q[..., m.I_A][..., i])
                for i, name in enumerate(_A_NAMES)]
    vectors = [("velocity", v), ("J", q[..., m.I_J])]

    lines = [
        "# vtk DataFile Version 3.0",
        "tcfv output",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} 1",
        f"ORIGIN {_fmt(ox)} {_fmt(oy)} 0",
        f"SPACING {_fmt(dx)} {_fmt(dy)} 1",
        f"POINT_DATA {nx * ny}",
    ]
    for name, data in scalars:
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(_fmt(x) for x in flat(data))
    for name, data in vectors:
        lines.append(f"VECTORS {name} double")
        comps = [flat(data[..., i]) for i in range(3)]
        lines.extend(f"{_fmt(a)} {_fmt(b)} {_fmt(c)}"
                     for a, b, c in zip(*comps))
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write VTK output to {path!r}: {exc}") from exc
    return path


def write_audit_csv(path: str, rows: list) -> str:
    """Write (step, time, drift, production) audit samples."""
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("step,time,energy_drift,min_production\n")
            for step, t, drift, prod in rows:
                fh.write(f"{step},{_fmt(t)},{_fmt(drift)},{_fmt(prod)}\n")
    except OSError as exc:
        raise OSError(f"cannot write audit output to {path!r}: {exc}") from exc
    return path


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
