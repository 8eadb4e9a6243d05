"""Case execution: time loops, audits, error measures and file output."""

import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import fullydiscrete as fd
from . import io as tio
from . import model as m
from . import oracles as orc
from . import semidiscrete as sd
from .config import CLOSED_BOX_CASES, CaseConfig
from .errors import InvalidStateError
from .errors import ConfigError
from .grid import Grid
from .oracles.cases import CaseSetup
from .quadpath import UnitQuadrature

_DEFAULT_DRIFT_LIMIT = 1e-5


def _vortex_setup(n: int) -> CaseSetup:
    params = m.ModelParams(gamma=1.4, cv=1.0, eps_mode="constant", eps=0.0)
    grid = Grid((n, n), (0.0, 0.0), (10.0, 10.0))
    x, y = grid.centers()
    q0 = orc.isentropic_vortex_init(x, y, params)
    return CaseSetup("vortex", grid, params, q0, 0.25)


def build_setup(cfg: CaseConfig) -> CaseSetup:
    """Materialize the configured case (grid, parameters, initial state)."""
    n = cfg.n if cfg.n > 0 else 0
    if cfg.case == "vortex":
        setup = _vortex_setup(n or 64)
    elif cfg.case.startswith("rp"):
        setup = orc.riemann_setup(cfg.case, n=n or 1024, chi=cfg.chi)
    elif cfg.case == "shear":
        setup = orc.canonical_case_init(
            "shear", n=n or None, mu=cfg.mu if cfg.mu > 0.0 else None)
    else:
        setup = orc.canonical_case_init(cfg.case, n=n or None)
    params = setup.params.with_(cfl=cfg.cfl)
    t_end = cfg.t_end if cfg.t_end >= 0.0 else setup.t_end
    return CaseSetup(setup.name, setup.grid, params, setup.q0, t_end,
                     setup.extras)


@dataclass
class RunReport:
    """Outcome of one case execution."""

    case: str
    scheme: str
    shape: tuple
    steps: int = 0
    t_final: float = 0.0
    wall_time: float = 0.0
    max_energy_drift: float = 0.0
    min_production: float = np.inf
    picard_max: int = 0
    errors: dict = field(default_factory=dict)
    audits: list = field(default_factory=list)
    audit_rows: list = field(default_factory=list)
    output_files: list = field(default_factory=list)
    q_final: np.ndarray = None

    @property
    def passed(self) -> bool:
        return all(ok for _, _, _, ok in self.audits)

    def summary_lines(self):
        yield (f"{self.case} [{self.scheme}] {'x'.join(map(str, self.shape))}"
               f": {self.steps} steps to t={self.t_final:g} "
               f"in {self.wall_time:.2f}s")
        yield (f"  max |dE|/E = {self.max_energy_drift:.3e}, "
               f"min production = {self.min_production:.3e}"
               + (f", max Picard iters = {self.picard_max}"
                  if self.picard_max else ""))
        for name, value in sorted(self.errors.items()):
            yield f"  {name} = {value:.6e}"
        for name, value, limit, ok in self.audits:
            yield (f"  audit {name}: {value:.3e} (limit {limit:.3e}) "
                   f"[{'pass' if ok else 'FAIL'}]")
        for path in self.output_files:
            yield f"  wrote {path}"


def _exact_errors(cfg: CaseConfig, setup: CaseSetup, q: np.ndarray,
                  t_end: float) -> dict:
    """Case-specific error measures against the available references."""
    errors = {}
    grid, params = setup.grid, setup.params
    if setup.name == "vortex":
        dV = float(np.prod(grid.spacing))
        for label, idx in (("L2_rho", 0), ("L2_mom1", 1), ("L2_rhoS", 4)):
            diff = q[..., idx] - setup.q0[..., idx]
            errors[label] = float(np.sqrt(np.sum(diff**2) * dV))
    elif setup.name in ("rp1", "rp1s", "rp2") and cfg.chi == 0.0 and t_end > 0:
        left, right = setup.extras["left"], setup.extras["right"]
        sol = orc.exact_riemann_euler((left[0], left[1], left[3]),
                                      (right[0], right[1], right[3]),
                                      gamma=params.gamma)
        x = grid.centers()[0]
        rho, u, _ = sol.sample((x - setup.extras["xc"]) / t_end)
        dx = grid.spacing[0]
        errors["L1_rho"] = float(np.sum(np.abs(q[:, 0] - rho)) * dx)
        errors["Linf_u"] = float(np.max(np.abs(q[:, 1] / q[:, 0] - u)))
    elif setup.name == "shear" and setup.extras.get("mu") and t_end > 0:
        x = grid.centers()[0]
        v2 = q[:, 2] / q[:, 0]
        exact = orc.stokes_first_problem(x, t_end, setup.extras["mu"],
                                         v0=setup.extras["v0"])
        errors["Linf_v2"] = float(np.max(np.abs(v2 - exact)))
    elif setup.name == "vshock":
        q_exact = setup.extras["profile_state"](grid.centers()[0])
        errors["Linf_rho"] = float(np.max(np.abs(q[:, 0] - q_exact[:, 0])))
    return errors


def run_case(cfg: CaseConfig, setup: CaseSetup = None) -> RunReport:
    """Execute one configured case and collect audits and outputs."""
    cfg.validate()
    if setup is None:
        setup = build_setup(cfg)
    grid, params, t_end = setup.grid, setup.params, setup.t_end
    quad = UnitQuadrature(cfg.n_gp)
    report = RunReport(setup.name, cfg.scheme, grid.shape)
    q = setup.q0.copy()
    e0 = sd.total_energy_sum(q, grid, params)
    settings = fd.PicardSettings(quad=quad)
    start = time.perf_counter()
    t = 0.0
    n_axis = np.array([1.0, 0.0, 0.0])

    while t < t_end - 1e-13:
        if cfg.scheme == "muscl-reference":
            w = orc.entropy_to_energy(q, params)
            smax = float(np.max(m.max_signal_speed(q, n_axis, params)))
            dt = min(cfg.cfl * grid.spacing[0] / smax, t_end - t)
            q = orc.energy_to_entropy(
                orc.muscl_reference_step(w, grid, dt, params), params)
            prod = np.inf
        elif cfg.scheme == "fullydiscrete":
            dt = min(sd.max_stable_dt(q, grid, params), t_end - t)
            # same rejection rule as below: retry with a halved dt when
            # the Picard iteration leaves the admissible set or stalls
            while True:
                try:
                    qn, iters, diag = fd.picard_advance(q, grid, params, dt,
                                                        settings)
                    if np.all(np.isfinite(qn)) and \
                            dt <= sd.max_stable_dt(qn, grid, params) * 1.0001:
                        break
                except (InvalidStateError, fd.PicardConvergenceError):
                    pass
                dt *= 0.5
                if dt < 1e-14 * t_end:
                    raise InvalidStateError(
                        "time step collapsed while seeking a stable step")
            q = qn
            report.picard_max = max(report.picard_max, iters)
            prod = diag.min_production
        else:
            dt = min(sd.max_stable_dt(q, grid, params), t_end - t)
            # accept a step only if it stays finite and the step taken is
            # still inside the CFL bound of the state it produced; a sharp
            # front can triple the signal speed within one step, in which
            # case the step is redone with a halved dt
            while True:
                try:
                    qn, diag = sd.time_step(q, grid, params, dt,
                                            method=cfg.time_method, quad=quad)
                    if np.all(np.isfinite(qn)) and \
                            dt <= sd.max_stable_dt(qn, grid, params) * 1.0001:
                        break
                except InvalidStateError:
                    pass
                dt *= 0.5
                if dt < 1e-14 * t_end:
                    raise InvalidStateError(
                        "time step collapsed while seeking a stable step")
            q = qn
            prod = diag.min_production
        t += dt
        report.steps += 1
        drift = abs(sd.total_energy_sum(q, grid, params) - e0) / abs(e0)
        report.max_energy_drift = max(report.max_energy_drift, drift)
        report.min_production = min(report.min_production, prod)
        report.audit_rows.append((report.steps, t, drift, prod))

    report.t_final = t
    report.wall_time = time.perf_counter() - start
    report.q_final = q
    report.errors = _exact_errors(cfg, setup, q, t_end)

    if cfg.scheme != "muscl-reference":
        report.audits.append(("entropy_production", report.min_production,
                              cfg.production_min,
                              report.min_production >= cfg.production_min))
    drift_limit = cfg.energy_drift_max
    if drift_limit < 0.0 and setup.name in CLOSED_BOX_CASES \
            and cfg.scheme != "muscl-reference":
        drift_limit = _DEFAULT_DRIFT_LIMIT
    if drift_limit >= 0.0:
        report.audits.append(("energy_drift", report.max_energy_drift,
                              drift_limit,
                              report.max_energy_drift <= drift_limit))

    out_dir = os.environ.get("TCFV_OUTPUT_DIR", cfg.output_dir)
    stem = os.path.join(tio.ensure_dir(out_dir),
                        f"{setup.name}_{cfg.scheme}")
    if cfg.profile_csv:
        report.output_files.append(
            tio.write_csv(stem + ".csv", grid, q, params))
    if cfg.field_vtk:
        report.output_files.append(
            tio.write_vtk(stem + ".vtk", grid, q, params))
    if cfg.audit_csv:
        report.output_files.append(
            tio.write_audit_csv(stem + "_audit.csv", report.audit_rows))
    return report


def convergence_study(cfg: CaseConfig, meshes) -> list:
    """Run the case over several meshes; return rows of
    (n, errors dict, orders dict)."""
    if cfg.case != "vortex":
        raise ConfigError("convergence study requires a case with an exact "
                          "solution (vortex)")
    rows = []
    prev = None
    for n in meshes:
        run_cfg = CaseConfig(**{**cfg.__dict__, "n": int(n),
                                "profile_csv": False, "field_vtk": False,
                                "audit_csv": False})
        report = run_case(run_cfg)
        orders = {}
        if prev is not None:
            for key, err in report.errors.items():
                if prev[1][key] > 0 and err > 0:
                    orders[key] = float(np.log2(prev[1][key] / err)
                                        / np.log2(n / prev[0]))
        rows.append((int(n), report.errors, orders))
        prev = (int(n), report.errors)
    return rows


def energy_error_table(cfg: CaseConfig, cfls=(0.5, 0.4, 0.3, 0.2, 0.1),
                       n_gps=(3, 5)) -> list:
    """Max relative total-energy error over a smoothed-jump run, for each
    time discretization, quadrature order and CFL number."""
    if not (cfg.case.startswith("rp") and cfg.chi > 0.0):
        raise ConfigError("energy table requires a smoothed Riemann case "
                          "(chi > 0)")
    variants = [("semidiscrete", "rk3"), ("semidiscrete", "rk4"),
                ("fullydiscrete", "rk3")]
    rows = []
    for scheme, method in variants:
        for n_gp in n_gps:
            drifts = {}
            for cfl in cfls:
                run_cfg = CaseConfig(**{
                    **cfg.__dict__, "scheme": scheme, "time_method": method,
                    "cfl": cfl, "n_gp": n_gp, "profile_csv": False,
                    "field_vtk": False, "audit_csv": False,
                    "energy_drift_max": -1.0})
                drifts[cfl] = run_case(run_cfg).max_energy_drift
            label = scheme if scheme == "fullydiscrete" \
                else f"{scheme}-{method}"
            rows.append((label, n_gp, drifts))
    return rows
