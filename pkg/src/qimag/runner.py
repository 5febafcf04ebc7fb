"""Scenario execution: audits, evolutions and eigen-reductions to files.

Time series land in `timeseries.csv` (RFC-4180 style, header row, 17
significant digits) with the effective configuration echoed both into the
leading comment lines and into `effective-config.toml`, which re-runs the
scenario verbatim.  Audit reports land in `audit-report.json`, one record
per identity.  A timestamp comment is written unless suppressed, so that
suppressed outputs are byte-identical across reruns.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
import os
from typing import List, Optional

import numpy as np

from . import complex_dynamics as cdyn
from . import quat_dynamics as qdyn
from .audit import AuditConfig, audit_all, report_table, report_to_json
from .config import ScenarioConfig, dump_toml, evaluate_form
from .errors import ConfigError
from .grid import ComplexField, Grid1D, QuatField, box_eigenstates, integrate
from .schedules import SpaceLinear, build_schedule, rotor_laplace_eigenvalue

FMT = "{:.17g}"


def _fmt(value: float) -> str:
    return FMT.format(float(value))


def _ensure_outdir(out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def _header_lines(cfg: ScenarioConfig, timestamp: bool) -> List[str]:
    lines = []
    if timestamp:
        lines.append(f"# generated: {_dt.datetime.now(_dt.timezone.utc).isoformat()}")
    for chunk in dump_toml(cfg.effective()).splitlines():
        lines.append(f"# {chunk}" if chunk else "#")
    return lines


def _write_csv(path: str, cfg: ScenarioConfig, timestamp: bool,
               columns: List[str], rows: List[List[float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in _header_lines(cfg, timestamp):
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_effective(cfg: ScenarioConfig, out_dir: str) -> None:
    with open(os.path.join(out_dir, "effective-config.toml"), "w",
              encoding="utf-8") as fh:
        fh.write(dump_toml(cfg.effective()))


def _initial_complex(cfg: ScenarioConfig, grid: Grid1D):
    """(field, discrete ground energy or None) for the configured start state."""
    block = cfg.complex_initial or {"kind": "eigenstate", "level": 1}
    kind = block.get("kind", "eigenstate")
    if kind == "eigenstate":
        level = int(block.get("level", 1))
        potential = _complex_potential(cfg, grid)
        energies, states = box_eigenstates(grid, potential.values.real,
                                           cfg.hbar, cfg.m, levels=level)
        return states[level - 1], float(energies[level - 1])
    centre = float(block.get("center", grid.origin + grid.length / 2.0))
    width = float(block.get("width", grid.length / 10.0))
    momentum = float(block.get("momentum", 0.0))
    values = np.exp(-(((grid.x - centre) / width) ** 2) + 1j * momentum * grid.x)
    norm = math.sqrt(integrate(np.abs(values) ** 2, grid))
    return ComplexField(grid, values / norm), None


def _complex_potential(cfg: ScenarioConfig, grid: Grid1D) -> ComplexField:
    if not cfg.complex_potential:
        return ComplexField.zeros(grid)
    values = evaluate_form(cfg.complex_potential, grid.x.astype(complex),
                           "[complex_potential]")
    return ComplexField(grid, values)


def run_evolve_complex(cfg: ScenarioConfig, out_dir: str, timestamp: bool = True) -> int:
    grid = cfg.build_grid()
    potential = _complex_potential(cfg, grid)
    block = cfg.complex_block
    setup = cdyn.DeformedSetup(grid=grid, V=potential, hbar=cfg.hbar, m=cfg.m,
                               theta0=float(block.get("theta0", 0.0)),
                               slope=float(block.get("theta_slope", 0.0)),
                               rate=float(block.get("theta_rate", 0.0)))
    psi, _ = _initial_complex(cfg, grid)
    t_end = float(cfg.run["t_end"])
    dt = float(cfg.run["dt"])
    stride = int(cfg.run.get("output_stride", 1))
    steps = int(round(t_end / dt))

    columns = ["t", "norm", "ln_norm_rate", "residual_cc16", "residual_cc04",
               "beta_integral", "gamma_integral", "kappa_integral",
               "lambda_integral"]
    rows: List[List[float]] = []

    def record(t: float, state: ComplexField):
        psi_t = cdyn.evolution_rhs(state, setup, t)
        rep16 = cdyn.continuity_deformed(state, setup, t, psi_t)
        rep04 = cdyn.continuity_weighted(state, setup, t, psi_t)
        norm = math.sqrt(integrate(np.abs(state.values) ** 2, grid))
        rows.append([
            t, norm, cdyn.log_norm_rate(state, psi_t),
            rep16.max_residual, rep04.max_residual,
            integrate(rep04.terms["beta"], grid),
            integrate(rep04.terms["gamma"], grid),
            integrate(rep16.terms["kappa"], grid),
            integrate(rep16.terms["lambda"], grid),
        ])

    t = 0.0
    record(t, psi)
    for step in range(steps):
        psi = cdyn.step_deformed(psi, setup, t, dt)
        t += dt
        if (step + 1) % stride == 0 or step == steps - 1:
            record(t, psi)

    _ensure_outdir(out_dir)
    _write_csv(os.path.join(out_dir, "timeseries.csv"), cfg, timestamp, columns, rows)
    _write_effective(cfg, out_dir)
    print(f"evolve-complex: {steps} steps to t = {_fmt(t)}, "
          f"final norm {_fmt(rows[-1][1])}, wrote {out_dir}/timeseries.csv")
    return 0


def run_evolve_quat(cfg: ScenarioConfig, out_dir: str, timestamp: bool = True) -> int:
    grid = cfg.build_grid()
    x = grid.x.astype(complex)
    zeros = np.zeros(grid.n, dtype=complex)
    v_arr = evaluate_form(cfg.quat_potential_v, x, "[quat_potential_v]") \
        if cfg.quat_potential_v else zeros.copy()
    w_arr = evaluate_form(cfg.quat_potential_w, x, "[quat_potential_w]") \
        if cfg.quat_potential_w else zeros.copy()
    alpha_arr = evaluate_form(cfg.quat_potential_alpha, x,
                              "[quat_potential_alpha]").real \
        if cfg.quat_potential_alpha else np.zeros(grid.n)
    beta_arr = evaluate_form(cfg.quat_potential_beta, x, "[quat_potential_beta]") \
        if cfg.quat_potential_beta else zeros.copy()
    pot = qdyn.QuatPotential(grid, alpha_arr, beta_arr, v_arr, w_arr)

    block = cfg.quat
    gamma0 = float(block.get("gamma0", 0.0))
    omega0 = float(block.get("omega0", 0.0))
    level = int(cfg.quat_initial.get("level", block.get("level", 1)))
    energies, states = box_eigenstates(grid, v_arr.real, cfg.hbar, cfg.m,
                                       levels=level)
    mu = float(energies[level - 1])
    e_rot = float(block["energy"]) if "energy" in block \
        else qdyn.rotor_energy_for_level(mu, 0.0, cfg.hbar, cfg.m)
    phi = states[level - 1]
    unit = qdyn.UnitField.constant(grid, omega0 - gamma0)
    psi = qdyn.stationary_state(phi, e_rot, gamma0, omega0, 0.0, cfg.hbar)
    start = psi

    t_end = float(cfg.run["t_end"])
    dt = float(cfg.run["dt"])
    stride = int(cfg.run.get("output_stride", 1))
    steps = int(round(t_end / dt))

    times: List[float] = []
    snapshots: List[QuatField] = []

    def record(t: float, state: QuatField):
        times.append(t)
        snapshots.append(state)

    t = 0.0
    record(t, psi)
    for step in range(steps):
        psi = qdyn.step_quaternionic(psi, pot, unit, dt, cfg.hbar, cfg.m)
        t += dt
        if (step + 1) % stride == 0 or step == steps - 1:
            record(t, psi)

    columns = ["t", "norm", "residual_gi05", "residual_gi08", "B_integral",
               "G_integral", "lambda_period_error"]
    rows: List[List[float]] = []
    for idx, (ti, state) in enumerate(zip(times, snapshots)):
        rep = qdyn.continuity_report(state, pot, unit, cfg.hbar, cfg.m)
        norm = math.sqrt(integrate(state.norm_sq(), grid))
        # equation residual from differenced snapshots (2nd order stencils)
        if 0 < idx < len(times) - 1:
            span = times[idx + 1] - times[idx - 1]
            rate = (snapshots[idx + 1] - snapshots[idx - 1]).scale(1.0 / span)
        elif idx == 0 and len(times) >= 3:
            h = times[1] - times[0]
            rate = (snapshots[0].scale(-3.0) + snapshots[1].scale(4.0)
                    - snapshots[2]).scale(1.0 / (2.0 * h))
        elif idx == len(times) - 1 and len(times) >= 3:
            h = times[-1] - times[-2]
            rate = (snapshots[-1].scale(3.0) - snapshots[-2].scale(4.0)
                    + snapshots[-3]).scale(1.0 / (2.0 * h))
        else:
            rate = qdyn.evolution_rhs(state, pot, unit, cfg.hbar, cfg.m)
        eq_residual = (rate.mul_quat_right(np.zeros(grid.n, complex), unit.b)
                       .scale(cfg.hbar)
                       - qdyn.apply_hamiltonian(state, pot, cfg.hbar, cfg.m)).abs_max()
        rows.append([
            ti, norm, eq_residual, rep.max_residual,
            integrate(rep.terms["B"], grid), integrate(rep.terms["G"], grid),
            (state - start).abs_max(),
        ])

    _ensure_outdir(out_dir)
    _write_csv(os.path.join(out_dir, "timeseries.csv"), cfg, timestamp, columns, rows)
    _write_effective(cfg, out_dir)
    print(f"evolve-quat: {steps} steps to t = {_fmt(t)}, rotor energy {_fmt(e_rot)}, "
          f"final deviation from start {_fmt(rows[-1][6])}, "
          f"wrote {out_dir}/timeseries.csv")
    return 0


def run_eigen(cfg: ScenarioConfig, out_dir: str, timestamp: bool = True) -> int:
    grid = cfg.build_grid()
    block = cfg.eigen
    k = tuple(float(v) for v in block["k"])
    g = tuple(float(v) for v in block["g"])
    gamma0 = float(block.get("gamma0", 0.0))
    omega0 = float(block.get("omega0", 0.0))
    level = int(block.get("level", 1))
    t_check = float(block.get("t_check", 0.37))

    fam0 = SpaceLinear(E=1.0, k=k, g=g, gamma0=gamma0, omega0=omega0)
    kappa = rotor_laplace_eigenvalue(fam0)
    energies, states = box_eigenstates(grid, None, cfg.hbar, cfg.m, levels=level)
    mu = float(energies[level - 1])
    e_rot = qdyn.rotor_energy_for_level(mu, kappa, cfg.hbar, cfg.m)
    fam = SpaceLinear(E=e_rot, k=k, g=g, gamma0=gamma0, omega0=omega0)
    schedule = build_schedule(fam)
    residual = qdyn.full_pde_residual(states[level - 1], schedule,
                                      ComplexField.zeros(grid), t_check,
                                      cfg.hbar, cfg.m)
    from .calibration import grid_tolerance, laplacian_constant
    tolerance = float(block.get("tolerance",
                                grid_tolerance(grid, laplacian_constant(grid, 1))))
    status = "pass" if residual <= tolerance else "fail"
    payload = {
        "mode": "eigen-reduce",
        "laplace_eigenvalue": kappa,
        "level": level,
        "grid_eigenvalue": mu,
        "rotor_energy": e_rot,
        "t_check": t_check,
        "pde_residual": residual,
        "tolerance": tolerance,
        "status": status,
    }
    if timestamp:
        payload["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    _ensure_outdir(out_dir)
    with open(os.path.join(out_dir, "eigen-report.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    _write_effective(cfg, out_dir)
    print(f"eigen-reduce: constant {_fmt(kappa)}, rotor energy {_fmt(e_rot)}, "
          f"residual {_fmt(residual)} ({status}), wrote {out_dir}/eigen-report.json")
    return 0 if status == "pass" else 1


def run_audit(cfg: ScenarioConfig, out_dir: str, timestamp: bool = True,
              threads: Optional[int] = None, seed: Optional[int] = None) -> int:
    seed = cfg.seed if seed is None else seed
    threads = int(cfg.audit.get("threads", 1)) if threads is None else threads
    audit_cfg = AuditConfig(grid_n=int(cfg.audit.get("grid_n", 256)),
                            hbar=cfg.hbar, m=cfg.m)
    report = audit_all(seed=seed, config=audit_cfg, threads=threads)
    _ensure_outdir(out_dir)
    body = report_to_json(report)
    if timestamp:
        payload = json.loads(body)
        payload["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
        body = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    with open(os.path.join(out_dir, "audit-report.json"), "w", encoding="utf-8") as fh:
        fh.write(body)
    _write_effective(cfg, out_dir)
    print(report_table(report), end="")
    print(f"audit: seed {seed}, {report.passed}/{len(report.cases)} identities pass, "
          f"wrote {out_dir}/audit-report.json")
    return 0 if report.ok else 1


def run_scenario(cfg: ScenarioConfig, out_dir: str, timestamp: bool = True,
                 threads: Optional[int] = None, seed: Optional[int] = None) -> int:
    if cfg.mode == "audit":
        return run_audit(cfg, out_dir, timestamp, threads, seed)
    if cfg.mode == "evolve-complex":
        return run_evolve_complex(cfg, out_dir, timestamp)
    if cfg.mode == "evolve-quat":
        return run_evolve_quat(cfg, out_dir, timestamp)
    if cfg.mode == "eigen-reduce":
        return run_eigen(cfg, out_dir, timestamp)
    raise ConfigError(f"unknown mode {cfg.mode!r}")
