"""Command-line front end: run the analysis pipeline and emit CSV tables."""

from __future__ import annotations

import argparse
import os
import sys as _sys

import numpy as np

from . import circuits, coupled, reduction, timesim
from .beam import modal_basis, modal_force_vector
from .config import ScenarioConfig, load_config
from .errors import NumericalError, ParameterError
from .patches import uniform_layout


def _fmt(value):
    """Serialize a number with 9 significant digits."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.9g}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if not isinstance(v, str) else v for v in row) + "\n")


def _build_netlist(cfg, n):
    if cfg.netlist_path is not None:
        with open(cfg.netlist_path) as fh:
            return circuits.parse_netlist(fh.read())
    try:
        if cfg.topology == "single_shunt":
            return circuits.build_single_shunt(n, cfg.r, cfg.l)
        if cfg.topology == "multi_shunt":
            return circuits.build_multi_shunt(n, cfg.r, cfg.l)
        return circuits.build_transmission_line(n, cfg.r, cfg.l, cfg.termination)
    except ParameterError as exc:
        raise ParameterError(f"[network] topology = {cfg.topology}: {exc}") from exc


def _build_system(cfg, netlist=None):
    basis = modal_basis(cfg.beam_spec(), cfg.n_modes)
    patches = uniform_layout(cfg.beam_spec(), cfg.n_patches, cfg.coverage, cfg.cp, cfg.gamma)
    net = netlist if netlist is not None else _build_netlist(cfg, cfg.n_patches)
    return coupled.assemble(basis, patches, net)


def _bounds(cfg):
    if cfg.r_bounds is None and cfg.l_bounds is None:
        return None
    if cfg.r_bounds is None or cfg.l_bounds is None:
        raise ParameterError("[optimize] give both R and L bounds or neither")
    return (cfg.r_bounds, cfg.l_bounds)


def _initial_state(sys, kind):
    x0 = np.zeros(sys.n_states)
    m = sys.basis.m
    phi_tip = modal_force_vector(sys.basis)
    if kind == "zero":
        return x0
    if kind == "tip_displacement":
        # quasistatic shape under a tip load, scaled to unit tip displacement
        eta = phi_tip / sys.basis.omega**2
        x0[:m] = eta / np.dot(phi_tip, eta)
        return x0
    if kind == "tip_impulse":
        x0[m:2 * m] = phi_tip
        return x0
    raise ParameterError(f"unknown initial condition {kind!r}")


def _cmd_modes(cfg, outdir):
    basis = modal_basis(cfg.beam_spec(), cfg.n_modes)
    rows = [
        (k, basis.beta_l[k - 1], basis.omega[k - 1], basis.zeta[k - 1], basis.norm[k - 1])
        for k in range(1, basis.m + 1)
    ]
    _write_csv(os.path.join(outdir, "modes.csv"),
               ["mode", "betaL", "omega_rad_s", "zeta", "norm"], rows)
    print(f"wrote {len(rows)} modes to {os.path.join(outdir, 'modes.csv')}")
    return 0


def _cmd_eig(cfg, outdir):
    sol = coupled.eigen(_build_system(cfg))
    rows = [
        (lam.real, lam.imag, sol.freq[j], sol.zeta[j], sol.tags[j])
        for j, lam in enumerate(sol.values)
    ]
    _write_csv(os.path.join(outdir, "eig.csv"),
               ["re", "im", "freq_rad_s", "damping_ratio", "tag"], rows)
    print(f"wrote {len(rows)} eigenvalues to {os.path.join(outdir, 'eig.csv')}")
    return 0


def _cmd_frf(cfg, outdir):
    sys_ = _build_system(cfg)
    omega = np.linspace(0.1 * sys_.basis.omega[0], 1.2 * sys_.basis.omega[-1], 2000)
    table = coupled.frf(sys_, omega)
    rows = list(zip(table.omega, table.magnitude, table.phase))
    _write_csv(os.path.join(outdir, "frf.csv"),
               ["omega_rad_s", "mag_m_per_N", "phase_rad"], rows)
    print(f"wrote {len(rows)} FRF samples to {os.path.join(outdir, 'frf.csv')}")
    return 0


def _cmd_optimize(cfg, outdir):
    sys_ = _build_system(cfg)
    rm = reduction.reduce(sys_, cfg.target_mode)
    tr = reduction.tune(
        rm if not cfg.per_branch else sys_,
        cfg.objective,
        target_mode=cfg.target_mode,
        bounds=_bounds(cfg),
        per_branch=cfg.per_branch,
    )
    rows = [
        (j + 1, s.r0, s.l0, s.r_opt, s.l_opt, s.seed_objective, s.objective,
         s.iterations, int(s.converged))
        for j, s in enumerate(tr.starts)
    ]
    _write_csv(os.path.join(outdir, "optimize_trace.csv"),
               ["start", "R0", "L0", "R_opt", "L_opt", "seed_objective",
                "objective", "iterations", "converged"], rows)
    print(f"objective        = {cfg.objective}")
    print(f"target mode      = {cfg.target_mode}  (kappa = {_fmt(rm.kappa)})")
    print(f"seed (R, L)      = ({_fmt(tr.seed[0])}, {_fmt(tr.seed[1])})")
    print(f"optimum (R, L)   = ({_fmt(tr.r)}, {_fmt(tr.l)})")
    print(f"achieved value   = {_fmt(tr.objective)}")
    print(f"converged        = {tr.converged}   improving = {tr.improving}")
    if not tr.converged:
        print("warning: no start converged within the iteration cap; best found returned")
    return 0


def _cmd_simulate(cfg, outdir):
    sys_ = _build_system(cfg)
    lam_max = timesim.max_eigen_magnitude(sys_)
    dt = cfg.dt if cfg.dt is not None else 0.8 * timesim.DT_FRACTION * 2.0 * np.pi / lam_max
    t_final = cfg.t_final if cfg.t_final is not None else 20.0 * 2.0 * np.pi / sys_.basis.omega[0]
    x0 = _initial_state(sys_, cfg.initial)
    traj = timesim.integrate(sys_, x0, None, dt, t_final)
    tip = traj.states @ sys_.output_map
    h, _ = timesim.energy_history(sys_, traj)
    rows = list(zip(traj.times, tip, h))
    _write_csv(os.path.join(outdir, "trajectory.csv"),
               ["t_s", "tip_m", "energy_J"], rows)
    resid = timesim.energy_residual(sys_, traj)
    print(f"wrote {len(rows)} samples to {os.path.join(outdir, 'trajectory.csv')}")
    print(f"energy_residual = {_fmt(resid)}")
    return 0


def _compare_row(cfg, topology):
    sub = ScenarioConfig(**{**cfg.__dict__, "topology": topology, "netlist_path": None})
    sys_ = _build_system(sub)
    rm = reduction.reduce(sys_, cfg.target_mode)
    bounds = _bounds(cfg)

    tr = reduction.tune(rm, "min-damping-ratio", target_mode=cfg.target_mode, bounds=bounds)
    report = reduction.validate_reduction(sys_, rm, tr)

    tr_hinf = reduction.tune(rm, "hinf", target_mode=cfg.target_mode, bounds=bounds)
    scaled = sys_.rescaled(tr_hinf.r, tr_hinf.l)
    omega_t = rm.omega_m
    grid = np.linspace(reduction.HINF_GRID_FACTORS[0] * omega_t,
                       reduction.HINF_GRID_FACTORS[1] * omega_t,
                       reduction.HINF_GRID_POINTS)
    peak = float(np.max(coupled.frf(scaled, grid).magnitude))

    warn = []
    if not tr.converged:
        warn.append(f"{topology}: min-damping-ratio tuning did not converge")
    if not tr_hinf.converged:
        warn.append(f"{topology}: hinf tuning did not converge")
    row = (
        topology, rm.kappa, tr.r, tr.l, tr.objective, report.full_objective,
        report.pole_error, tr_hinf.r, tr_hinf.l, peak,
        int(tr.converged), int(tr_hinf.converged),
    )
    return row, warn


def _cmd_compare(cfg, outdir):
    header = [
        "topology", "kappa", "R_opt", "L_opt", "reduced_objective",
        "full_objective", "pole_error", "hinf_R_opt", "hinf_L_opt",
        "hinf_peak_m_per_N", "mindr_converged", "hinf_converged",
    ]
    rows = []
    warnings = []
    for topology in ("single_shunt", "multi_shunt", "transmission_line"):
        row, warn = _compare_row(cfg, topology)
        rows.append(row)
        warnings.extend(warn)
    _write_csv(os.path.join(outdir, "compare.csv"), header, rows)
    print(f"wrote comparison for {len(rows)} topologies to {os.path.join(outdir, 'compare.csv')}")
    for row in rows:
        print(
            f"{row[0]}: kappa = {_fmt(row[1])}, min damping ratio (full) = {_fmt(row[5])}, "
            f"hinf peak = {_fmt(row[9])} m/N"
        )
    for message in warnings:
        print(f"warning: {message}")
    return 0


_COMMANDS = {
    "modes": _cmd_modes,
    "eig": _cmd_eig,
    "frf": _cmd_frf,
    "optimize": _cmd_optimize,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
}


def _parser():
    parser = argparse.ArgumentParser(
        prog="piezoshunt",
        description="Passive electric damping of a cantilever beam by piezo RL networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="scenario configuration file")
        p.add_argument("--out", help="output directory (overrides [output] dir)")
        p.add_argument("--topology", choices=("single_shunt", "multi_shunt", "transmission_line"),
                       help="override the network topology")
        p.add_argument("--netlist", help="netlist file overriding the topology")
    return parser


def run_command(argv):
    """Run one subcommand; returns 0 on success, 1 on validation error, 2 on numerical error."""
    args = _parser().parse_args(argv)
    try:
        if args.config is not None:
            with open(args.config) as fh:
                cfg = load_config(fh.read())
        else:
            cfg = load_config("")
        if args.topology is not None:
            cfg.topology = args.topology
            cfg.netlist_path = None
        if args.netlist is not None:
            cfg.netlist_path = args.netlist
        outdir = args.out if args.out is not None else cfg.outdir
        os.makedirs(outdir, exist_ok=True)
        return _COMMANDS[args.command](cfg, outdir)
    except ParameterError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=_sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1


def console_main():
    raise SystemExit(run_command(_sys.argv[1:]))
