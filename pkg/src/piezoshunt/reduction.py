"""Two-DOF reduction of the coupled model and electrical-parameter tuning.

The reduction keeps one mechanical mode and one electrical network mode.
Electrical modes are defined by the topology alone: writing the branch
inductances as L_b = lbar * s_shape with a fixed shape diagonal, the
generalized eigenproblem

    B_inc s_shape^-1 B_inc^T u = mu C u,      u^T C u = 1

yields tuning-independent voltage shapes whose resonances are
w_e = sqrt(mu / lbar).  Projecting onto the target mechanical mode k and the
max-coupling shape u* gives the two-DOF absorber model

    eta'' = -2 zm wm eta' - wm^2 eta + alpha vbar + f
    vbar' = -alpha eta' - ibar
    ibar' = (mu*/lbar) vbar - (rbar/lbar) ibar

with dimensionless coupling kappa = |alpha| / wm.  Tuning maximizes either
the minimum damping ratio over a band around the target mode (pole
placement) or the negated FRF peak (hinf), via multi-start Nelder-Mead in
(log rbar, log lbar).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .beam import eval_mode
from .coupled import ZERO_MODE_RTOL, _frf_values, eigen, state_matrix
from .errors import NumericalError, ParameterError

#: Default tuning band around the target mode for the pole-placement objective.
BAND_FACTORS = (0.5, 2.0)

#: Default hinf grid: linear samples over [0.5, 1.6] * target frequency.
HINF_GRID_FACTORS = (0.5, 1.6)
HINF_GRID_POINTS = 400

#: Default log-space search box, multiplicative around the seed.
BOUNDS_FACTORS_R = (1e-2, 1e6)
BOUNDS_FACTORS_L = (1e-4, 1e4)


@dataclass(frozen=True)
class ElectricalModeSet:
    """C-orthonormal standing-wave modes of the bare network."""

    mu: np.ndarray      # generalized eigenvalues, ascending, >= 0
    shapes: np.ndarray  # P x K, column j normalized to u^T C u = 1
    cap: np.ndarray     # node capacitances used for normalization


def electrical_modes(nm, cap):
    """Solve B s^-1 B^T u = mu C u for the network's voltage mode shapes.

    `cap` is the capacitance metric: a vector of node capacitances or a full
    symmetric positive-definite matrix.
    """
    cap = np.asarray(cap, dtype=float)
    c_mat = np.diag(cap) if cap.ndim == 1 else cap
    if np.any(np.linalg.eigvalsh(c_mat) <= 0):
        raise ParameterError("node capacitances must be positive definite")
    s_shape = nm.l_b / nm.l_b[0]
    k_e = nm.b_inc @ np.diag(1.0 / s_shape) @ nm.b_inc.T
    try:
        mu, shapes = scipy.linalg.eigh(k_e, c_mat)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError("electrical eigenproblem failed") from exc
    mu = np.where(np.abs(mu) < 1e-12 * max(np.max(np.abs(mu)), 1e-300), 0.0, mu)
    if np.any(mu < 0):
        raise NumericalError(f"negative electrical eigenvalue {mu.min():.3e}")
    # canonical sign: largest-magnitude component positive
    for j in range(shapes.shape[1]):
        pivot = np.argmax(np.abs(shapes[:, j]))
        if shapes[pivot, j] < 0:
            shapes[:, j] = -shapes[:, j]
    return ElectricalModeSet(mu=mu, shapes=shapes, cap=cap)


@dataclass(frozen=True)
class ReducedModel:
    """Two-DOF electromechanical absorber model around one beam mode."""

    target_mode: int
    omega_m: float
    zeta_m: float
    u_star: np.ndarray
    mu_star: float
    alpha: float      # modal coupling, >= 0 by shape-sign convention
    kappa: float      # alpha / omega_m
    in_gain: float    # phi_k at the force location
    out_gain: float   # phi_k at the observation location

    def a_matrix(self, rbar, lbar):
        """State matrix of (eta, eta', vbar, ibar) at branch scales (rbar, lbar)."""
        if lbar <= 0:
            raise ParameterError(f"inductance scale must be positive, got {lbar}")
        w, z, al = self.omega_m, self.zeta_m, self.alpha
        return np.array(
            [
                [0.0, 1.0, 0.0, 0.0],
                [-w * w, -2.0 * z * w, al, 0.0],
                [0.0, -al, 0.0, -1.0],
                [0.0, 0.0, self.mu_star / lbar, -rbar / lbar],
            ]
        )

    @property
    def force_map(self):
        return np.array([0.0, self.in_gain, 0.0, 0.0])

    @property
    def output_map(self):
        return np.array([self.out_gain, 0.0, 0.0, 0.0])


def reduce(sys, target_mode=1, rule="max-coupling"):
    """Project the coupled system onto mode `target_mode` and one network mode.

    The electrical shape is chosen to maximize the modal coupling
    |Thetat[k,:] u| over the non-zero electrical modes; within a degenerate
    eigenvalue group the coupling row is projected onto the eigenspace, which
    makes the choice deterministic.

    The truncated mechanical modes respond quasi-statically to the node
    voltages, loading the network with the extra capacitance
    sum_{j != k} Thetat[j]^T Thetat[j] / w_j^2.  That correction is folded
    into the capacitance metric of the electrical eigenproblem; without it
    the reduced-model optimum sits measurably off the complete model's
    optimum.  For a single retained mode the correction vanishes and the
    reduction is exact.
    """
    if rule != "max-coupling":
        raise ParameterError(f"unknown mode-selection rule {rule!r}")
    if not 1 <= target_mode <= sys.basis.m:
        raise ParameterError(f"target mode must lie in [1, {sys.basis.m}], got {target_mode}")

    c_eff = np.diag(sys.cap).copy()
    for j in range(sys.basis.m):
        if j != target_mode - 1:
            row = sys.theta_tilde[j]
            c_eff += np.outer(row, row) / sys.basis.omega[j] ** 2
    ems = electrical_modes(sys.nm, c_eff)
    mu_max = max(np.max(ems.mu), 1e-300)
    nonzero = np.nonzero(ems.mu >= 1e-12 * mu_max)[0]
    if nonzero.size == 0:
        raise ParameterError("all electrical modes are zero modes; reduction impossible")

    theta_row = sys.theta_tilde[target_mode - 1]
    # group degenerate eigenvalues so the selection is basis independent
    groups = []
    current = [nonzero[0]]
    for j in nonzero[1:]:
        if ems.mu[j] - ems.mu[current[-1]] <= 1e-9 * mu_max:
            current.append(j)
        else:
            groups.append(current)
            current = [j]
    groups.append(current)

    best = None
    for group in groups:
        u_basis = ems.shapes[:, group]
        t = u_basis.T @ theta_row
        strength = float(np.linalg.norm(t))
        if strength > 0:
            u = u_basis @ (t / strength)
        else:
            u = u_basis[:, 0]
        mu_g = float(np.mean(ems.mu[group]))
        if best is None or strength > best[0] + 1e-15 * abs(best[0]):
            best = (strength, mu_g, u)

    alpha, mu_star, u_star = best
    omega_m = float(sys.basis.omega[target_mode - 1])
    length = sys.basis.beam.length
    return ReducedModel(
        target_mode=target_mode,
        omega_m=omega_m,
        zeta_m=float(sys.basis.zeta[target_mode - 1]),
        u_star=u_star,
        mu_star=mu_star,
        alpha=alpha,
        kappa=alpha / omega_m,
        in_gain=eval_mode(sys.basis, target_mode, min(sys.x_force, length)),
        out_gain=eval_mode(sys.basis, target_mode, min(sys.x_out, length)),
    )


def closed_form_seed(rm):
    """Frequency-matching starting point (rbar0, lbar0) for the tuner.

    Places the electrical resonance at w_m * sqrt(1 + kappa^2) and sets the
    electrical loop damping ratio to kappa / sqrt(2).  A heuristic only; the
    numerical optimum from `tune` is authoritative.
    """
    if rm.kappa <= 0:
        raise ParameterError("closed-form seed needs nonzero electromechanical coupling")
    omega_e = rm.omega_m * np.sqrt(1.0 + rm.kappa**2)
    lbar0 = rm.mu_star / omega_e**2
    rbar0 = np.sqrt(2.0) * rm.kappa * lbar0 * omega_e
    return float(rbar0), float(lbar0)


@dataclass(frozen=True)
class StartRecord:
    r0: float
    l0: float
    r_opt: float
    l_opt: float
    objective: float
    seed_objective: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class TuningResult:
    """Optimized branch scales with achieved objective and run provenance."""

    r: float
    l: float
    objective: float
    kind: str
    converged: bool
    improving: bool
    seed: tuple[float, float]
    starts: tuple[StartRecord, ...]
    r_branches: np.ndarray | None = None
    l_branches: np.ndarray | None = None


def _nelder_mead(f, z0, step=0.05, max_iter=500, rel_tol=1e-6):
    """Minimize f over R^d with a plain Nelder-Mead simplex.

    Converges when the simplex diameter drops below rel_tol relative to the
    vertex magnitude, or after max_iter iterations.  Returns
    (z_best, f_best, iterations, converged).
    """
    d = len(z0)
    simplex = [np.asarray(z0, dtype=float)]
    for j in range(d):
        vertex = simplex[0].copy()
        vertex[j] += step
        simplex.append(vertex)
    values = [f(v) for v in simplex]

    iterations = 0
    converged = False
    while iterations < max_iter:
        order = np.argsort(values)
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]

        diameter = max(np.max(np.abs(v - simplex[0])) for v in simplex[1:])
        scale = 1.0 + max(np.max(np.abs(v)) for v in simplex)
        if diameter < rel_tol * scale:
            converged = True
            break

        iterations += 1
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]

        reflected = centroid + (centroid - worst)
        f_r = f(reflected)
        if f_r < values[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            f_e = f(expanded)
            if f_e < f_r:
                simplex[-1], values[-1] = expanded, f_e
            else:
                simplex[-1], values[-1] = reflected, f_r
        elif f_r < values[-2]:
            simplex[-1], values[-1] = reflected, f_r
        else:
            contracted = centroid + 0.5 * (worst - centroid)
            f_c = f(contracted)
            if f_c < values[-1]:
                simplex[-1], values[-1] = contracted, f_c
            else:
                for j in range(1, d + 1):
                    simplex[j] = simplex[0] + 0.5 * (simplex[j] - simplex[0])
                    values[j] = f(simplex[j])

    best = int(np.argmin(values))
    return simplex[best], values[best], iterations, converged


def _min_damping(values, band):
    """Smallest damping ratio over non-zero eigenvalues inside the band."""
    scale = np.max(np.abs(values))
    if scale == 0:
        return -np.inf
    freq = np.abs(values)
    keep = freq >= ZERO_MODE_RTOL * scale
    if band is not None:
        keep &= (freq >= band[0]) & (freq <= band[1])
    keep &= values.imag >= -1e-12 * scale  # one representative per pair
    if not np.any(keep):
        return -np.inf
    return float(np.min(-values[keep].real / freq[keep]))


def _make_evaluator(model, objective, target_mode):
    """Return (evaluate(r, l), omega_target) for a reduced or full model."""
    from .coupled import CoupledSystem  # local to avoid import cycle in docs

    if isinstance(model, ReducedModel):
        rm = model
        omega_t = rm.omega_m
        if objective == "min-damping-ratio":
            def evaluate(r, l):
                return _min_damping(np.linalg.eigvals(rm.a_matrix(r, l)), band=None)
        else:
            grid = np.linspace(HINF_GRID_FACTORS[0] * omega_t, HINF_GRID_FACTORS[1] * omega_t,
                               HINF_GRID_POINTS)
            def evaluate(r, l):
                g, _ = _frf_values(rm.a_matrix(r, l), rm.force_map, rm.output_map, grid)
                peak = np.max(np.abs(g))
                return -float(peak) if np.isfinite(peak) else -np.inf
        return evaluate, omega_t

    if isinstance(model, CoupledSystem):
        sys = model
        omega_t = float(sys.basis.omega[target_mode - 1])
        band = (BAND_FACTORS[0] * omega_t, BAND_FACTORS[1] * omega_t)
        if objective == "min-damping-ratio":
            def evaluate(r, l):
                a = state_matrix(sys.rescaled(r, l))
                return _min_damping(np.linalg.eigvals(a), band=band)
        else:
            grid = np.linspace(HINF_GRID_FACTORS[0] * omega_t, HINF_GRID_FACTORS[1] * omega_t,
                               HINF_GRID_POINTS)
            def evaluate(r, l):
                scaled = sys.rescaled(r, l)
                g, _ = _frf_values(state_matrix(scaled), scaled.force_map,
                                   scaled.output_map, grid)
                peak = np.max(np.abs(g))
                return -float(peak) if np.isfinite(peak) else -np.inf
        return evaluate, omega_t

    raise ParameterError(f"cannot tune a {type(model).__name__}")


def tune(model, objective="min-damping-ratio", *, target_mode=1, seed=None,
         bounds=None, per_branch=False):
    """Optimize (rbar, lbar) by multi-start simplex descent in log space.

    `model` is a ReducedModel or a CoupledSystem (for the latter the target
    mode fixes the evaluation band and the seed comes from its own
    reduction).  The nine starts are the closed-form seed scaled by the 3x3
    factor grid {1/10, 1, 10}^2; the best final objective wins, ties broken
    by lexicographic (rbar, lbar).
    """
    if objective not in ("min-damping-ratio", "hinf"):
        raise ParameterError(f"unknown objective {objective!r}")
    from .coupled import CoupledSystem

    if per_branch:
        if not isinstance(model, CoupledSystem):
            raise ParameterError("per-branch tuning needs the full coupled system")
        return _tune_per_branch(model, objective, target_mode, seed, bounds)

    evaluate, _ = _make_evaluator(model, objective, target_mode)

    if seed is None:
        if isinstance(model, ReducedModel):
            rm = model
        else:
            rm = reduce(model, target_mode)
        seed = closed_form_seed(rm)
    r0, l0 = float(seed[0]), float(seed[1])
    if r0 <= 0 or l0 <= 0:
        raise ParameterError("tuning seed must have positive R and L scales")

    if bounds is None:
        bounds = (
            (BOUNDS_FACTORS_R[0] * r0, BOUNDS_FACTORS_R[1] * r0),
            (BOUNDS_FACTORS_L[0] * l0, BOUNDS_FACTORS_L[1] * l0),
        )
    (r_lo, r_hi), (l_lo, l_hi) = bounds
    lo = np.log10([r_lo, l_lo])
    hi = np.log10([r_hi, l_hi])

    def cost(z):
        if np.any(z < lo) or np.any(z > hi):
            return np.inf
        value = evaluate(10.0 ** z[0], 10.0 ** z[1])
        return -value if np.isfinite(value) else np.inf

    seed_objective = evaluate(r0, l0)
    records = []
    best = None
    for fr in (0.1, 1.0, 10.0):
        for fl in (0.1, 1.0, 10.0):
            z_start = np.log10([r0 * fr, l0 * fl])
            start_obj = evaluate(10.0 ** z_start[0], 10.0 ** z_start[1])
            z_opt, f_opt, iterations, converged = _nelder_mead(cost, z_start)
            obj = -f_opt
            rec = StartRecord(
                r0=10.0 ** z_start[0], l0=10.0 ** z_start[1],
                r_opt=10.0 ** z_opt[0], l_opt=10.0 ** z_opt[1],
                objective=obj, seed_objective=start_obj,
                iterations=iterations, converged=converged,
            )
            records.append(rec)
            key = (-obj, rec.r_opt, rec.l_opt)
            if best is None or key < best[0]:
                best = (key, rec)

    winner = best[1]
    improving = winner.objective > seed_objective + 1e-9 * max(abs(seed_objective), 1e-300)
    return TuningResult(
        r=winner.r_opt, l=winner.l_opt, objective=winner.objective,
        kind=objective, converged=any(r.converged for r in records),
        improving=improving, seed=(r0, l0), starts=tuple(records),
    )


def _tune_per_branch(sys, objective, target_mode, seed, bounds):
    """Independent (R_i, L_i) optimization over all branches (2B parameters)."""
    evaluate_uniform, _ = _make_evaluator(sys, objective, target_mode)
    if seed is None:
        seed = closed_form_seed(reduce(sys, target_mode))
    r0, l0 = float(seed[0]), float(seed[1])
    bn = sys.nm.n_branches
    shape = sys.s_shape

    if bounds is None:
        bounds = (
            (BOUNDS_FACTORS_R[0] * r0, BOUNDS_FACTORS_R[1] * r0),
            (BOUNDS_FACTORS_L[0] * l0, BOUNDS_FACTORS_L[1] * l0),
        )
    (r_lo, r_hi), (l_lo, l_hi) = bounds
    lo = np.concatenate([np.full(bn, np.log10(r_lo * shape.min())),
                         np.full(bn, np.log10(l_lo * shape.min()))])
    hi = np.concatenate([np.full(bn, np.log10(r_hi * shape.max())),
                         np.full(bn, np.log10(l_hi * shape.max()))])

    eval_cache = {}

    def evaluate_vec(r_b, l_b):
        from .coupled import state_matrix as smat
        scaled = sys.with_branch_values(r_b, l_b)
        if objective == "min-damping-ratio":
            omega_t = float(sys.basis.omega[target_mode - 1])
            band = (BAND_FACTORS[0] * omega_t, BAND_FACTORS[1] * omega_t)
            return _min_damping(np.linalg.eigvals(smat(scaled)), band=band)
        omega_t = float(sys.basis.omega[target_mode - 1])
        grid = np.linspace(HINF_GRID_FACTORS[0] * omega_t, HINF_GRID_FACTORS[1] * omega_t,
                           HINF_GRID_POINTS)
        g, _ = _frf_values(smat(scaled), scaled.force_map, scaled.output_map, grid)
        peak = np.max(np.abs(g))
        return -float(peak) if np.isfinite(peak) else -np.inf

    def cost(z):
        if np.any(z < lo) or np.any(z > hi):
            return np.inf
        value = evaluate_vec(10.0 ** z[:bn], 10.0 ** z[bn:])
        return -value if np.isfinite(value) else np.inf

    seed_objective = evaluate_vec(r0 * shape, l0 * shape)
    records = []
    best = None
    for fr in (0.1, 1.0, 10.0):
        for fl in (0.1, 1.0, 10.0):
            z_start = np.concatenate([np.log10(r0 * fr * shape), np.log10(l0 * fl * shape)])
            start_obj = -cost(z_start) if np.isfinite(cost(z_start)) else -np.inf
            z_opt, f_opt, iterations, converged = _nelder_mead(cost, z_start)
            obj = -f_opt
            r_vec, l_vec = 10.0 ** z_opt[:bn], 10.0 ** z_opt[bn:]
            rec = StartRecord(
                r0=r0 * fr, l0=l0 * fl,
                r_opt=float(np.exp(np.mean(np.log(r_vec)))),
                l_opt=float(np.exp(np.mean(np.log(l_vec)))),
                objective=obj, seed_objective=start_obj,
                iterations=iterations, converged=converged,
            )
            records.append((rec, r_vec, l_vec))
            key = (-obj, rec.r_opt, rec.l_opt)
            if best is None or key < best[0]:
                best = (key, rec, r_vec, l_vec)

    _, winner, r_vec, l_vec = best
    improving = winner.objective > seed_objective + 1e-9 * max(abs(seed_objective), 1e-300)
    return TuningResult(
        r=winner.r_opt, l=winner.l_opt, objective=winner.objective,
        kind=objective, converged=any(r.converged for r, _, _ in records),
        improving=improving, seed=(r0, l0),
        starts=tuple(r for r, _, _ in records),
        r_branches=r_vec, l_branches=l_vec,
    )


@dataclass(frozen=True)
class ValidationReport:
    """Reduced-vs-complete model comparison at the tuned parameters."""

    r: float
    l: float
    pole_error: float          # worst relative distance, reduced pair -> full pole
    reduced_objective: float   # band-free min damping ratio of the reduced model
    full_objective: float      # band min damping ratio of the complete model
    retuned_objective: float   # after re-running tune on the complete model
    retune_gap: float          # relative improvement left on the table
    mode_table: tuple[tuple, ...]  # (mode, omega_k, re, im, zeta) per low mode


def validate_reduction(sys, rm, tr):
    """Apply the reduced-model tuning to the complete model and compare."""
    r, l = tr.r, tr.l
    full = sys.rescaled(r, l)
    sol = eigen(full)

    red_vals = np.linalg.eigvals(rm.a_matrix(r, l))
    red_pairs = red_vals[red_vals.imag > 1e-12 * np.max(np.abs(red_vals))]
    pole_error = 0.0
    for lam in red_pairs:
        dist = np.min(np.abs(sol.values - lam))
        pole_error = max(pole_error, float(dist / abs(lam)))

    omega_t = rm.omega_m
    if tr.kind == "min-damping-ratio":
        reduced_objective = _min_damping(red_vals, band=None)
        band = (BAND_FACTORS[0] * omega_t, BAND_FACTORS[1] * omega_t)
        full_objective = _min_damping(sol.values, band=band)
    else:
        grid = np.linspace(HINF_GRID_FACTORS[0] * omega_t, HINF_GRID_FACTORS[1] * omega_t,
                           HINF_GRID_POINTS)
        g_red, _ = _frf_values(rm.a_matrix(r, l), rm.force_map, rm.output_map, grid)
        reduced_objective = -float(np.max(np.abs(g_red)))
        g_full, _ = _frf_values(state_matrix(full), full.force_map, full.output_map, grid)
        full_objective = -float(np.max(np.abs(g_full)))

    retuned = tune(sys, tr.kind, target_mode=rm.target_mode, seed=(r, l))
    denom = max(abs(retuned.objective), 1e-300)
    retune_gap = float((retuned.objective - full_objective) / denom)

    table = []
    for k in range(1, min(3, sys.basis.m) + 1):
        omega_k = float(sys.basis.omega[k - 1])
        upper = sol.values[sol.values.imag >= 0]
        nearest = upper[np.argmin(np.abs(upper - 1j * omega_k))]
        zeta = float(-nearest.real / abs(nearest)) if abs(nearest) > 0 else 0.0
        table.append((k, omega_k, float(nearest.real), float(nearest.imag), zeta))

    return ValidationReport(
        r=r, l=l,
        pole_error=pole_error,
        reduced_objective=reduced_objective,
        full_objective=full_objective,
        retuned_objective=retuned.objective,
        retune_gap=retune_gap,
        mode_table=tuple(table),
    )
