"""Coupled electromechanical model: assembly, eigenstructure, FRF, energy.

State layout x = (eta, eta_dot, v, i) with M modal coordinates, P node
voltages and B branch currents.  The governing equations are

    eta_k'' = -2 zeta_k w_k eta_k' - w_k^2 eta_k + sum_p Thetat[k,p] v_p + f_k
    C v'    = -Thetat^T eta' - B_inc i
    L_b i'  = B_inc^T v - R_b i

where Thetat accumulates the patch coupling columns onto their attached
nodes.  The signs are the unique energy-consistent choice: with

    H = 1/2 (|eta'|^2 + sum w_k^2 eta_k^2) + 1/2 v^T C v + 1/2 i^T L_b i

they satisfy dH/dt = eta'^T f - P_diss, P_diss = sum 2 zeta w eta'^2 + i^T R i >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beam import modal_force_vector
from .circuits import network_matrices
from .errors import NumericalError, ParameterError
from .patches import coupling_matrix

#: Relative magnitude below which an eigenvalue is tagged as a zero/rigid mode.
ZERO_MODE_RTOL = 1e-9


@dataclass
class CoupledSystem:
    """Assembled beam + patch array + RL network model.

    The system is immutable after assembly; `rescaled` returns a copy with
    branch parameters R_b = rbar * s_shape, L_b = lbar * s_shape, where
    s_shape is the branch inductance pattern normalized by the first branch.
    """

    basis: object
    patches: object
    net: object
    nm: object
    theta: np.ndarray        # M x N patch coupling
    theta_tilde: np.ndarray  # M x P node-accumulated coupling
    cap: np.ndarray          # P node capacitances
    x_force: float
    x_out: float
    _a: np.ndarray = field(default=None, repr=False)

    @property
    def n_states(self):
        return 2 * self.basis.m + self.nm.n_nodes + self.nm.n_branches

    @property
    def s_shape(self):
        """Branch inductance pattern with the first branch normalized to 1."""
        return self.nm.l_b / self.nm.l_b[0]

    @property
    def force_map(self):
        """Input vector b: tip force enters the modal acceleration rows."""
        m, p, bcount = self.basis.m, self.nm.n_nodes, self.nm.n_branches
        b = np.zeros(2 * m + p + bcount)
        b[m:2 * m] = modal_force_vector(self.basis, self.x_force)
        return b

    @property
    def output_map(self):
        """Output vector c: transverse displacement at the observation point."""
        m, p, bcount = self.basis.m, self.nm.n_nodes, self.nm.n_branches
        c = np.zeros(2 * m + p + bcount)
        c[:m] = modal_force_vector(self.basis, self.x_out)
        return c

    def rescaled(self, rbar, lbar):
        """Copy of the system with R_b = rbar*s_shape, L_b = lbar*s_shape."""
        return self.with_branch_values(rbar * self.s_shape, lbar * self.s_shape)

    def with_branch_values(self, r_b, l_b):
        """Copy of the system with explicit per-branch (R, L) vectors."""
        r_b = np.broadcast_to(np.asarray(r_b, dtype=float), (self.nm.n_branches,)).copy()
        l_b = np.broadcast_to(np.asarray(l_b, dtype=float), (self.nm.n_branches,)).copy()
        if np.any(l_b <= 0) or np.any(r_b < 0):
            raise ParameterError("branch rescaling needs L > 0 and R >= 0")
        nm = type(self.nm)(
            node_names=self.nm.node_names,
            branch_names=self.nm.branch_names,
            b_inc=self.nm.b_inc,
            r_b=r_b,
            l_b=l_b,
        )
        return CoupledSystem(
            basis=self.basis,
            patches=self.patches,
            net=self.net,
            nm=nm,
            theta=self.theta,
            theta_tilde=self.theta_tilde,
            cap=self.cap,
            x_force=self.x_force,
            x_out=self.x_out,
        )


def assemble(basis, patches, net, x_force=None, x_out=None):
    """Assemble the coupled model from a modal basis, patch array and netlist."""
    n = patches.n
    nm = network_matrices(net, n)
    theta = coupling_matrix(basis, patches)

    node_index = {name: p for p, name in enumerate(nm.node_names)}
    theta_tilde = np.zeros((basis.m, nm.n_nodes))
    cap = np.zeros(nm.n_nodes)
    for idx, node in net.piezo.items():
        p = node_index[node]
        theta_tilde[:, p] += theta[:, idx - 1]
        cap[p] += patches.cp[idx - 1]

    length = basis.beam.length
    return CoupledSystem(
        basis=basis,
        patches=patches,
        net=net,
        nm=nm,
        theta=theta,
        theta_tilde=theta_tilde,
        cap=cap,
        x_force=length if x_force is None else float(x_force),
        x_out=length if x_out is None else float(x_out),
    )


def state_matrix(sys):
    """First-order state matrix A of x' = A x + b u."""
    if sys._a is not None:
        return sys._a
    m, p, bn = sys.basis.m, sys.nm.n_nodes, sys.nm.n_branches
    n = 2 * m + p + bn
    a = np.zeros((n, n))
    sl_eta = slice(0, m)
    sl_vel = slice(m, 2 * m)
    sl_v = slice(2 * m, 2 * m + p)
    sl_i = slice(2 * m + p, n)

    a[sl_eta, sl_vel] = np.eye(m)
    a[sl_vel, sl_eta] = -np.diag(sys.basis.omega**2)
    a[sl_vel, sl_vel] = -np.diag(2.0 * sys.basis.zeta * sys.basis.omega)
    a[sl_vel, sl_v] = sys.theta_tilde
    a[sl_v, sl_vel] = -sys.theta_tilde.T / sys.cap[:, None]
    a[sl_v, sl_i] = -sys.nm.b_inc / sys.cap[:, None]
    a[sl_i, sl_v] = sys.nm.b_inc.T / sys.nm.l_b[:, None]
    a[sl_i, sl_i] = -np.diag(sys.nm.r_b / sys.nm.l_b)
    sys._a = a
    return a


@dataclass(frozen=True)
class EigenSolution:
    """Eigenvalues with per-mode frequency, damping ratio and dominance tag."""

    values: np.ndarray   # complex, conjugate-closed, sorted by (|lambda|, -Im)
    vectors: np.ndarray  # columns aligned with values
    freq: np.ndarray     # |lambda| in rad/s
    zeta: np.ndarray     # -Re(lambda)/|lambda| (0 for zero modes)
    tags: tuple[str, ...]  # "mechanical" | "electrical" | "zero"


def eigen(sys):
    """Complex eigenstructure of the assembled system."""
    a = state_matrix(sys)
    try:
        values, vectors = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigensolver failed on {a.shape[0]}x{a.shape[0]} state matrix "
            f"(1-norm {np.linalg.norm(a, 1):.3e})"
        ) from exc

    values = _enforce_conjugate_pairs(values)
    order = np.lexsort((values.real, -values.imag, np.abs(values)))
    values = values[order]
    vectors = vectors[:, order]

    scale = np.max(np.abs(values))
    freq = np.abs(values)
    with np.errstate(invalid="ignore", divide="ignore"):
        zeta = np.where(freq > 0, -values.real / np.where(freq > 0, freq, 1.0), 0.0)

    m, p = sys.basis.m, sys.nm.n_nodes
    tags = []
    for j, lam in enumerate(values):
        if freq[j] < ZERO_MODE_RTOL * scale:
            tags.append("zero")
            continue
        w = vectors[:, j]
        eta, vel = w[:m], w[m:2 * m]
        v, cur = w[2 * m:2 * m + p], w[2 * m + p:]
        mech = 0.5 * (np.sum(np.abs(vel) ** 2) + np.sum(sys.basis.omega**2 * np.abs(eta) ** 2))
        elec = 0.5 * (np.sum(sys.cap * np.abs(v) ** 2) + np.sum(sys.nm.l_b * np.abs(cur) ** 2))
        tags.append("mechanical" if mech > elec else "electrical")

    return EigenSolution(values=values, vectors=vectors, freq=freq, zeta=zeta, tags=tuple(tags))


def _enforce_conjugate_pairs(values, rtol=1e-8):
    """Symmetrize eigenvalues into exact conjugate pairs (matched within rtol)."""
    vals = values.copy()
    scale = max(np.max(np.abs(vals)), 1e-300)
    tol = rtol * scale
    used = np.zeros(len(vals), dtype=bool)
    order = np.lexsort((vals.imag, vals.real, np.abs(vals)))
    for i in order:
        if used[i]:
            continue
        used[i] = True
        if abs(vals[i].imag) <= tol:
            vals[i] = complex(vals[i].real, vals[i].imag)
            continue
        target = np.conj(vals[i])
        best, best_dist = -1, np.inf
        for j in range(len(vals)):
            if used[j] or vals[j].imag * vals[i].imag >= 0:
                continue
            dist = abs(vals[j] - target)
            if dist < best_dist:
                best, best_dist = j, dist
        if best >= 0 and best_dist <= tol:
            used[best] = True
            re = 0.5 * (vals[i].real + vals[best].real)
            im = 0.5 * (abs(vals[i].imag) + abs(vals[best].imag))
            sign = 1.0 if vals[i].imag > 0 else -1.0
            vals[i] = complex(re, sign * im)
            vals[best] = complex(re, -sign * im)
    return vals


@dataclass(frozen=True)
class FRFTable:
    """Force-to-displacement transfer samples on a positive frequency grid."""

    omega: np.ndarray
    g: np.ndarray          # complex G(j omega)
    pole: np.ndarray       # True where j*omega hit an undamped eigenvalue

    @property
    def magnitude(self):
        return np.abs(self.g)

    @property
    def phase(self):
        return np.angle(self.g)


def _frf_values(a, b, c, omega):
    """Sample c^T (j w I - a)^-1 b on the grid, flagging singular points."""
    n = a.shape[0]
    eye = np.eye(n)
    g = np.empty(len(omega), dtype=complex)
    pole = np.zeros(len(omega), dtype=bool)
    for idx, w in enumerate(omega):
        try:
            x = np.linalg.solve(1j * w * eye - a, b)
            val = c @ x
        except np.linalg.LinAlgError:
            val = complex(np.inf, 0.0)
        if not np.isfinite(val.real) or not np.isfinite(val.imag):
            pole[idx] = True
            val = complex(np.inf, 0.0)
        g[idx] = val
    return g, pole


def frf(sys, omega):
    """Frequency response from the force input to the displacement output."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ParameterError("FRF grid must contain positive frequencies only")
    g, pole = _frf_values(state_matrix(sys), sys.force_map, sys.output_map, omega)
    return FRFTable(omega=omega, g=g, pole=pole)


def total_energy(sys, x):
    """(H, P_diss): stored energy and dissipated power at state `x`."""
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.n_states,):
        raise ParameterError(f"state vector must have length {sys.n_states}, got {x.shape}")
    m, p = sys.basis.m, sys.nm.n_nodes
    eta, vel = x[:m], x[m:2 * m]
    v, cur = x[2 * m:2 * m + p], x[2 * m + p:]
    h = 0.5 * (
        np.sum(vel**2)
        + np.sum(sys.basis.omega**2 * eta**2)
        + np.sum(sys.cap * v**2)
        + np.sum(sys.nm.l_b * cur**2)
    )
    p_diss = np.sum(2.0 * sys.basis.zeta * sys.basis.omega * vel**2) + np.sum(sys.nm.r_b * cur**2)
    return float(h), float(p_diss)
