import numpy as np
import pytest
import scipy.linalg

import piezoshunt as ps
from piezoshunt.coupled import eigen, state_matrix
from piezoshunt.errors import NumericalError, ParameterError
from piezoshunt.timesim import (
    decay_rate,
    energy_history,
    energy_residual,
    integrate,
    max_eigen_magnitude,
)


@pytest.fixture(scope="module")
def lossless_m1(unit_beam):
    """Single-mode single shunt, R = 0, electrical branch matched to mode 1."""
    from conftest import make_benchmark
    sys_ = make_benchmark(unit_beam, 1, 1)
    l_matched = (1.0 / sys_.patches.cp[0]) / sys_.basis.omega[0] ** 2
    return sys_.rescaled(0.0, l_matched)


def _period(sys_):
    return 2.0 * np.pi / sys_.basis.omega[0]


def test_zero_state_stays_zero(lossless_m1):
    traj = integrate(lossless_m1, np.zeros(4), None, _period(lossless_m1) / 200, 2.0)
    assert np.all(traj.states == 0.0)


def test_time_step_precondition_cites_bound(lossless_m1):
    with pytest.raises(ParameterError, match="spectral bound"):
        integrate(lossless_m1, np.zeros(4), None, _period(lossless_m1), 2.0)


def test_divergence_reports_first_bad_sample(lossless_m1):
    dt = _period(lossless_m1) / 200
    with pytest.raises(NumericalError, match="sample"):
        integrate(lossless_m1, np.zeros(4), lambda t: 1e305, dt, 50 * dt)


def test_lossless_energy_drift(lossless_m1):
    period = _period(lossless_m1)
    x0 = np.zeros(4)
    x0[0] = 1.0
    traj = integrate(lossless_m1, x0, None, period / 200, 100 * period)
    h, _ = energy_history(lossless_m1, traj)
    assert abs(h[-1] - h[0]) / h[0] < 1e-6


def test_energy_drift_halving_factor_is_fifth_order(lossless_m1):
    # secular energy error of classical RK4 on a lossless linear system comes
    # from |R(i theta)|^2 = 1 - theta^6/72: fifth order globally, so halving
    # dt divides the drift by ~32 (not the generic fourth-order 16)
    period = _period(lossless_m1)
    x0 = np.zeros(4)
    x0[0] = 1.0
    drifts = []
    for div in (200, 400):
        traj = integrate(lossless_m1, x0, None, period / div, 100 * period)
        h, _ = energy_history(lossless_m1, traj)
        drifts.append(abs(h[-1] - h[0]) / h[0])
    assert drifts[0] / drifts[1] == pytest.approx(32.0, rel=0.1)


def test_trajectory_error_fourth_order_under_halving(lossless_m1):
    period = _period(lossless_m1)
    x0 = np.zeros(4)
    x0[0] = 1.0
    a = state_matrix(lossless_m1)
    errors = []
    for div in (400, 800):
        traj = integrate(lossless_m1, x0, None, period / div, 10 * period)
        exact = scipy.linalg.expm(a * traj.times[-1]) @ x0
        errors.append(np.linalg.norm(traj.states[-1] - exact) / np.linalg.norm(exact))
    assert 12.0 <= errors[0] / errors[1] <= 20.0


def test_energy_residual_zero_trajectory(lossless_m1):
    traj = integrate(lossless_m1, np.zeros(4), None, _period(lossless_m1) / 200, 1.0)
    assert energy_residual(lossless_m1, traj) == 0.0


def test_energy_residual_lossless(lossless_m1):
    x0 = np.zeros(4)
    x0[0] = 1.0
    traj = integrate(lossless_m1, x0, None, _period(lossless_m1) / 200, 20 * _period(lossless_m1))
    assert energy_residual(lossless_m1, traj) < 1e-6


def test_energy_residual_needs_three_samples(lossless_m1):
    dt = _period(lossless_m1) / 200
    traj = integrate(lossless_m1, np.zeros(4), None, dt, dt)
    with pytest.raises(ParameterError):
        energy_residual(lossless_m1, traj)


def test_energy_never_increases_with_damping(bench_m5):
    sys_ = bench_m5.rescaled(5e4, 1.6e5)
    rng = np.random.default_rng(11)
    x0 = rng.standard_normal(sys_.n_states)
    dt = 0.5 * 0.05 * 2 * np.pi / max_eigen_magnitude(sys_)
    traj = integrate(sys_, x0, None, dt, 5 * _period(sys_))
    h, _ = energy_history(sys_, traj)
    tol = 1e-9 * h[0]
    assert np.all(np.diff(h) <= tol)


def test_decay_rate_matches_dominant_eigenvalue(bench_m5):
    rm = ps.reduce(bench_m5, 1)
    tr = ps.tune(rm, "min-damping-ratio")
    sys_ = bench_m5.rescaled(tr.r, tr.l)
    sol = eigen(sys_)
    # least-damped in-band pair dominates the late-time response
    w1 = sys_.basis.omega[0]
    candidates = [
        (v, j) for j, v in enumerate(sol.values)
        if v.imag > 0 and 0.5 * w1 <= abs(v) <= 2.0 * w1
    ]
    lam, j = max(candidates, key=lambda item: item[0].real)
    x0 = np.real(sol.vectors[:, j])
    x0 /= np.linalg.norm(x0)
    dt = 0.5 * 0.05 * 2 * np.pi / max_eigen_magnitude(sys_)
    traj = integrate(sys_, x0, None, dt, 20 * 2 * np.pi / w1)
    tip = traj.states @ sys_.output_map
    fitted = decay_rate(traj.times, tip)
    assert fitted == pytest.approx(-lam.real, rel=0.05)


def test_decay_rate_needs_enough_peaks():
    with pytest.raises(ParameterError):
        decay_rate(np.linspace(0, 1, 50), np.exp(-np.linspace(0, 1, 50)))


def test_forced_response_grows_from_rest(lossless_m1):
    w1 = lossless_m1.basis.omega[0]
    dt = _period(lossless_m1) / 200
    traj = integrate(lossless_m1, np.zeros(4), lambda t: np.sin(w1 * t), dt, 5 * _period(lossless_m1))
    tip = traj.states @ lossless_m1.output_map
    assert np.max(np.abs(tip)) > 0.0
    assert np.all(np.isfinite(traj.states))
