import logging
import time

import numpy as np
from scipy.integrate import solve_ivp

from agents.peakon_field import energy_E, eval_field, eval_field_deriv, functional_F
from agents.validators import PeakonValidator, SettingsValidator
from globals.constants import LOGGER_NAME
from globals.errors import CollisionDetectedError, StepSizeUnderflowError
from globals.types import (
    EnergyPair, FloatArray, IntegratorSettings, OdeState, PeakonConfig, Trajectory)

logger = logging.getLogger(LOGGER_NAME)


def ode_rhs(cfg: PeakonConfig) -> tuple[FloatArray, FloatArray]:
    """
    Evaluates the multipeakon vector field in factored form: dq_i = u(q_i)^2 and
    dp_i = -p_i*u(q_i)*u_x(q_i), with sgn(0) = 0 for the self-interaction.

    Args:
        cfg (PeakonConfig): Current positions and amplitudes.

    Returns:
        tuple[FloatArray, FloatArray]: Time derivatives of q and p.
    """
    u = eval_field(cfg, cfg.q)
    ux = eval_field_deriv(cfg, cfg.q)
    return u**2, -cfg.p*u*ux


def _flat_rhs(_: float, y: FloatArray) -> FloatArray:
    n = len(y)//2
    dq, dp = ode_rhs(PeakonConfig(y[:n], y[n:]))
    return np.concatenate([dq, dp])


def _closest_pair(q: FloatArray) -> tuple[int, int]:
    gaps = np.abs(np.subtract.outer(q, q)) + np.diag(np.full(len(q), np.inf))
    i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
    return int(min(i, j)), int(max(i, j))


def _collision_event(collision_gap: float):
    def event(_: float, y: FloatArray) -> float:
        q = y[:len(y)//2]
        gaps = np.abs(np.subtract.outer(q, q))[np.triu_indices(len(q), k=1)]
        return float(np.min(gaps) - collision_gap)
    event.terminal = True
    event.direction = -1
    return event


def sample_times(t_start: float, t_end: float, sample_dt: float) -> FloatArray:
    """
    Generates output times from t_start towards t_end at a fixed cadence, always ending
    exactly at t_end.

    Args:
        t_start (float): Initial time.
        t_end (float): Final time, before or after t_start.
        sample_dt (float): Positive cadence.

    Returns:
        FloatArray: Strictly monotone output times.
    """
    span = t_end - t_start
    count = int(np.floor(abs(span)/sample_dt + 1e-9))
    times = t_start + np.sign(span)*sample_dt*np.arange(count + 1)
    if abs(times[-1] - t_end) > 1e-9*max(1.0, abs(t_end)):
        times = np.append(times, t_end)
    else:
        times[-1] = t_end
    return times


def diagnose(cfg: PeakonConfig) -> EnergyPair:
    return EnergyPair(energy_E(cfg), functional_F(cfg))


def integrate(start: OdeState, t_end: float, settings: IntegratorSettings) -> Trajectory:
    """
    Integrates the multipeakon system with the embedded Dormand-Prince 5(4) pair, sampled
    at the configured cadence. The integration runs backward when t_end < start.t.

    Args:
        start (OdeState): Initial time and configuration.
        t_end (float): Final time.
        settings (IntegratorSettings): Tolerances, step limit, collision gap and cadence.

    Raises:
        CollisionDetectedError: If two positions come closer than the collision gap.
        StepSizeUnderflowError: If the adaptive step control stalls.

    Returns:
        Trajectory: Sampled states, each with its E and F values.
    """
    PeakonValidator.validate_config(start.cfg)
    SettingsValidator.validate_integrator(settings)
    n = start.cfg.n
    y0 = np.concatenate([start.cfg.q, start.cfg.p])
    if t_end == start.t:
        return Trajectory([start], [diagnose(start.cfg)])

    t_eval = sample_times(start.t, t_end, settings.sample_dt)
    events = [_collision_event(settings.collision_gap)] if n > 1 else None
    start_time = time.perf_counter()
    solution = solve_ivp(
        _flat_rhs, (start.t, t_end), y0, method="RK45", t_eval=t_eval, events=events,
        rtol=settings.rtol, atol=settings.atol, max_step=settings.max_step)

    if solution.status == 1:
        t_hit = float(solution.t_events[0][0])
        i, j = _closest_pair(solution.y_events[0][0][:n])
        logger.error(f"Integration stopped by a collision of peakons {i} and {j}")
        raise CollisionDetectedError(t_hit, i, j)
    if not solution.success:
        t_stall = float(solution.t[-1]) if solution.t.size else start.t
        raise StepSizeUnderflowError(t_stall, solution.message)

    samples = [
        OdeState(float(t), PeakonConfig(y[:n].copy(), y[n:].copy()))
        for t, y in zip(solution.t, solution.y.T)
    ]
    logger.debug(
        f"Integrated {n} peakon(s) from t={start.t:g} to t={t_end:g} with "
        f"{solution.nfev} evaluations in {time.perf_counter() - start_time:.2f}s")
    return Trajectory(samples, [diagnose(state.cfg) for state in samples])


def relative_drifts(traj: Trajectory) -> tuple[FloatArray, FloatArray]:
    """
    Computes the per-sample deviation of E and F from their initial values, relative to
    the initial magnitude (absolute when the initial value is zero).

    Args:
        traj (Trajectory): Sampled trajectory.

    Returns:
        tuple[FloatArray, FloatArray]: Drift series of E and F.
    """
    drifts = []
    for series in (traj.energies, traj.functionals):
        scale = abs(series[0]) if series[0] != 0 else 1.0
        drifts.append(np.abs(series - series[0])/scale)
    return drifts[0], drifts[1]


def conservation_report(traj: Trajectory) -> tuple[float, float]:
    """Maximum relative drift of E and F over a trajectory."""
    drift_e, drift_f = relative_drifts(traj)
    return float(np.max(drift_e)), float(np.max(drift_f))


def minimum_separation(traj: Trajectory) -> float:
    """Smallest gap between consecutive positions over all samples."""
    positions = traj.positions
    if positions.shape[1] < 2:
        return float("inf")
    return float(np.min(np.diff(positions, axis=1)))


def reflect(cfg: PeakonConfig) -> PeakonConfig:
    """Image of a configuration under x -> -x, keeping positions ascending."""
    return PeakonConfig(-cfg.q[::-1], cfg.p[::-1])
