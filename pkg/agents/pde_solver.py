import logging
import time
from dataclasses import replace
from functools import cache

import numpy as np
from scipy.linalg import solve_banded

from agents.kernels import mollified_peakon
from agents.multipeakon_ode import integrate, sample_times
from agents.peakon_field import energy_pair_grid
from agents.validators import GridValidator, PeakonValidator, SettingsValidator
from globals.constants import LOGGER_NAME
from globals.errors import (
    BlowUpError, BoundaryContaminationError, ConfigValidationError, InvalidGridError)
from globals.types import (
    FloatArray, GridField, IntegratorSettings, OdeState, PdeRun, PdeSettings, PeakonConfig)

logger = logging.getLogger(LOGGER_NAME)


@cache
def _cyclic_system(N: int, dx: float) -> tuple[FloatArray, FloatArray, FloatArray]:
    diagonal = 1 + 2/dx**2
    off_diagonal = -1/dx**2
    gamma = -diagonal
    banded = np.zeros((3, N))
    banded[0, 1:] = off_diagonal
    banded[1] = diagonal
    banded[2, :-1] = off_diagonal
    banded[1, 0] -= gamma
    banded[1, -1] -= off_diagonal**2/gamma
    corner = np.zeros(N)
    corner[0], corner[-1] = gamma, off_diagonal
    projection = np.zeros(N)
    projection[0], projection[-1] = 1.0, off_diagonal/gamma
    correction = solve_banded((1, 1), banded, corner)
    correction = correction/(1 + projection @ correction)
    banded.setflags(write=False)
    return banded, correction, projection


def _helmholtz(values: FloatArray, dx: float) -> FloatArray:
    banded, correction, projection = _cyclic_system(values.shape[0], float(dx))
    solution = solve_banded((1, 1), banded, values)
    return solution - np.multiply.outer(correction, projection @ solution)


def helmholtz_solve(f: GridField) -> GridField:
    """
    Solves (1 - d^2/dx^2)w = f on the periodic grid, with the three-point second
    difference. The cyclic tridiagonal system is reduced to a banded one by the
    Sherman-Morrison formula.

    Args:
        f (GridField): Periodic right-hand side.

    Raises:
        InvalidGridError: If the grid is too coarse.

    Returns:
        GridField: Solution w = p * f on the same grid.
    """
    GridValidator.validate_grid(f)
    return GridField(f.x0, f.dx, _helmholtz(np.asarray(f.u, dtype=float), f.dx))


def _centered(values: FloatArray, dx: float) -> FloatArray:
    return (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0))/(2*dx)


def _second_difference(values: FloatArray, dx: float) -> FloatArray:
    return (np.roll(values, -1) - 2*values + np.roll(values, 1))/dx**2


def pde_rhs(u: GridField, viscosity: float = 0.0, frame_speed: float = 0.0) -> GridField:
    """
    Evaluates the right-hand side of the weak form
    u_t = -u^2u_x - d/dx p * (u^3 + (3/2)u u_x^2) - (1/2)p * (u_x^3) + viscosity*u_xx,
    seen from a frame moving right at frame_speed.

    The weak form is evaluated through its momentum equivalent
    u_t = -p * ((u^2 y)_x + u u_x y) with y = u - u_xx, where d/dx is the centered
    difference and u_xx the three-point one. The centered difference is skew and commutes
    with 1 - d^2/dx^2, so the grid energy dx*u.(u - u_xx) is conserved by the exact flow of
    this semi-discretization when viscosity is 0.

    Args:
        u (GridField): Periodic grid field.
        viscosity (float, optional): Artificial diffusion coefficient. Defaults to 0.
        frame_speed (float, optional): Speed of the moving frame. Defaults to 0.

    Returns:
        GridField: Time derivative on the same grid.
    """
    values = np.asarray(u.u, dtype=float)
    dx = u.dx
    ux = _centered(values, dx)
    momentum = values - _second_difference(values, dx)
    forcing = _centered(values**2*momentum, dx) + values*momentum*ux
    rhs = frame_speed*ux - _helmholtz(forcing, dx)
    if viscosity:
        rhs += viscosity*_second_difference(values, dx)
    return GridField(u.x0, dx, rhs)


def mollify_initial(cfg: PeakonConfig, settings: PdeSettings) -> GridField:
    """
    Samples sum_i p_i (rho_n * e^{-|.|})(x - q_i) on the periodic grid over [-X, X).

    Args:
        cfg (PeakonConfig): Initial multipeakon.
        settings (PdeSettings): Grid and mollification settings.

    Returns:
        GridField: Mollified initial data, without a stored derivative.
    """
    x = -settings.half_width + settings.dx*np.arange(settings.N)
    values = np.zeros(settings.N)
    for position, amplitude in zip(cfg.q, cfg.p):
        values += amplitude*mollified_peakon(x - position, settings.mollifier_n)
    return GridField(-settings.half_width, settings.dx, values)


def _rk4_step(
        values: FloatArray,
        dt: float,
        field: GridField,
        viscosity: float,
        frame_speed: float) -> FloatArray:
    def rate(state: FloatArray) -> FloatArray:
        return pde_rhs(GridField(field.x0, field.dx, state), viscosity, frame_speed).u

    k1 = rate(values)
    k2 = rate(values + 0.5*dt*k1)
    k3 = rate(values + 0.5*dt*k2)
    k4 = rate(values + dt*k3)
    return values + dt*(k1 + 2*k2 + 2*k3 + k4)/6


def _check_health(field: GridField, t: float, settings: PdeSettings) -> None:
    if not np.all(np.isfinite(field.u)):
        logger.error(f"Non-finite values in the grid solution at t={t:g}")
        raise BlowUpError(t, float("inf"))
    slope = float(np.max(np.abs(_centered(field.u, field.dx))))
    if slope > settings.slope_ceiling:
        logger.error(f"Slope {slope:.3g} above the ceiling at t={t:g}")
        raise BlowUpError(t, slope)
    if not np.any(field.u):
        return
    position = float(field.x[np.argmax(np.abs(field.u))])
    centre = field.x0 + settings.half_width
    if abs(position - centre) > settings.half_width - settings.boundary_margin:
        logger.error(f"Crest at x={position:g} reached the boundary margin at t={t:g}")
        raise BoundaryContaminationError(t, position)


def pde_integrate(u0: PeakonConfig, t_end: float, settings: PdeSettings) -> PdeRun:
    """
    Integrates mollified multipeakon data with classical RK4 on the periodic grid. The
    grid follows the frame speed of the settings, the largest initial p_i^2 when unset,
    so snapshot origins advance by frame_speed*t. The step is
    min(cfl*dx/max(u^2, frame_speed), dx^2/(4*viscosity)), shortened to land on every
    snapshot time; grid E and F are recorded with each snapshot.

    Args:
        u0 (PeakonConfig): Initial multipeakon, mollified before sampling.
        t_end (float): Positive final time.
        settings (PdeSettings): Grid, frame, time step and guard settings.

    Raises:
        ConfigValidationError: If t_end is not positive or a setting is invalid.
        BlowUpError: If the slope exceeds the ceiling or the solution stops being finite.
        BoundaryContaminationError: If the crest comes within the margin of the boundary.

    Returns:
        PdeRun: Snapshot times, grid fields and their E and F values.
    """
    PeakonValidator.validate_config(u0)
    SettingsValidator.validate_pde(settings)
    if not t_end > 0:
        raise ConfigValidationError("t_end", "t_end must be positive for pde-sim")
    viscosity = settings.viscosity
    frame_speed = settings.frame_speed_for(u0)
    diffusion_limit = 0.25*settings.dx**2/viscosity if viscosity > 0 else np.inf
    field = mollify_initial(u0, settings)
    _check_health(field, 0.0, settings)

    snapshots, diagnostics = [field], [energy_pair_grid(field)]
    times = sample_times(0.0, t_end, settings.snapshot_dt)
    t, steps = 0.0, 0
    start_time = time.perf_counter()
    for target in times[1:]:
        values = field.u
        while target - t > 1e-12*max(1.0, target):
            speed = max(float(np.max(values**2)), frame_speed, np.finfo(float).tiny)
            dt = min(settings.cfl*settings.dx/speed, diffusion_limit, target - t)
            values = _rk4_step(values, dt, field, viscosity, frame_speed)
            t, steps = t + dt, steps + 1
            _check_health(
                GridField(-settings.half_width + frame_speed*t, field.dx, values), t,
                settings)
        t = float(target)
        field = GridField(-settings.half_width + frame_speed*t, field.dx, values)
        snapshots.append(field)
        diagnostics.append(energy_pair_grid(field))
        logger.debug(f"Snapshot at t={t:g}, E={diagnostics[-1].E:.10g}")
    logger.info(
        f"Grid run with N={settings.N} at frame speed {frame_speed:g} finished {steps} "
        f"step(s) in {time.perf_counter() - start_time:.2f}s")
    return PdeRun(times, snapshots, diagnostics)


def crest_position(field: GridField) -> float:
    """
    Locates the crest of a grid field by fitting a parabola through the largest value and
    its two periodic neighbours.

    Args:
        field (GridField): Grid field with a positive crest.

    Returns:
        float: Sub-grid crest position.
    """
    index = int(np.argmax(field.u))
    before, peak, after = field.u[index - 1], field.u[index], field.u[(index + 1) % field.N]
    curvature = before - 2*peak + after
    offset = 0.5*(before - after)/curvature if curvature < 0 else 0.0
    return float(field.x0 + (index + offset)*field.dx)


def energy_drift(run: PdeRun) -> float:
    """Largest relative deviation of the grid energy from its initial value."""
    energies = run.energies
    return float(np.max(np.abs(energies - energies[0]))/abs(energies[0]))


def inner_l2_difference(coarse: GridField, fine: GridField, settings: PdeSettings) -> float:
    """
    L2 distance between a coarse snapshot and the even nodes of a snapshot on the grid
    with twice as many points, restricted to the nodes at least boundary_margin away from
    the periodic seam.

    Raises:
        InvalidGridError: If the fine grid does not refine the coarse one.
    """
    if fine.N != 2*coarse.N or not np.isclose(fine.x0, coarse.x0):
        raise InvalidGridError(
            f"a grid of {fine.N} points from {fine.x0:g} does not refine one of "
            f"{coarse.N} points from {coarse.x0:g}")
    centre = coarse.x0 + settings.half_width
    inner = np.abs(coarse.x - centre) <= settings.half_width - settings.boundary_margin
    gap = (coarse.u - fine.u[::2])[inner]
    return float(np.sqrt(coarse.dx*np.sum(gap**2)))


def refinement_study(
        u0: PeakonConfig,
        t_end: float,
        settings: PdeSettings) -> dict[str, list[float] | float]:
    """
    Runs the grid solver at N and 2N, compares each final crest with the highest particle
    of the multipeakon flow and measures the inner-domain L2 distance between the two
    final snapshots.

    Args:
        u0 (PeakonConfig): Initial multipeakon.
        t_end (float): Positive final time.
        settings (PdeSettings): Settings of the coarse run.

    Returns:
        dict[str, list[float] | float]: Grid sizes, grid spacings, crest errors and
            energy drifts per run, and the L2 distance of the final snapshots.
    """
    exact = integrate(OdeState(0.0, u0), t_end, IntegratorSettings(sample_dt=t_end))
    final = exact.samples[-1].cfg
    expected_crest = float(final.q[np.argmax(final.p)])
    study = {"N": [], "dx": [], "crest_error": [], "energy_drift": []}
    finals = []
    for N in (settings.N, 2*settings.N):
        refined = replace(settings, N=N)
        run = pde_integrate(u0, t_end, refined)
        finals.append(run.snapshots[-1])
        study["N"].append(N)
        study["dx"].append(refined.dx)
        study["crest_error"].append(abs(crest_position(finals[-1]) - expected_crest))
        study["energy_drift"].append(energy_drift(run))
    study["l2_difference"] = inner_l2_difference(*finals, settings)
    logger.info(
        f"Refinement study crest errors: {study['crest_error']}, L2 difference: "
        f"{study['l2_difference']:.3g}")
    return study
