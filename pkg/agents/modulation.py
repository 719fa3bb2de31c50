import logging
from functools import cache

import numpy as np
from scipy.optimize import minimize_scalar

from agents.kernels import mollifier_rule
from agents.peakon_field import (
    difference, energy_density, eval_field, integrate_density_on)
from agents.quadrature import composite_rule
from agents.stability import localized_energies, max_height_sum, train_distance
from agents.validators import PeakonValidator
from globals.constants import (
    AUDIT_DEFAULTS, DOMAIN_PAD, GOLDEN_TOLERANCE, JACOBIAN_MAX_CONDITION, LOGGER_NAME,
    MONOTONICITY_ENVELOPE, NEWTON_MAX_HALVINGS, NEWTON_MAX_ITERATIONS, NEWTON_TOLERANCE,
    PSI_SLOPE, TRAIN_DISTANCE_ENVELOPE)
from globals.errors import (
    BumpLostError, InvalidMollifierIndexError, JacobianSingularError, NewtonDivergedError)
from globals.types import (
    FloatArray, LocalizedEnergyReport, ModulationTrack, PeakonConfig, PerturbationResult,
    StabilityTrend, Trajectory)

logger = logging.getLogger(LOGGER_NAME)


class ModulationKernel:
    """
    Mollified pairing kernels of the orthogonality conditions. With k = rho_n0 * e^{-|.|},
    the pairing of a unit peakon at q with k'(. - s) equals g(s - q), where
    g = rho_n0 * (y e^{-|y|}) and g' = rho_n0 * ((1 - |y|)e^{-|y|}).
    """

    def __init__(self, n0: int):
        self.n0 = int(n0)
        self.nodes, self.weights = mollifier_rule(self.n0)
        if not self.is_monotone():
            raise InvalidMollifierIndexError(self.n0)

    def g(self, y: float | FloatArray) -> FloatArray:
        offsets = np.subtract.outer(y, self.nodes)
        return (offsets*np.exp(-np.abs(offsets))) @ self.weights

    def g_prime(self, y: float | FloatArray) -> FloatArray:
        offsets = np.abs(np.subtract.outer(y, self.nodes))
        return ((1 - offsets)*np.exp(-offsets)) @ self.weights

    def is_monotone(self, samples: int = 201) -> bool:
        """Checks that g is strictly increasing on [-1/2, 1/2]."""
        return bool(np.all(self.g_prime(np.linspace(-0.5, 0.5, samples)) > 0))

    @staticmethod
    def kernel_identity(y: float) -> tuple[float, float]:
        """
        Computes int phi'(x)phi'(x - y)dx for phi = e^{-|.|} by quadrature between the
        kinks, next to its closed form (1 - |y|)e^{-|y|}.

        Args:
            y (float): Offset.

        Returns:
            tuple[float, float]: Quadrature value and closed form.
        """
        nodes, weights = composite_rule(np.array([-DOMAIN_PAD, 0.0, y, y + DOMAIN_PAD]))
        slope = -np.sign(nodes)*np.exp(-np.abs(nodes))
        shifted = -np.sign(nodes - y)*np.exp(-np.abs(nodes - y))
        return float(weights @ (slope*shifted)), float((1 - abs(y))*np.exp(-abs(y)))


@cache
def modulation_kernel(n0: int) -> ModulationKernel:
    """Kernel for a mollification index, tabulated once per process."""
    return ModulationKernel(n0)


def _orthogonality_residual(
        u: PeakonConfig,
        roots: FloatArray,
        shifts: FloatArray,
        kernel: ModulationKernel) -> FloatArray:
    own = kernel.g(np.subtract.outer(shifts, u.q)) @ u.p
    train = kernel.g(np.subtract.outer(shifts, shifts)) @ roots
    return roots*(own - train)


def _orthogonality_jacobian(
        u: PeakonConfig,
        roots: FloatArray,
        shifts: FloatArray,
        kernel: ModulationKernel) -> FloatArray:
    coupling = np.outer(roots, roots)*kernel.g_prime(np.subtract.outer(shifts, shifts))
    own = roots*(kernel.g_prime(np.subtract.outer(shifts, u.q)) @ u.p)
    jacobian = coupling.copy()
    np.fill_diagonal(jacobian, own - (coupling.sum(axis=1) - np.diag(coupling)))
    return jacobian


def modulation_solve(
        u: PeakonConfig,
        speeds: FloatArray,
        init_shifts: FloatArray,
        n0: int = AUDIT_DEFAULTS["n0"]) -> FloatArray:
    """
    Finds shifts x_1 < ... < x_n such that u - sum_j phi_cj(. - x_j) is orthogonal to the
    mollified peakon derivatives (rho_n0 * phi_ci)'(. - x_i), by damped Newton iterations
    with step halving on the residual norm.

    Args:
        u (PeakonConfig): Field to be decomposed.
        speeds (FloatArray): Positive speeds of the train.
        init_shifts (FloatArray): Ascending initial guess.
        n0 (int, optional): Mollification index. Defaults to AUDIT_DEFAULTS["n0"].

    Raises:
        InvalidMollifierIndexError: If the kernel of n0 is not monotone on [-1/2, 1/2].
        JacobianSingularError: If the Jacobian is singular or badly conditioned.
        NewtonDivergedError: If the iterations stall, lose the ordering or do not
            converge.

    Returns:
        FloatArray: Ascending modulation shifts.
    """
    kernel = modulation_kernel(n0)
    roots = np.sqrt(np.asarray(speeds, dtype=float))
    shifts = np.array(init_shifts, dtype=float)
    residual = _orthogonality_residual(u, roots, shifts, kernel)
    norm = float(np.linalg.norm(residual))
    for iteration in range(1, NEWTON_MAX_ITERATIONS + 1):
        jacobian = _orthogonality_jacobian(u, roots, shifts, kernel)
        condition = float(np.linalg.cond(jacobian))
        if not condition < JACOBIAN_MAX_CONDITION:
            raise JacobianSingularError(condition)
        try:
            step = np.linalg.solve(jacobian, -residual)
        except np.linalg.LinAlgError:
            raise JacobianSingularError(float("inf"))
        if np.linalg.norm(step) < NEWTON_TOLERANCE:
            return shifts

        alpha = 1.0
        for _ in range(NEWTON_MAX_HALVINGS):
            trial = shifts + alpha*step
            trial_residual = _orthogonality_residual(u, roots, trial, kernel)
            if np.linalg.norm(trial_residual) <= norm:
                break
            alpha /= 2
        else:
            raise NewtonDivergedError(iteration, norm)
        if np.any(np.diff(trial) <= 0):
            raise NewtonDivergedError(iteration, norm)

        shifts, residual = trial, trial_residual
        norm = float(np.linalg.norm(residual))
        if np.linalg.norm(alpha*step) < NEWTON_TOLERANCE:
            return shifts
    raise NewtonDivergedError(NEWTON_MAX_ITERATIONS, norm)


def _interval_maximum(
        cfg: PeakonConfig,
        lo: float,
        hi: float,
        t: float,
        index: int) -> tuple[float, float]:
    inside = (cfg.q > lo) & (cfg.q < hi)
    if not np.any(inside):
        raise BumpLostError(t, index)
    kinks = cfg.q[inside]
    seed = float(kinks[np.argmax(eval_field(cfg, kinks))])
    reach = min(0.5, seed - lo, hi - seed)
    best = (seed, float(eval_field(cfg, seed)))
    try:
        result = minimize_scalar(
            lambda x: -eval_field(cfg, x), bracket=(seed - reach, seed, seed + reach),
            method="golden", options={"xtol": GOLDEN_TOLERANCE, "maxiter": 200})
        if -result.fun > best[1]:
            best = (float(result.x), float(-result.fun))
    except ValueError as error:
        logger.debug(f"Golden-section refinement skipped near x={seed:g}: {error}")
    if not lo <= best[0] <= hi:
        raise BumpLostError(t, index)
    return best


def track_maxima(
        traj: Trajectory,
        speeds: FloatArray,
        n0: int = AUDIT_DEFAULTS["n0"]) -> ModulationTrack:
    """
    Tracks the bumps of a train along a trajectory. At each sample the orthogonality
    shifts are solved starting from the previous ones moved at the bump speeds, the
    intervals J_i are bounded by the midpoints of consecutive shifts, and the maximum on
    each interval is located by golden-section refinement around its highest kink.

    Args:
        traj (Trajectory): Trajectory from an ordered-positive run.
        speeds (FloatArray): Positive speeds of the bumps from left to right.
        n0 (int, optional): Mollification index. Defaults to AUDIT_DEFAULTS["n0"].

    Raises:
        BumpLostError: If an interval loses its bump.
        NewtonDivergedError: If the orthogonality shifts cannot be solved.

    Returns:
        ModulationTrack: Shifts, maxima and per-bump H1 distances at every sample.
    """
    speeds = np.asarray(speeds, dtype=float)
    n = len(speeds)
    first = traj.samples[0]
    PeakonValidator.validate_config(first.cfg)
    guess = np.sort(first.cfg.q[np.argsort(first.cfg.p)[-n:]])
    previous_t = first.t
    shifts, positions, heights, distances = [], [], [], []
    for state in traj.samples:
        guess = guess + speeds*(state.t - previous_t)
        current = modulation_solve(state.cfg, speeds, guess, n0)
        edges = np.concatenate([[-np.inf], 0.5*(current[1:] + current[:-1]), [np.inf]])
        maxima = [
            _interval_maximum(state.cfg, edges[i], edges[i + 1], state.t, i)
            for i in range(n)
        ]
        bump_distances = [
            np.sqrt(max(integrate_density_on(
                difference(state.cfg, PeakonConfig.peakon(speeds[i], maxima[i][0])),
                energy_density, edges[i], edges[i + 1]), 0.0))
            for i in range(n)
        ]
        shifts.append(current)
        positions.append([x for x, _ in maxima])
        heights.append([M for _, M in maxima])
        distances.append(bump_distances)
        guess, previous_t = current, state.t
    return ModulationTrack(
        traj.times, np.array(shifts), np.array(positions), np.array(heights),
        np.array(distances))


def _centers(shifts: FloatArray) -> FloatArray:
    return np.concatenate([[-np.inf], 0.5*(shifts[1:] + shifts[:-1])])


def monotonicity_audit(
        traj: Trajectory,
        speeds: FloatArray | None = None,
        L: float | None = None,
        K: float | None = None,
        n0: int = AUDIT_DEFAULTS["n0"],
        slope: float = PSI_SLOPE) -> LocalizedEnergyReport:
    """
    Follows the localized energies I_i,K(t) along a trajectory, with centers at the
    midpoints of the tracked shifts, and compares the growth I_i,K(t) - I_i,K(0) of every
    weight but the first with the envelope C*e^{-L/(8K)}, L being the smallest initial
    separation. The check is asserted only when the speeds are ascending from left to
    right.

    Args:
        traj (Trajectory): Trajectory of a multipeakon train.
        speeds (FloatArray | None, optional): Speeds of the bumps from left to right; the
            squared initial amplitudes when None.
        L (float | None, optional): Separation; the smallest initial gap when None.
        K (float | None, optional): Dilation; max(1, sqrt(L)/8) when None.
        n0 (int, optional): Mollification index. Defaults to AUDIT_DEFAULTS["n0"].
        slope (float, optional): Scale inside the weight. Defaults to PSI_SLOPE.

    Returns:
        LocalizedEnergyReport: Localized energies, their growth and the envelope.
    """
    initial = traj.samples[0].cfg
    if speeds is None:
        speeds = initial.p**2
    speeds = np.asarray(speeds, dtype=float)
    if L is None:
        L = float(np.min(np.diff(initial.q))) if initial.n > 1 else np.inf
    if K is None:
        K = max(1.0, np.sqrt(L)/8) if np.isfinite(L) else 1.0
    asserted = bool(np.all(initial.p > 0) and np.all(np.diff(speeds) > 0))
    if not asserted:
        logger.warning("Speeds are not ascending, monotonicity is reported, not asserted")

    track = track_maxima(traj, speeds, n0)
    samples = [
        localized_energies(state.cfg, _centers(shifts), K, slope)
        for state, shifts in zip(traj.samples, track.shifts)
    ]
    I = np.array([sample.I for sample in samples])
    envelope = MONOTONICITY_ENVELOPE*np.exp(-L/(8*K))
    return LocalizedEnergyReport(
        traj.times, I, np.array([sample.E for sample in samples]),
        np.array([sample.F for sample in samples]), I - I[0], float(envelope), asserted)


def train_stability_audit(
        perturbation: PerturbationResult,
        traj: Trajectory,
        speeds: FloatArray,
        L: float,
        n0: int = AUDIT_DEFAULTS["n0"]) -> tuple[ModulationTrack, StabilityTrend]:
    """
    Tracks a perturbed train and compares the largest per-bump H1 distance with
    C(eps + L^{-1/8}), taking the measured initial deviation as eps^4. The trend also
    carries the largest H1 distance to the whole train at the tracked shifts and the
    largest weighted height deviation sum_i sqrt(c_i)|M_i - sqrt(c_i)|.

    Args:
        perturbation (PerturbationResult): Perturbed initial train with measured norms.
        traj (Trajectory): Evolution of the perturbed train.
        speeds (FloatArray): Ascending speeds of the unperturbed train.
        L (float): Initial separation of the unperturbed train.
        n0 (int, optional): Mollification index. Defaults to AUDIT_DEFAULTS["n0"].

    Returns:
        tuple[ModulationTrack, StabilityTrend]: The track, whose gaps should stay above
        L/2, and the distance trend.
    """
    eps = perturbation.hypothesis_norm**0.25
    track = track_maxima(traj, speeds, n0)
    bound = TRAIN_DISTANCE_ENVELOPE*(eps + L**-0.125)
    whole_train = max(
        train_distance(state.cfg, speeds, shifts)
        for state, shifts in zip(traj.samples, track.shifts))
    heights = max(max_height_sum(maxima, speeds) for maxima in track.heights)
    return track, StabilityTrend(
        eps, bound, float(np.max(track.per_bump_distance)), whole_train, heights)
