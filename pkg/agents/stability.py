import logging

import numpy as np

from agents.kernels import partition_phi, weight_psi_i
from agents.peakon_field import (
    energy_density, energy_E, energy_pair_grid, eval_field, f_density, field_maximum,
    functional_F, h1_distance, h1_inner_exact, hypothesis_norm, integrate_density_on)
from agents.validators import GridValidator, PeakonValidator
from globals.constants import (
    E_DIFFERENCE_FACTOR, F_DIFFERENCE_FACTOR, LOCALIZED_F_ENVELOPE, LOGGER_NAME,
    MAX_HEIGHT_FACTOR, PSI_SLOPE)
from globals.errors import PreconditionUnmetError, SeparationTooSmallError
from globals.types import (
    EFDifferenceReport, FBoundCheck, FloatArray, GridField, IdentityCheck,
    LocalizedBoundReport, LocalizedEnergySample, MaxHeightReport, PeakonConfig,
    PerturbationResult, StabilityTrend, Trajectory, TrainIdentityReport, WeightParams)

logger = logging.getLogger(LOGGER_NAME)


def single_peakon_identity(v: PeakonConfig, c: float, z: float) -> IdentityCheck:
    """
    Evaluates both sides of the identity
    ||v - phi_c(. - z)||^2 = E(v) - E(phi_c) - 4sqrt(c)(v(z) - sqrt(c)).

    Args:
        v (PeakonConfig): Any multipeakon.
        c (float): Positive speed of the reference peakon.
        z (float): Position of the reference peakon.

    Returns:
        IdentityCheck: Left-hand side (closed-form distance) and right-hand side.
    """
    reference = PeakonConfig.peakon(c, z)
    lhs = energy_E(v) - 2*h1_inner_exact(v, reference) + energy_E(reference)
    rhs = energy_E(v) - 2*c - 4*np.sqrt(c)*(eval_field(v, z) - np.sqrt(c))
    return IdentityCheck(float(lhs), float(rhs))


def f_upper_bound_check(v: PeakonConfig) -> FBoundCheck:
    """
    Checks F(v) <= (4/3)M^2E(v) - (4/3)M^4 with M the global maximum of v.

    Args:
        v (PeakonConfig): Multipeakon, usually with positive amplitudes.

    Returns:
        FBoundCheck: F, the bound and their difference (nonnegative when it holds).
    """
    _, M = field_maximum(v)
    F = functional_F(v)
    bound = (4/3)*M**2*energy_E(v) - (4/3)*M**4
    return FBoundCheck(F, bound, bound - F)


def ef_difference_bounds(v: PeakonConfig, c: float, eps: float) -> EFDifferenceReport:
    """
    Checks |E(v) - E(phi_c)| <= 4sqrt(c)eps and |F(v) - F(phi_c)| <= 120c^{3/2}eps for a
    configuration within eps of phi_c in H1 plus the L4 norm of the slope difference.

    Args:
        v (PeakonConfig): Configuration near the peakon.
        c (float): Positive speed of the peakon at the origin.
        eps (float): Claimed closeness.

    Raises:
        PreconditionUnmetError: If the measured closeness is not below eps.

    Returns:
        EFDifferenceReport: Differences, bounds and the measured hypothesis norm.
    """
    reference = PeakonConfig.peakon(c)
    norm = hypothesis_norm(v, reference)
    if norm >= eps:
        raise PreconditionUnmetError("H1 + slope L4 deviation", norm, eps)
    if eps > min(1.0, c):
        logger.warning(f"eps = {eps:g} is not small against min(1, c) = {min(1.0, c):g}")
    return EFDifferenceReport(
        norm,
        abs(energy_E(v) - 2*c), E_DIFFERENCE_FACTOR*np.sqrt(c)*eps,
        abs(functional_F(v) - (4/3)*c**2), F_DIFFERENCE_FACTOR*c**1.5*eps)


def max_height_bound(v: PeakonConfig, c: float, eps: float) -> MaxHeightReport:
    """
    Checks |M - sqrt(c)| <= 10c^{3/4}sqrt(eps), assuming the E and F estimates of
    `ef_difference_bounds` hold for (v, c, eps).

    Args:
        v (PeakonConfig): Configuration near the peakon.
        c (float): Positive speed.
        eps (float): Closeness parameter of the E and F estimates.

    Raises:
        PreconditionUnmetError: If either the E or the F estimate fails.

    Returns:
        MaxHeightReport: Maximum height, its deviation from sqrt(c) and the bound.
    """
    e_difference = abs(energy_E(v) - 2*c)
    e_limit = E_DIFFERENCE_FACTOR*np.sqrt(c)*eps
    if e_difference > e_limit:
        raise PreconditionUnmetError("energy difference", e_difference, e_limit)
    f_difference = abs(functional_F(v) - (4/3)*c**2)
    f_limit = F_DIFFERENCE_FACTOR*c**1.5*eps
    if f_difference > f_limit:
        raise PreconditionUnmetError("F difference", f_difference, f_limit)
    _, M = field_maximum(v)
    return MaxHeightReport(
        M, abs(M - np.sqrt(c)), MAX_HEIGHT_FACTOR*c**0.75*np.sqrt(eps))


def train_identity(
        v: PeakonConfig,
        speeds: FloatArray,
        z: FloatArray,
        L: float) -> TrainIdentityReport:
    """
    Compares E(v) - sum E(phi_ci) with ||v - R_z||^2 + 4 sum sqrt(c_i)(v(z_i) - sqrt(c_i)),
    R_z being the train of peakons of the given speeds at the shifts z. The exact gap is
    the cross energy of R_z, below 4 sum_{i<j} sqrt(c_i c_j) e^{-L/4}.

    Args:
        v (PeakonConfig): Any multipeakon.
        speeds (FloatArray): Positive speeds.
        z (FloatArray): Ascending shifts.
        L (float): Separation parameter.

    Raises:
        SeparationTooSmallError: If two consecutive shifts are not more than L/2 apart.

    Returns:
        TrainIdentityReport: Both sides, their gap and the envelope.
    """
    speeds = np.asarray(speeds, dtype=float)
    z = np.asarray(z, dtype=float)
    gaps = np.diff(z)
    if gaps.size and np.min(gaps) <= L/2:
        raise SeparationTooSmallError(float(np.min(gaps)), L)
    train = PeakonConfig.train(speeds, z)
    roots = np.sqrt(speeds)
    lhs = energy_E(v) - np.sum(2*speeds)
    distance = energy_E(v) - 2*h1_inner_exact(v, train) + energy_E(train)
    rhs = distance + 4*np.sum(roots*(eval_field(v, z) - roots))
    cross = np.outer(roots, roots)[np.triu_indices(len(roots), k=1)]
    envelope = 4*np.sum(cross)*np.exp(-L/4)
    return TrainIdentityReport(
        float(lhs), float(rhs), float(abs(lhs - rhs)), float(envelope))


def _weight_rows(params: WeightParams, x: FloatArray) -> FloatArray:
    psi_rows = np.array([weight_psi_i(params, i, x) for i in range(len(params.centers))])
    return np.vstack([psi_rows, partition_phi(params, x)])


def localized_energies(
        field: PeakonConfig | GridField,
        centers: FloatArray,
        K: float,
        slope: float = PSI_SLOPE) -> LocalizedEnergySample:
    """
    Computes the weighted energies I_i = int (u^2 + u_x^2)Psi_i,K and the partitioned
    functionals E_i = int (u^2 + u_x^2)Phi_i and F_i = int f(u, u_x)Phi_i.

    Args:
        field (PeakonConfig | GridField): Multipeakon (segment-wise quadrature) or
            periodic grid field (grid sums).
        centers (FloatArray): Ascending centers y_i; the first may be -inf.
        K (float): Dilation, at least 1.
        slope (float, optional): Scale inside the weight. Defaults to PSI_SLOPE.

    Raises:
        InvalidGridError: If a grid field is too coarse.

    Returns:
        LocalizedEnergySample: Arrays I, E and F, one entry per center.
    """
    params = WeightParams(slope, K, np.asarray(centers, dtype=float))
    PeakonValidator.validate_weight_params(params)
    n = len(params.centers)
    if isinstance(field, PeakonConfig):
        energies = integrate_density_on(
            field, energy_density, weights=lambda x: _weight_rows(params, x))
        f_values = integrate_density_on(
            field, f_density, weights=lambda x: partition_phi(params, x))
        return LocalizedEnergySample(energies[:n], energies[n:], f_values)

    GridValidator.validate_grid(field)
    u = np.asarray(field.u, dtype=float)
    if field.ux is not None:
        x, ux = field.x, np.asarray(field.ux, dtype=float)
    else:
        following = np.roll(u, -1)
        x = field.x + 0.5*field.dx
        u, ux = 0.5*(u + following), (following - u)/field.dx
    rows = _weight_rows(params, x)
    energies = field.dx*(rows @ energy_density(u, ux))
    f_values = field.dx*(rows[n:] @ f_density(u, ux))
    return LocalizedEnergySample(energies[:n], energies[n:], f_values)


def interval_maxima(
        cfg: PeakonConfig, centers: FloatArray) -> tuple[FloatArray, FloatArray]:
    """
    Finds the maximum of the field on each interval [y_i, y_{i+1}], the last interval
    extending to +inf.

    Args:
        cfg (PeakonConfig): Multipeakon configuration.
        centers (FloatArray): Ascending interval starts; the first may be -inf.

    Returns:
        tuple[FloatArray, FloatArray]: Locations and values of the local maxima.
    """
    edges = np.append(np.asarray(centers, dtype=float), np.inf)
    maxima = [field_maximum(cfg, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    return np.array([x for x, _ in maxima]), np.array([M for _, M in maxima])


def localized_f_bound(
        cfg: PeakonConfig,
        centers: FloatArray,
        K: float,
        L: float,
        slope: float = PSI_SLOPE) -> LocalizedBoundReport:
    """
    Checks the per-bump bound F_i <= (4/3)M_i^2E_i - (4/3)M_i^4, up to an envelope
    C*L^{-1/2}, with M_i the local maximum on the i-th interval.

    Args:
        cfg (PeakonConfig): Multipeakon configuration.
        centers (FloatArray): Ascending centers y_i, first one usually -inf.
        K (float): Dilation of the weights.
        L (float): Separation parameter of the train.
        slope (float, optional): Scale inside the weight. Defaults to PSI_SLOPE.

    Returns:
        LocalizedBoundReport: Localized F values, bounds and envelope.
    """
    sample = localized_energies(cfg, centers, K, slope)
    _, heights = interval_maxima(cfg, centers)
    bound = (4/3)*heights**2*sample.E - (4/3)*heights**4
    return LocalizedBoundReport(sample.F, bound, LOCALIZED_F_ENVELOPE/np.sqrt(L))


def orbital_distance(field: PeakonConfig | GridField, c: float) -> float:
    """
    Computes inf_z ||u - phi_c(. - z)||_{H1}, attained where u is maximal:
    sqrt(E(u) - 2c - 4sqrt(c)(M - sqrt(c))).

    Args:
        field (PeakonConfig | GridField): Multipeakon (exact) or grid field (grid E and
            grid maximum).
        c (float): Positive speed.

    Returns:
        float: Orbital H1 distance.
    """
    if isinstance(field, PeakonConfig):
        E = energy_E(field)
        _, M = field_maximum(field)
    else:
        E = energy_pair_grid(field).E
        M = float(np.max(field.u))
    return float(np.sqrt(max(E - 2*c - 4*np.sqrt(c)*(M - np.sqrt(c)), 0.0)))


def orbital_bound(c: float, eps: float) -> float:
    """Stability radius 2c^{3/8}(4 + max{1, c^{3/8}})eps for data within eps^4 of phi_c."""
    return 2*c**0.375*(4 + max(1.0, c**0.375))*eps


def train_distance(v: PeakonConfig, speeds: FloatArray, z: FloatArray) -> float:
    """H1 distance from v to the train of peakons of the given speeds at shifts z."""
    return h1_distance(v, PeakonConfig.train(speeds, z))


def max_height_sum(heights: FloatArray, speeds: FloatArray) -> float:
    """Weighted height deviation sum_i sqrt(c_i)|M_i - sqrt(c_i)|."""
    roots = np.sqrt(np.asarray(speeds, dtype=float))
    return float(np.sum(roots*np.abs(np.asarray(heights) - roots)))


def orbital_stability_audit(
        c: float,
        perturbation: PerturbationResult,
        traj: Trajectory) -> StabilityTrend:
    """
    Compares sup_t inf_z ||u(t) - phi_c(. - z)||_{H1} with the stability radius, taking the
    measured initial deviation as eps^4.

    Args:
        c (float): Speed of the unperturbed peakon.
        perturbation (PerturbationResult): Perturbed initial data with measured norms.
        traj (Trajectory): Evolution of the perturbed data.

    Returns:
        StabilityTrend: eps, the radius and the largest measured distance.
    """
    eps = perturbation.hypothesis_norm**0.25
    sup_distance = max(orbital_distance(state.cfg, c) for state in traj.samples)
    logger.debug(f"Orbital distance peaked at {sup_distance:.3g} for eps = {eps:.3g}")
    return StabilityTrend(eps, orbital_bound(c, eps), sup_distance)
