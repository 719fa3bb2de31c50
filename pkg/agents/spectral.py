import logging

import numpy as np

from agents.multipeakon_ode import integrate, ode_rhs
from agents.validators import PeakonValidator
from globals.constants import LOGGER_NAME, MAX_SPECTRUM_SIZE, SPECTRUM_DEFAULTS
from globals.errors import (
    ComplexSpectrumError, DegenerateConfigurationError, NonPositiveEigenvalueError)
from globals.types import (
    AsymptoticsReport, FloatArray, IntegratorSettings, OdeState, PeakonConfig,
    SpeedSpectrum)

logger = logging.getLogger(LOGGER_NAME)


def _factors(cfg: PeakonConfig) -> tuple[FloatArray, FloatArray, FloatArray]:
    PeakonValidator.validate_ordered_positive(cfg)
    if cfg.n > MAX_SPECTRUM_SIZE:
        raise DegenerateConfigurationError(
            f"{cfg.n} peakons exceed the spectrum size limit of {MAX_SPECTRUM_SIZE}")
    index = np.arange(cfg.n)
    T = 1 + np.sign(index[:, None] - index[None, :])
    E = np.exp(-np.abs(np.subtract.outer(cfg.q, cfg.q)))
    return T.astype(float), np.diag(cfg.p), E


def build_tpep(cfg: PeakonConfig) -> FloatArray:
    """
    Builds the product T*P*E*P with T_jk = 1 + sgn(j - k), P = diag(p) and
    E_ij = e^{-|q_i - q_j|}.

    Args:
        cfg (PeakonConfig): Ordered-positive configuration.

    Raises:
        NonPositiveAmplitudeError: If an amplitude is not positive.
        UnorderedPositionsError: If positions are not strictly ascending.

    Returns:
        FloatArray: The n-by-n matrix.
    """
    T, P, E = _factors(cfg)
    return T @ P @ E @ P


def _eigen_residual(matrix: FloatArray, values: FloatArray, vectors: FloatArray) -> float:
    scale = max(np.linalg.norm(matrix, 2), np.finfo(float).tiny)
    return float(np.max(
        np.linalg.norm(matrix @ vectors - vectors*values[None, :], axis=0))/scale)


def _imaginary_allowance(values: np.ndarray, tol: float, scale: float) -> FloatArray:
    """
    Per-eigenvalue bound on the imaginary part. Eigenvalues whose real parts lie within
    scale*tol^{1/n} of each other form a cluster; the members of an m-fold cluster, which
    splits like the m-th root of a rounding perturbation when nearly defective, get
    scale*tol^{1/m}.
    """
    order = np.argsort(values.real)
    width = scale*tol**(1/len(values))
    breaks = np.flatnonzero(np.diff(values.real[order]) > width) + 1
    allowance = np.empty(len(values))
    for cluster in np.split(order, breaks):
        allowance[cluster] = scale*tol**(1/len(cluster))
    return allowance


def lambda_spectrum(
        cfg: PeakonConfig, tol: float = SPECTRUM_DEFAULTS["tol"]) -> SpeedSpectrum:
    """
    Computes the asymptotic amplitudes as square roots of the eigenvalues of T*P*E*P.

    The eigenvalues come from LAPACK's balanced Hessenberg reduction and shifted QR. When
    the relative residual max||Av - mu*v||/||A|| exceeds tol, the similar product P*E*P*T
    is used instead. Equal-amplitude trains far apart give a nearly defective
    eigenvalue p^2 of multiplicity up to n, whose rounding splitting into a complex
    cluster is tolerated to tol^{1/m} for an m-fold cluster; real parts are returned.

    Args:
        cfg (PeakonConfig): Ordered-positive configuration.
        tol (float, optional): Tolerance for imaginary parts and residuals, relative to
            the spectral scale. Defaults to SPECTRUM_DEFAULTS["tol"].

    Raises:
        ComplexSpectrumError: If an imaginary part exceeds the tolerance of its cluster.
        NonPositiveEigenvalueError: If an eigenvalue is not positive.

    Returns:
        SpeedSpectrum: Ascending lambdas with residual and imaginary leak.
    """
    T, P, E = _factors(cfg)
    matrix = T @ P @ E @ P
    values, vectors = np.linalg.eig(matrix)
    residual = _eigen_residual(matrix, values, vectors)
    if residual > tol:
        logger.debug(
            f"Eigen residual {residual:.3g} above tolerance, retrying with the cyclic "
            f"product")
        matrix = P @ E @ P @ T
        values, vectors = np.linalg.eig(matrix)
        residual = _eigen_residual(matrix, values, vectors)

    scale = max(1.0, float(np.max(np.abs(values))))
    imag_leak = float(np.max(np.abs(values.imag)))
    if np.any(np.abs(values.imag) > _imaginary_allowance(values, tol, scale)):
        raise ComplexSpectrumError(imag_leak)
    real_values = np.sort(values.real)
    if real_values[0] <= 0:
        raise NonPositiveEigenvalueError(float(real_values[0]))
    return SpeedSpectrum(np.sqrt(real_values), residual, imag_leak)


def verify_asymptotics(
        cfg: PeakonConfig,
        T_horizon: float,
        settings: IntegratorSettings,
        tol: float = SPECTRUM_DEFAULTS["tol"]) -> AsymptoticsReport:
    """
    Integrates forward to +T_horizon and backward to -T_horizon and compares amplitudes
    and speeds with the spectrum: p_i(T) -> lambda_i, dq_i(T) -> lambda_i^2, while at -T
    the order is reversed.

    Args:
        cfg (PeakonConfig): Ordered-positive configuration at t = 0.
        T_horizon (float): Positive time horizon.
        settings (IntegratorSettings): Integrator settings for both runs.
        tol (float, optional): Spectrum tolerance. Defaults to SPECTRUM_DEFAULTS["tol"].

    Returns:
        AsymptoticsReport: Per-peakon absolute deviations at both ends.
    """
    lambdas = lambda_spectrum(cfg, tol).lambdas
    deviations = {}
    for direction, targets in (("forward", lambdas), ("backward", lambdas[::-1])):
        horizon = T_horizon if direction == "forward" else -T_horizon
        final = integrate(OdeState(0.0, cfg), horizon, settings).samples[-1].cfg
        speeds, _ = ode_rhs(final)
        deviations[direction] = (np.abs(final.p - targets), np.abs(speeds - targets**2))
        logger.debug(
            f"Asymptotics {direction}: max amplitude deviation "
            f"{np.max(deviations[direction][0]):.3g}")
    return AsymptoticsReport(
        lambdas, T_horizon, *deviations["forward"], *deviations["backward"])
