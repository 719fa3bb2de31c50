from functools import cache

import numpy as np

from agents.quadrature import composite_rule
from agents.validators import PeakonValidator
from globals.constants import MOLLIFIER_ORDER, MOLLIFIER_PANELS, PSI_SLOPE
from globals.errors import DegenerateConfigurationError
from globals.types import FloatArray, WeightParams


def green_p(x: float | FloatArray) -> float | FloatArray:
    """Fundamental solution (1/2)e^{-|x|} of 1 - d^2/dx^2."""
    return 0.5*np.exp(-np.abs(x))


def _bump(x: FloatArray) -> FloatArray:
    inside = np.abs(x) < 1
    values = np.zeros_like(x, dtype=float)
    values[inside] = np.exp(1/(x[inside]**2 - 1))
    return values


@cache
def mollifier_mass() -> float:
    """
    Computes the integral of the unnormalized bump e^{1/(x^2-1)} over [-1, 1] once.

    Returns:
        float: Normalization constant of the mollifier family.
    """
    nodes, weights = composite_rule(
        np.linspace(-1, 1, MOLLIFIER_PANELS + 1), MOLLIFIER_ORDER, split_length=np.inf)
    return float(weights @ _bump(nodes))


def mollifier_rho(n: int, x: float | FloatArray) -> float | FloatArray:
    """
    Evaluates the mollifier n*rho(n*x), normalized to unit mass, supported in [-1/n, 1/n].

    Args:
        n (int): Mollification index, at least 1.
        x (float | FloatArray): Evaluation point(s).

    Returns:
        float | FloatArray: Mollifier value(s), same shape as x.
    """
    values = n*_bump(np.atleast_1d(np.asarray(x, dtype=float))*n)/mollifier_mass()
    return values if np.ndim(x) else float(values[0])


@cache
def _mollifier_rule(n: int) -> tuple[FloatArray, FloatArray]:
    nodes, weights = composite_rule(
        np.linspace(-1/n, 1/n, MOLLIFIER_PANELS + 1), MOLLIFIER_ORDER,
        split_length=np.inf)
    return nodes, weights*mollifier_rho(n, nodes)


def mollifier_rule(n: int) -> tuple[FloatArray, FloatArray]:
    """
    Tabulates the quadrature nodes s_k and mollifier-weighted weights w_k*rho_n(s_k) used
    to evaluate convolutions with rho_n.

    Args:
        n (int): Mollification index.

    Returns:
        tuple[FloatArray, FloatArray]: Nodes and weights.
    """
    return _mollifier_rule(int(n))


def mollified_peakon(x: float | FloatArray, n: int) -> FloatArray:
    """
    Evaluates (rho_n * e^{-|.|})(x). Outside the mollifier support the value is exactly
    M_n*e^{-|x|} with M_n the rho_n-average of e^{s}.

    Args:
        x (float | FloatArray): Evaluation point(s).
        n (int): Mollification index.

    Returns:
        FloatArray: Mollified unit peakon at x.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nodes, weights = mollifier_rule(n)
    tail_mass = weights @ np.exp(nodes)
    values = tail_mass*np.exp(-np.abs(x))
    near = np.abs(x) < 1/n
    values[near] = np.exp(-np.abs(x[near, None] - nodes[None, :])) @ weights
    return values


def psi(x: float | FloatArray, slope: float = PSI_SLOPE) -> float | FloatArray:
    """
    Evaluates the smoothed step (2/pi)*arctan(e^{x/slope}), strictly increasing from 0 to 1.

    Both branches use e^{-|t|}, so the evaluation never overflows.

    Args:
        x (float | FloatArray): Evaluation point(s).
        slope (float, optional): Scale inside the exponent. Defaults to PSI_SLOPE.

    Returns:
        float | FloatArray: Weight value(s) in (0, 1).
    """
    t = np.asarray(x, dtype=float)/slope
    decay = (2/np.pi)*np.arctan(np.exp(-np.abs(t)))
    values = np.where(t > 0, 1 - decay, decay)
    return values if np.ndim(values) else float(values)


def weight_psi_i(params: WeightParams, index: int, x: float | FloatArray) -> FloatArray:
    """
    Evaluates the dilated weight psi((x - y_i)/K, slope) of one center. A center at -inf
    gives the constant weight 1.

    Args:
        params (WeightParams): Slope, dilation and centers.
        index (int): Zero-based center index.
        x (float | FloatArray): Evaluation point(s).

    Returns:
        FloatArray: Weight value(s).
    """
    center = params.centers[index]
    if np.isneginf(center):
        return np.ones_like(np.asarray(x, dtype=float))
    return np.asarray(psi((np.asarray(x, dtype=float) - center)/params.K, params.slope))


def partition_phi(params: WeightParams, x: float | FloatArray) -> FloatArray:
    """
    Evaluates the partition of unity Phi_1..Phi_n built from consecutive weight
    differences: Phi_1 = 1 - Psi_2, Phi_i = Psi_i - Psi_{i+1}, Phi_n = Psi_n. The first
    center never enters the partition.

    Args:
        params (WeightParams): Slope, dilation and centers.
        x (float | FloatArray): Evaluation point(s).

    Raises:
        DegenerateConfigurationError: If no center is given.

    Returns:
        FloatArray: Array of shape (n,) + shape(x), entries in [0, 1] summing to 1.
    """
    PeakonValidator.validate_weight_params(params)
    n = len(params.centers)
    if n == 0:
        raise DegenerateConfigurationError("partition of unity needs at least one center")
    x = np.asarray(x, dtype=float)
    if n == 1:
        return np.ones((1,) + x.shape)
    weights = np.array([weight_psi_i(params, i, x) for i in range(1, n)])
    return np.concatenate([
        1 - weights[:1],
        weights[:-1] - weights[1:],
        weights[-1:]
    ])
