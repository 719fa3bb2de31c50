from collections.abc import Callable

import numpy as np

from agents.quadrature import composite_rule
from agents.validators import GridValidator
from globals.constants import DOMAIN_PAD
from globals.errors import DegenerateConfigurationError
from globals.types import (
    Density, EnergyPair, FloatArray, GridField, MomentumMasses, PeakonConfig)


def energy_density(u: FloatArray, ux: FloatArray) -> FloatArray:
    return u**2 + ux**2


def f_density(u: FloatArray, ux: FloatArray) -> FloatArray:
    return u**4 + 2*u**2*ux**2 - ux**4/3


def slope_quartic_density(u: FloatArray, ux: FloatArray) -> FloatArray:
    return ux**4


def eval_field(cfg: PeakonConfig, x: float | FloatArray) -> float | FloatArray:
    """
    Evaluates u(x) = sum_i p_i e^{-|x - q_i|}.

    Args:
        cfg (PeakonConfig): Multipeakon configuration.
        x (float | FloatArray): Evaluation point(s).

    Returns:
        float | FloatArray: Field value(s), same shape as x.
    """
    return np.exp(-np.abs(np.subtract.outer(x, cfg.q))) @ cfg.p


def eval_field_deriv(cfg: PeakonConfig, x: float | FloatArray) -> float | FloatArray:
    """
    Evaluates the a.e. derivative of the field, using sgn(0) = 0 at the kinks.

    Args:
        cfg (PeakonConfig): Multipeakon configuration.
        x (float | FloatArray): Evaluation point(s).

    Returns:
        float | FloatArray: Derivative value(s), same shape as x.
    """
    offsets = np.subtract.outer(x, cfg.q)
    return (-np.sign(offsets)*np.exp(-np.abs(offsets))) @ cfg.p


def h1_inner_exact(a: PeakonConfig, b: PeakonConfig) -> float:
    """
    Computes the H1 pairing of two multipeakons in closed form, using
    <e^{-|.-s|}, e^{-|.-r|}>_{H1} = 2e^{-|s-r|}.

    Args:
        a (PeakonConfig): First configuration.
        b (PeakonConfig): Second configuration.

    Returns:
        float: H1 inner product.
    """
    return float(2*a.p @ np.exp(-np.abs(np.subtract.outer(a.q, b.q))) @ b.p)


def energy_E(cfg: PeakonConfig) -> float:
    """Conserved energy E = int(u^2 + u_x^2), in closed form."""
    return h1_inner_exact(cfg, cfg)


def difference(a: PeakonConfig, b: PeakonConfig) -> PeakonConfig:
    """Represents a - b as a single multipeakon."""
    return PeakonConfig(np.concatenate([a.q, b.q]), np.concatenate([a.p, -b.p]))


def integrate_density(cfg: PeakonConfig, density: Density, degree: int) -> float:
    """
    Integrates density(u, u_x) over the whole line. Gauss-Legendre panels cover each
    segment between sorted positions, where the integrand is smooth; outside the extreme
    positions the field is a pure exponential with u_x = +u (left) or -u (right), so the
    tails are exact for densities homogeneous of the given degree.

    Args:
        cfg (PeakonConfig): Multipeakon configuration.
        density (Density): Integrand as a function of (u, u_x).
        degree (int): Homogeneity degree of the density.

    Returns:
        float: Value of the integral.
    """
    edges = np.unique(cfg.q)
    nodes, weights = composite_rule(edges)
    inner = 0.0
    if nodes.size:
        inner = weights @ density(eval_field(cfg, nodes), eval_field_deriv(cfg, nodes))
    left = eval_field(cfg, edges[0])
    right = eval_field(cfg, edges[-1])
    one = np.float64(1.0)
    tails = (density(one, one)*left**degree + density(one, -one)*right**degree)/degree
    return float(inner + tails)


def functional_F(cfg: PeakonConfig) -> float:
    """
    Computes the conserved functional F = int(u^4 + 2u^2u_x^2 - u_x^4/3) by segment-wise
    quadrature plus the exact tails (2/3)u(q_min)^4 and (2/3)u(q_max)^4.

    Args:
        cfg (PeakonConfig): Multipeakon configuration.

    Returns:
        float: Value of F.
    """
    return integrate_density(cfg, f_density, 4)


def integrate_density_on(
        cfg: PeakonConfig,
        density: Density,
        lo: float = -np.inf,
        hi: float = np.inf,
        weights: Callable[[FloatArray], FloatArray] | None = None) -> float | FloatArray:
    """
    Integrates density(u, u_x), optionally times smooth weights, over a window. Infinite
    ends are clamped to DOMAIN_PAD beyond the extreme positions; panels are at most one
    unit long so that smooth weights are resolved.

    Args:
        cfg (PeakonConfig): Multipeakon configuration.
        density (Density): Integrand as a function of (u, u_x).
        lo (float, optional): Left end of the window. Defaults to -inf.
        hi (float, optional): Right end of the window. Defaults to +inf.
        weights (Callable[[FloatArray], FloatArray] | None, optional): Function mapping
            nodes of shape (m,) to weights of shape (k, m). Defaults to None.

    Returns:
        float | FloatArray: Integral, or one integral per weight row.
    """
    lo = max(lo, cfg.q.min() - DOMAIN_PAD)
    hi = min(hi, cfg.q.max() + DOMAIN_PAD)
    if hi <= lo:
        return 0.0 if weights is None else np.zeros(len(weights(np.array([lo]))))
    kinks = cfg.q[(cfg.q > lo) & (cfg.q < hi)]
    nodes, quadrature_weights = composite_rule(
        np.concatenate([[lo, hi], kinks]), split_length=1.0)
    values = density(eval_field(cfg, nodes), eval_field_deriv(cfg, nodes))
    if weights is None:
        return float(quadrature_weights @ values)
    return weights(nodes) @ (quadrature_weights*values)


def slope_l4_norm(cfg: PeakonConfig) -> float:
    """L4 norm of u_x, with exact exponential tails."""
    return max(integrate_density(cfg, slope_quartic_density, 4), 0.0)**0.25


def h1_distance(a: PeakonConfig, b: PeakonConfig) -> float:
    """H1 distance between two multipeakons, in closed form."""
    return float(np.sqrt(max(energy_E(difference(a, b)), 0.0)))


def hypothesis_norm(v: PeakonConfig, reference: PeakonConfig) -> float:
    """
    Measures ||v - w||_{H1} + ||v_x - w_x||_{L4} for a reference multipeakon w, the
    deviation used as a hypothesis by the stability estimates.

    Args:
        v (PeakonConfig): Configuration to be measured.
        reference (PeakonConfig): Reference configuration, usually a single peakon.

    Returns:
        float: Sum of the two deviation norms.
    """
    return h1_distance(v, reference) + slope_l4_norm(difference(v, reference))


def field_maximum(
        cfg: PeakonConfig,
        lo: float = -np.inf,
        hi: float = np.inf) -> tuple[float, float]:
    """
    Finds the maximum of the field on a window. Between kinks the field is
    a*e^{x} + b*e^{-x}, so the candidates are the kinks, the finite window ends and the
    interior critical point of each concave segment.

    Args:
        cfg (PeakonConfig): Multipeakon configuration.
        lo (float, optional): Left end of the window. Defaults to -inf.
        hi (float, optional): Right end of the window. Defaults to +inf.

    Returns:
        tuple[float, float]: Location and value of the maximum.
    """
    kinks = np.unique(cfg.q[(cfg.q >= lo) & (cfg.q <= hi)])
    ends = [end for end in (lo, hi) if np.isfinite(end)]
    edges = np.unique(np.concatenate([kinks, ends]))
    candidates = list(edges)
    for a, b in zip(edges[:-1], edges[1:]):
        ahead = cfg.q >= b
        behind = cfg.q <= a
        growing = cfg.p[ahead] @ np.exp(-(cfg.q[ahead] - a))
        decaying = cfg.p[behind] @ np.exp(-(a - cfg.q[behind]))
        if growing < 0 and decaying < 0:
            critical = a + 0.5*np.log(decaying/growing)
            if a < critical < b:
                candidates.append(critical)
    candidates = np.array(candidates)
    values = eval_field(cfg, candidates)
    best = int(np.argmax(values))
    return float(candidates[best]), float(values[best])


def sample_grid(cfg: PeakonConfig, x0: float, dx: float, N: int) -> GridField:
    """Samples u and u_x of a multipeakon on a uniform grid."""
    x = x0 + dx*np.arange(N)
    return GridField(x0, dx, eval_field(cfg, x), eval_field_deriv(cfg, x))


def energy_pair_grid(field: GridField) -> EnergyPair:
    """
    Computes E and F of a periodic grid field. With u_x available the periodic trapezoid
    rule is applied at the nodes; otherwise u and u_x are taken at cell faces (average and
    one-sided difference) and the midpoint rule is applied, which keeps second order when a
    kink sits on a node.

    Args:
        field (GridField): Grid field.

    Raises:
        InvalidGridError: If the grid is too coarse or inconsistent.

    Returns:
        EnergyPair: Grid values of E and F.
    """
    GridValidator.validate_grid(field)
    u = np.asarray(field.u, dtype=float)
    if field.ux is not None:
        ux = np.asarray(field.ux, dtype=float)
    else:
        following = np.roll(u, -1)
        u, ux = 0.5*(u + following), (following - u)/field.dx
    return EnergyPair(
        float(field.dx*np.sum(energy_density(u, ux))),
        float(field.dx*np.sum(f_density(u, ux))))


def reconstruct_from_momentum(masses: MomentumMasses) -> PeakonConfig:
    """
    Reconstructs v = p * y from a momentum density y = sum_i w_i delta_{a_i}, which gives
    a multipeakon with q_i = a_i and p_i = w_i/2.

    Args:
        masses (MomentumMasses): Sequence of (location, weight) pairs.

    Raises:
        DegenerateConfigurationError: If no mass is given.

    Returns:
        PeakonConfig: Reconstructed configuration.
    """
    if not masses:
        raise DegenerateConfigurationError("momentum density has no point mass")
    locations, weights = zip(*masses)
    return PeakonConfig(np.array(locations, dtype=float), np.array(weights, dtype=float)/2)


def momentum_total_variation(masses: MomentumMasses) -> float:
    """Total variation sum_i |w_i| of a point-mass momentum density."""
    return float(sum(abs(weight) for _, weight in masses))


def y_plus_margin(cfg: PeakonConfig, samples: FloatArray) -> float:
    """Smallest value of v - |v_x| over the samples, nonnegative for a nonnegative y."""
    return float(np.min(eval_field(cfg, samples) - np.abs(eval_field_deriv(cfg, samples))))
