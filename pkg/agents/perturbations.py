import logging

import numpy as np

from agents.peakon_field import difference, h1_distance, slope_l4_norm
from agents.validators import PeakonValidator
from globals.constants import LOGGER_NAME
from globals.types import PeakonConfig, PerturbationResult

logger = logging.getLogger(LOGGER_NAME)


def _random_signs(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.choice(np.array([-1.0, 1.0]), size=size)


def perturb(
        cfg: PeakonConfig,
        magnitude: float,
        seed: int,
        satellites: int = 1) -> PerturbationResult:
    """
    Generates a deterministic perturbation of a multipeakon: relative amplitude jitter of
    size between magnitude/2 and magnitude, position jitter of size up to magnitude^2, and
    small satellite peakons trailing the configuration by 3 to 6 units each. The achieved
    deviation is measured, not assumed.

    Args:
        cfg (PeakonConfig): Configuration to be perturbed.
        magnitude (float): Nonnegative perturbation size.
        seed (int): Seed of the PCG64 generator.
        satellites (int, optional): Number of trailing satellites. Defaults to 1.

    Returns:
        PerturbationResult: Perturbed configuration with its measured H1 and slope L4
        deviations from the original.
    """
    PeakonValidator.validate_config(cfg)
    if magnitude == 0:
        return PerturbationResult(PeakonConfig(cfg.q.copy(), cfg.p.copy()), 0.0, 0.0)
    rng = np.random.default_rng(seed)
    n = cfg.n
    p = cfg.p*(1 + magnitude*_random_signs(rng, n)*rng.uniform(0.5, 1, n))
    q = cfg.q + magnitude**2*_random_signs(rng, n)*rng.uniform(0.5, 1, n)
    rear = q.min()
    for _ in range(satellites):
        rear -= rng.uniform(3, 6)
        q = np.append(q, rear)
        p = np.append(p, magnitude*rng.uniform(0.5, 1))
    order = np.argsort(q)
    perturbed = PeakonConfig(q[order], p[order])
    result = PerturbationResult(
        perturbed, h1_distance(perturbed, cfg), slope_l4_norm(difference(perturbed, cfg)))
    logger.debug(
        f"Perturbation of magnitude {magnitude:g} with seed {seed}: H1 deviation "
        f"{result.h1_deviation:.3g}, slope L4 deviation {result.slope_l4_deviation:.3g}")
    return result
