from functools import cache

import numpy as np

from globals.constants import SEGMENT_ORDER, SPLIT_LENGTH
from globals.types import FloatArray


@cache
def gauss_legendre(order: int) -> tuple[FloatArray, FloatArray]:
    """
    Retrieves the Gauss-Legendre nodes and weights of a given order on [-1, 1].

    Args:
        order (int): Number of nodes.

    Returns:
        tuple[FloatArray, FloatArray]: Nodes and weights of the rule.
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def split_panels(lo: float, hi: float, split_length: float) -> FloatArray:
    """
    Splits [lo, hi] into panels: a single panel when the segment is not longer than
    `split_length`, otherwise equal panels no longer than one unit.

    Args:
        lo (float): Left end of the segment.
        hi (float): Right end of the segment.
        split_length (float): Longest segment kept as a single panel.

    Returns:
        FloatArray: Ascending panel edges, starting at lo and ending at hi.
    """
    length = hi - lo
    if length <= split_length:
        return np.array([lo, hi])
    count = int(np.ceil(length - 1e-12))
    return np.linspace(lo, hi, count + 1)


def composite_rule(
        breakpoints: FloatArray,
        order: int = SEGMENT_ORDER,
        split_length: float = SPLIT_LENGTH) -> tuple[FloatArray, FloatArray]:
    """
    Builds a composite Gauss-Legendre rule on [min(breakpoints), max(breakpoints)] with
    one panel per segment between consecutive unique breakpoints. Integrands are expected
    to be smooth inside each segment.

    Args:
        breakpoints (FloatArray): Points where the integrand may have kinks, including both
            ends of the integration window. Need not be sorted or unique.
        order (int, optional): Nodes per panel. Defaults to SEGMENT_ORDER.
        split_length (float, optional): Segments longer than this are subdivided into unit
            panels. Defaults to SPLIT_LENGTH.

    Returns:
        tuple[FloatArray, FloatArray]: Flattened nodes and weights of the composite rule.
        Both are empty if fewer than two unique breakpoints are given.
    """
    edges = np.unique(np.asarray(breakpoints, dtype=float))
    if len(edges) < 2:
        return np.array([]), np.array([])
    panels = np.concatenate([
        split_panels(lo, hi, split_length)[:-1] for lo, hi in zip(edges[:-1], edges[1:])
    ] + [edges[-1:]])
    nodes, weights = gauss_legendre(order)
    half_widths = 0.5*np.diff(panels)
    centers = 0.5*(panels[:-1] + panels[1:])
    return (
        (centers[:, None] + half_widths[:, None]*nodes[None, :]).ravel(),
        (half_widths[:, None]*weights[None, :]).ravel())
