"""Scalar root bracketing and minimisation used by the attack search."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> float:
    """Minimiser of a unimodal ``f`` on ``[a, b]``, located to within ``tol``.

    Ties between the two interior probes keep the left bracket, so flat
    minima drift toward ``a``.
    """
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return c if fc <= fd else d


def bisect_boundary(g: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> float:
    """Edge of the region ``g >= 0`` between ``a`` and ``b``.

    Exactly one endpoint must satisfy ``g >= 0``; the returned point is on
    that side of the boundary and within ``tol`` of it.
    """
    ga, gb = g(a) >= 0, g(b) >= 0
    if ga == gb:
        raise ValueError("boundary is not bracketed")
    while abs(b - a) > tol:
        m = 0.5 * (a + b)
        if (g(m) >= 0) == ga:
            a = m
        else:
            b = m
    return a if ga else b
