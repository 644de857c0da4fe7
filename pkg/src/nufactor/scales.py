"""Scalar scale functions shared across counting, density and minorant code."""

from __future__ import annotations

from math import exp, log

NU_CAP = 64  # omega(n) <= 15 already for n < 2^63; cap documents intent


def log2x(log_x: float) -> float:
    """Iterated logarithm log log x, given log x."""
    if log_x <= 1.0:
        raise ValueError(f"log x = {log_x} too small for log log x")
    return log(log_x)


def log3x(log_x: float) -> float:
    """Iterated logarithm log log log x, given log x."""
    v = log2x(log_x)
    if v <= 0.0:
        raise ValueError(f"log log x = {v} <= 0")
    return log(v)


def nu_scale(nu: int, log_x: float) -> float:
    """The scale log(log x / (nu log(nu+1))) governing the density error terms.

    Positive only while nu log(nu+1) < log x; callers decide how to treat
    the degenerate desk-scale regime where it is not.
    """
    if nu < 1:
        raise ValueError(f"nu = {nu} must be >= 1")
    return log(log_x / (nu * log(nu + 1)))


def script_l(log_x: float, a: float) -> float:
    """log x / (log log x)^a, the nu-range boundary at exponent a."""
    return log_x / log2x(log_x) ** a


def z_star(v: int, c: float, log_x: float) -> float:
    """Window threshold exp((log x / v) / (2 exp(nu_scale^c)))."""
    if not 0.0 < c < 1.0:
        raise ValueError(f"window coefficient c = {c} outside (0, 1)")
    scale = nu_scale(v, log_x)
    if scale <= 0.0:
        raise ValueError(f"nu_scale({v}) = {scale} <= 0: window undefined")
    return exp((log_x / v) / (2.0 * exp(scale**c)))
