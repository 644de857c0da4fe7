"""Saddle-point evaluation of the Hildebrand-Tenenbaum density delta_nu(x).

Everything is carried in natural-log space: the density underflows double
precision long before the interesting range of nu ends.  Euler products are
truncated at a configurable prime limit; the omitted primes are replaced by
a logarithmic-integral density, which leaves a smooth, differentiable tail
correction that the Newton solver can see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from math import exp, isqrt, lgamma, log

import numpy as np
from scipy.special import exp1

from . import sieve
from .scales import log2x, nu_scale, script_l


class DivergenceError(ValueError):
    """Euler product evaluated outside its half-plane of convergence."""


class ConvergenceError(RuntimeError):
    """Numerical iteration failed; carries the last iterate when available."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


@dataclass(frozen=True)
class EulerProductConfig:
    """Truncation and iteration controls for all Euler-product evaluations.

    tail_tolerance bounds the relative size of the first omitted tail term
    (second order in the prime density); it deliberately sits at the loose
    end because near s=1 the products converge only logarithmically and the
    leading tail is already carried by the integral correction.
    """

    prime_limit: int = 1_000_000
    tail_tolerance: float = 1e-4
    max_newton_iterations: int = 80
    newton_tolerance: float = 1e-12

    def __post_init__(self):
        if self.prime_limit < 100_000:
            raise ValueError(f"prime_limit {self.prime_limit} < 1e5")
        for tol in (self.tail_tolerance, self.newton_tolerance):
            if not 0.0 < tol <= 1e-4:
                raise ValueError(f"tolerance {tol} outside (0, 1e-4]")


DEFAULT_CONFIG = EulerProductConfig()

_PRIME_LIMIT_CAP = 1 << 31
_prime_arrays_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _prime_arrays(limit: int) -> tuple[np.ndarray, np.ndarray]:
    """(p, log p) as float64 arrays for all primes <= limit, cached."""
    got = _prime_arrays_cache.get(limit)
    if got is None:
        if len(_prime_arrays_cache) > 8:
            _prime_arrays_cache.clear()
        table = sieve.cached_prime_table(limit)
        p = table.primes.astype(np.float64)
        got = (p, np.log(p))
        _prime_arrays_cache[limit] = got
    return got


@dataclass(frozen=True)
class SaddlePoint:
    """Minimizer (rho, alpha) of G(r, a) x^a r^-nu with solver metadata."""

    nu: int
    log_x: float
    rho: float
    alpha: float
    residual_r: float  # r * sum_p 1/(p^a - 1 + r) - nu
    residual_a: float  # r * sum_p p^a log p / ((p^a - 1)(p^a - 1 + r)) - log x
    iterations: int
    truncation: EulerProductConfig

    def corridor_ok(self) -> bool | None:
        """rho within factor 3 of nu/scale and alpha-1 of rho/log x.

        None when the scale is non-positive (outside the asymptotic range).
        """
        scale = nu_scale(self.nu, self.log_x)
        if scale <= 0.0:
            return None
        r_ref = self.nu / scale
        a_ref = self.rho / self.log_x
        return (
            r_ref / 3.0 <= self.rho <= 3.0 * r_ref
            and a_ref / 3.0 <= self.alpha - 1.0 <= 3.0 * a_ref
        )


@dataclass(frozen=True)
class DensityEstimate:
    """log delta_nu(x) with the regime that produced it.

    error_scale is 1/nu_scale clamped into (0, 1]; e_nu back-solves the
    crude-bracket shape (e * scale)^(nu-1) / ((nu-1)! log x) when defined.
    """

    nu: int
    log_x: float
    log_delta: float
    regime: str  # saddle | smallNuSeries | landau | crude
    error_scale: float
    e_nu: float = float("nan")


@dataclass(frozen=True)
class HtParams:
    """Derived scalars of the large-nu density expansion."""

    L: float
    M: float
    R: float
    u: float
    mu: float
    w: float
    gamma: float


def log_phi(t: float) -> float:
    """log of Gamma(t) t^-t e^t."""
    if t <= 0.0:
        raise ValueError(f"phi undefined at t={t}")
    return lgamma(t) - t * log(t) + t


def _tail_gate(cfg: EulerProductConfig, err: float, scale: float, what: str):
    if err > cfg.tail_tolerance * max(1.0, abs(scale)):
        raise ConvergenceError(
            f"{what}: tail estimate {err:.3e} above tolerance "
            f"{cfg.tail_tolerance:.1e} at prime limit {cfg.prime_limit}"
        )


def _grow(cfg: EulerProductConfig) -> EulerProductConfig | None:
    nxt = cfg.prime_limit * 2
    return replace(cfg, prime_limit=nxt) if nxt <= _PRIME_LIMIT_CAP else None


def log_big_g(z: float, s: float, cfg: EulerProductConfig = DEFAULT_CONFIG) -> float:
    """log G(z, s) where G(z, s) = prod_p (1 + z/(p^s - 1)).

    Primes above the truncation contribute z * integral of t^-s / log t,
    i.e. z * E1((s-1) log P); the first omitted magnitude is second order
    and must clear the configured tolerance, else the limit is doubled.
    """
    if s <= 1.0:
        raise DivergenceError(f"G(z, s) diverges for s={s} <= 1")
    if z < 0.0:
        raise ValueError(f"z={z} must be >= 0")
    if z == 0.0:
        return 0.0
    while True:
        p, _ = _prime_arrays(cfg.prime_limit)
        main = float(np.sum(np.log1p(z / (np.exp(s * np.log(p)) - 1.0))))
        ln_p = log(cfg.prime_limit)
        tail = z * float(exp1((s - 1.0) * ln_p))
        err = (z + 0.5 * z * z) * float(exp1((2.0 * s - 1.0) * ln_p))
        if err <= cfg.tail_tolerance * max(1.0, abs(main + tail)):
            return main + tail
        bigger = _grow(cfg)
        if bigger is None:
            _tail_gate(cfg, err, main + tail, "log_big_g")
        cfg = bigger


def log_euler_h(s: float, cfg: EulerProductConfig = DEFAULT_CONFIG) -> float:
    """log H(s) for H(s) = Gamma(s+1)^-1 prod_p (1 + s/(p-1))(1 - 1/p)^s.

    The p-factor telescopes to 1 at s=1 and the tail coefficient s(1-s)/2
    vanishes there as well.
    """
    if s < 0.0:
        raise DivergenceError(f"H(s) requires s >= 0, got {s}")
    if s == 0.0:
        return 0.0
    while True:
        p, _ = _prime_arrays(cfg.prime_limit)
        terms = np.log1p(s / (p - 1.0)) + s * np.log1p(-1.0 / p)
        main = float(np.sum(terms))
        ln_p = log(cfg.prime_limit)
        tail = 0.5 * s * (1.0 - s) * float(exp1(ln_p))
        err = (s**3 + s * s + s) * float(exp1(2.0 * ln_p))
        if err <= cfg.tail_tolerance * max(1.0, abs(main + tail)):
            return main + tail - lgamma(s + 1.0)
        bigger = _grow(cfg)
        if bigger is None:
            _tail_gate(cfg, err, main + tail, "log_euler_h")
        cfg = bigger


def _saddle_system(r: float, a: float, cfg: EulerProductConfig):
    """Residuals and Jacobian of the stationarity system at (r, a).

    R1 = r * sum_p 1/(p^a - 1 + r)                         - nu   (caller adds)
    R2 = r * sum_p p^a log p / ((p^a - 1)(p^a - 1 + r))    - logx (caller adds)
    Tails use the logarithmic-integral prime density.  All prime terms are
    written in u = p^-a, which underflows harmlessly for large a where the
    p^a form would overflow.
    """
    p, logp = _prime_arrays(cfg.prime_limit)
    u = np.exp(-a * logp)  # p^-a, in (0, 1)
    one_m = 1.0 - u  # (p^a - 1) / p^a
    den = 1.0 - u + r * u  # (p^a - 1 + r) / p^a
    ln_p = log(cfg.prime_limit)

    s1 = float(np.sum(u / den))
    s2 = float(np.sum(logp * u / (one_m * den)))
    t1 = float(exp1((a - 1.0) * ln_p))  # ~ sum_{p > P} p^-a
    t2 = exp(-(a - 1.0) * ln_p) / (a - 1.0)  # ~ sum_{p > P} log p * p^-a

    f1 = r * (s1 + t1)
    f2 = r * (s2 + t2)

    ds1_dr = -float(np.sum((u / den) ** 2))
    ds1_da = -float(np.sum(logp * u / den**2))
    ds2_dr = -float(np.sum(logp * u * u / (one_m * den**2)))
    ds2_da = -float(
        np.sum(logp**2 * u * (1.0 + (r - 1.0) * u * u) / (one_m * den) ** 2)
    )
    dt1_da = -exp(-(a - 1.0) * ln_p) / (a - 1.0)
    dt2_da = t2 * (-ln_p - 1.0 / (a - 1.0))

    j11 = (s1 + t1) + r * ds1_dr  # dF1/dr
    j12 = r * (ds1_da + dt1_da)  # dF1/da
    j21 = (s2 + t2) + r * ds2_dr  # dF2/dr
    j22 = r * (ds2_da + dt2_da)  # dF2/da
    return f1, f2, j11, j12, j21, j22


def saddle_objective(
    r: float, a: float, nu: int, log_x: float, cfg: EulerProductConfig = DEFAULT_CONFIG
) -> float:
    """log G(r, a) + a log x - nu log r, the strictly convex-in-log target."""
    return log_big_g(r, a, cfg) + a * log_x - nu * log(r)


def _initial_guess(nu: int, log_x: float) -> tuple[float, float]:
    scale = nu_scale(nu, log_x)
    rho0 = nu / scale if scale > 0.3 else max(0.4 * nu, 0.5)
    alpha0 = 1.0 + max(rho0, 0.05) / log_x
    return rho0, alpha0


def _bisect_saddle(nu: int, log_x: float, cfg: EulerProductConfig):
    """Nested bisection fallback: F1 is increasing in r, F2(r*(a), a)
    decreasing in a, so both roots bracket cleanly."""

    def r_root(a: float) -> float:
        lo, hi = 1e-12, max(float(nu), 1.0)
        while _saddle_system(hi, a, cfg)[0] < nu:
            hi *= 2.0
            if hi > 1e12:
                raise ConvergenceError(f"no r-bracket at a={a}")
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            if _saddle_system(mid, a, cfg)[0] < nu:
                lo = mid
            else:
                hi = mid
            if hi / lo < 1.0 + 1e-15:
                break
        return math.sqrt(lo * hi)

    def g(a: float) -> float:
        return _saddle_system(r_root(a), a, cfg)[1] - log_x

    a_lo, a_hi = 1.0 + 1e-12, 1.0 + 1e-6
    while g(a_hi) > 0.0:
        a_hi = 1.0 + (a_hi - 1.0) * 4.0
        if a_hi > 64.0:
            raise ConvergenceError("no a-bracket for the saddle system")
    for _ in range(200):
        mid = 1.0 + math.sqrt((a_lo - 1.0) * (a_hi - 1.0))
        if g(mid) > 0.0:
            a_lo = mid
        else:
            a_hi = mid
        if (a_hi - 1.0) / (a_lo - 1.0) < 1.0 + 1e-15:
            break
    a = 1.0 + math.sqrt((a_lo - 1.0) * (a_hi - 1.0))
    return r_root(a), a


def solve_saddle(
    nu: int, log_x: float, cfg: EulerProductConfig = DEFAULT_CONFIG
) -> SaddlePoint:
    """Damped Newton on (log r, log(a-1)) for the stationarity system.

    Falls back to nested bisection when a Newton step cannot reduce the
    residual; the system is ill-conditioned as a -> 1+.
    """
    if nu < 1:
        raise ValueError(f"nu={nu} must be >= 1")
    if log_x < 10.0:
        raise ValueError(f"log x = {log_x} < 10")
    if nu * log(2.0) >= log_x:
        raise ValueError(f"nu={nu} too large: no integer below x has that many primes")

    r, a = _initial_guess(nu, log_x)
    iterations = 0
    fell_back = False
    for _ in range(cfg.max_newton_iterations):
        iterations += 1
        f1, f2, j11, j12, j21, j22 = _saddle_system(r, a, cfg)
        r1, r2 = f1 - nu, f2 - log_x
        norm = max(abs(r1), abs(r2))
        if norm <= cfg.newton_tolerance:
            return SaddlePoint(
                nu=nu,
                log_x=log_x,
                rho=r,
                alpha=a,
                residual_r=r1,
                residual_a=r2,
                iterations=iterations,
                truncation=cfg,
            )
        # Newton in u = log r, v = log(a - 1)
        m11, m12 = j11 * r, j12 * (a - 1.0)
        m21, m22 = j21 * r, j22 * (a - 1.0)
        det = m11 * m22 - m12 * m21
        if det == 0.0 or not math.isfinite(det):
            if fell_back:
                raise ConvergenceError("singular Jacobian", last=(r, a))
            r, a = _bisect_saddle(nu, log_x, cfg)
            fell_back = True
            continue
        du = (-r1 * m22 + r2 * m12) / det
        dv = (-m11 * r2 + m21 * r1) / det
        step = 1.0
        improved = False
        for _ in range(50):
            r_new = r * exp(step * du)
            a_new = 1.0 + (a - 1.0) * exp(step * dv)
            g1, g2, *_ = _saddle_system(r_new, a_new, cfg)
            if max(abs(g1 - nu), abs(g2 - log_x)) < norm:
                r, a = r_new, a_new
                improved = True
                break
            step *= 0.5
        if not improved:
            if fell_back:
                break
            r, a = _bisect_saddle(nu, log_x, cfg)
            fell_back = True
    f1, f2, *_ = _saddle_system(r, a, cfg)
    r1, r2 = f1 - nu, f2 - log_x
    if max(abs(r1), abs(r2)) <= cfg.newton_tolerance:
        return SaddlePoint(nu, log_x, r, a, r1, r2, iterations, cfg)
    raise ConvergenceError(
        f"saddle solver stalled at residuals ({r1:.2e}, {r2:.2e}) "
        f"for nu={nu}, log x={log_x:.3f}",
        last=(r, a),
    )


def _error_scale(nu: int, log_x: float) -> float:
    scale = nu_scale(nu, log_x)
    return min(1.0, 1.0 / scale) if scale > 0.0 else 1.0


def _back_solve_e(nu: int, log_x: float, log_delta: float) -> float:
    if nu < 2:
        return float("nan")
    scale = nu_scale(nu, log_x)
    if scale <= 0.0:
        return float("nan")
    return exp((log_delta + lgamma(nu) + log(log_x)) / (nu - 1)) / scale


def density_ht(
    nu: int, log_x: float, cfg: EulerProductConfig = DEFAULT_CONFIG
) -> DensityEstimate:
    """The saddle-point density: log delta = log G(rho, alpha)
    + (alpha-1) log x - nu log rho - log nu - log phi(nu) - log phi(rho)
    - log log x."""
    sp = solve_saddle(nu, log_x, cfg)
    log_delta = (
        log_big_g(sp.rho, sp.alpha, cfg)
        + (sp.alpha - 1.0) * log_x
        - nu * log(sp.rho)
        - log(nu)
        - log_phi(nu)
        - log_phi(sp.rho)
        - log(log_x)
    )
    return DensityEstimate(
        nu=nu,
        log_x=log_x,
        log_delta=log_delta,
        regime="saddle",
        error_scale=_error_scale(nu, log_x),
        e_nu=_back_solve_e(nu, log_x, log_delta),
    )


def density_small_nu(
    nu: int, log_x: float, cfg: EulerProductConfig = DEFAULT_CONFIG
) -> DensityEstimate:
    """Series form for nu below (log log x)^2:
    delta ~ (log log x)^nu / (nu! log x) * rho H(rho) exp(nu (g - log(1+g)))
    with g = (rho - u)/u, u = nu / log log x."""
    llx = log2x(log_x)
    if not 1 <= nu < llx * llx:
        raise ValueError(f"nu={nu} outside the series regime nu < (log log x)^2")
    rho = solve_saddle(nu, log_x, cfg).rho
    u = nu / llx
    gamma = (rho - u) / u
    if gamma <= -1.0:
        raise ValueError(f"pathological rho={rho}: gamma={gamma} <= -1")
    log_delta = (
        nu * log(llx)
        - lgamma(nu + 1.0)
        - log(log_x)
        + log(rho)
        + log_euler_h(rho, cfg)
        + nu * (gamma - math.log1p(gamma))
    )
    return DensityEstimate(
        nu=nu,
        log_x=log_x,
        log_delta=log_delta,
        regime="smallNuSeries",
        error_scale=_error_scale(nu, log_x),
        e_nu=_back_solve_e(nu, log_x, log_delta),
    )


def density_landau(nu: int, log_x: float) -> DensityEstimate:
    """Landau's density: log s_nu = (nu-1) log(log log x) - log (nu-1)!
    - log log x."""
    if nu < 1:
        raise ValueError(f"nu={nu} must be >= 1")
    log_delta = (nu - 1) * log(log2x(log_x)) - lgamma(nu) - log(log_x)
    return DensityEstimate(
        nu=nu,
        log_x=log_x,
        log_delta=log_delta,
        regime="landau",
        error_scale=_error_scale(nu, log_x),
    )


def density_crude_bounds(
    nu: int,
    log_x: float,
    e_lo: float = 0.5,
    e_hi: float = 2.0,
) -> tuple[float, float]:
    """log-space bracket ((e +- scale)^(nu-1) / ((nu-1)! log x)).

    The bracket constants stand in for an unspecified 1+o(1) factor; they
    are a reporting device, not a certified enclosure.
    """
    scale = nu_scale(nu, log_x)
    if scale <= 0.0:
        raise ValueError(
            f"nu_scale({nu}) = {scale:.4f} <= 0 at log x={log_x:.3f}: "
            "crude bracket undefined"
        )
    base = -lgamma(nu) - log(log_x)
    return (
        base + (nu - 1) * log(e_lo * scale),
        base + (nu - 1) * log(e_hi * scale),
    )


def density_homothety(nu: int, log_x: float, m: int) -> float:
    """Main-term prediction of log(delta_nu(m x) / delta_nu(x)):
    (nu/scale - 1) * log(log(m x)/log x)."""
    if m < 1:
        raise ValueError(f"m={m} must be >= 1")
    scale = nu_scale(nu, log_x)
    if scale <= 0.0:
        raise ValueError(f"nu_scale({nu}) <= 0: homothety prediction undefined")
    return (nu / scale - 1.0) * log((log_x + log(m)) / log_x)


def ht_parameters(nu: int, log_x: float, rho: float, c_const: float = 1.0) -> HtParams:
    """The derived scalars (L, M, R, u, mu, w, gamma) of the density expansion.

    The absolute constant inside M is not pinned down anywhere; c_const=1 is
    a diagnostic default and M shifts by log(c) under c_const=c.
    """
    scale = nu_scale(nu, log_x)
    if scale <= 0.0:
        raise ValueError(f"nu_scale({nu}) = {scale:.4f} <= 0 at log x={log_x:.3f}")
    llx = log2x(log_x)
    u = nu / llx
    mu = nu / scale
    w = log_x / (mu * log(mu + 2.0))
    m_val = log(c_const * w * log(w) / scale) if w > 1.0 else float("nan")
    r_val = 1.0 / (scale * log(mu + 2.0)) + 1.0 / scale**2
    gamma = (rho - u) / u
    return HtParams(L=scale, M=m_val, R=r_val, u=u, mu=mu, w=w, gamma=gamma)
