r"""Wright and Mainardi functions on the real line.

The Wright function is the entire series

.. math::

    W(z; \rho, \beta) = \sum_{k \ge 0} \frac{z^k}{k!\, \Gamma(\rho k + \beta)},
    \qquad \rho > -1,

and the Mainardi function is :math:`M_\nu(z) = W(-z; -\nu, 1 - \nu)`.

Two evaluation routes are used:

* the power series, summed with Neumaier compensation, whenever the sum of
  the absolute values of its terms is small enough that rounding stays
  below the requested tolerance;
* for negative arguments with :math:`-1/2 \le \rho \le 0` (the only regime
  the Stefan solution needs) a Bromwich integral of the Laplace pair
  :math:`s^{-\beta} e^{-x s^{\nu}}` along a fixed hyperbolic contour.

The series alone cannot cover :math:`|z| \le 50`: for :math:`\rho = -1/2` the
absolute terms at :math:`z = -50` add up to about :math:`10^{270}`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import rgamma

from fracstefan.errors import DomainError, NonConvergence

__all__ = [
    "EvalDomain",
    "WrightParams",
    "DEFAULT_DOMAIN",
    "reciprocal_gamma",
    "wright",
    "wright_dz",
    "mainardi",
    "erf_ref",
    "erfc_ref",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class WrightParams:
    """Parameter pair ``(rho, beta)`` of the Wright series."""

    rho: float
    beta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rho) and math.isfinite(self.beta)):
            raise DomainError(f"non-finite Wright parameters {self!r}")
        if self.rho <= -1.0:
            raise DomainError(f"rho must be > -1 (got {self.rho})")


@dataclass(frozen=True)
class EvalDomain:
    """Certified evaluation box for the Wright routines."""

    z_max: float = 50.0
    tol: float = 1e-14
    max_terms: int = 10_000

    def __post_init__(self) -> None:
        if not self.z_max > 0:
            raise ValueError("z_max must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_DOMAIN = EvalDomain()


def reciprocal_gamma(x):
    """Return ``1/Gamma(x)``; exactly zero at the poles ``0, -1, -2, ...``."""
    out = rgamma(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


# {{{ series


def _series(z: np.ndarray, rho: float, beta: float, d: EvalDomain, abs_cap: np.ndarray):
    """Sum the series for each entry of ``z``.

    Returns ``(value, abs_sum, ok)`` where ``ok`` is False for entries whose absolute
    term sum exceeded ``abs_cap`` (rounding would swamp ``d.tol``); those
    entries are abandoned early and their value is meaningless.
    """
    n = z.size
    s = np.full(n, float(rgamma(beta)))
    comp = np.zeros(n)
    pw = np.ones(n)
    abs_sum = np.abs(s)
    peak = np.abs(s)
    peak_k = np.zeros(n, dtype=int)
    small = np.zeros(n, dtype=int)
    active = np.ones(n, dtype=bool)
    ok = np.ones(n, dtype=bool)

    k = 0
    while active.any():
        k += 1
        if k > d.max_terms:
            raise NonConvergence(
                f"Wright series not converged after {d.max_terms} terms "
                f"(rho={rho}, beta={beta})"
            )
        idx = np.flatnonzero(active)
        pw[idx] *= z[idx] / k
        term = pw[idx] * float(rgamma(rho * k + beta))

        # Neumaier two-sum
        t = s[idx] + term
        big = np.abs(s[idx]) >= np.abs(term)
        comp[idx] += np.where(big, (s[idx] - t) + term, (term - t) + s[idx])
        s[idx] = t

        a = np.abs(term)
        abs_sum[idx] += a
        up = a > peak[idx]
        peak[idx[up]] = a[up]
        peak_k[idx[up]] = k

        tiny = a < d.tol * np.maximum(1.0, np.abs(s[idx]))
        small[idx] = np.where(tiny, small[idx] + 1, 0)

        done = (small[idx] >= 3) & (k > peak_k[idx])
        blown = (abs_sum[idx] > abs_cap[idx]) | ~np.isfinite(abs_sum[idx])
        ok[idx[blown]] = False
        active[idx[done | blown]] = False

    return s + comp, abs_sum, ok


# }}}


# {{{ contour


def _hyperbolic_nodes(n: int = 40, mu_per_node: float = 1.5, delta: float = 1.35,
                      h_scale: float = 1.2):
    # z(u) = mu (1 + sin(iu - delta)); the contour is symmetric, so only
    # u >= 0 is kept and the k > 0 nodes are counted twice.
    h = h_scale / n
    u = np.arange(n + 1) * h
    mu = mu_per_node * n
    zk = mu * (1.0 + np.sin(1j * u - delta))
    dzk = mu * 1j * np.cos(1j * u - delta)
    w = np.full(n + 1, 2.0)
    w[0] = 1.0
    return zk, dzk * w * h / (2.0 * np.pi)


_NODES, _WEIGHTS = _hyperbolic_nodes()
_CHUNK = 8192


def _contour(x: np.ndarray, nu: float, beta: float) -> np.ndarray:
    """``W(-x; -nu, beta)`` for ``x >= 0``, ``0 <= nu <= 1/2``, ``beta > 0``."""
    logz = np.log(_NODES)
    znu = np.exp(nu * logz)
    base = _NODES - beta * logz
    out = np.empty(x.shape)
    for lo in range(0, x.size, _CHUNK):
        xc = x[lo : lo + _CHUNK, None]
        out[lo : lo + _CHUNK] = (np.exp(base - xc * znu) * _WEIGHTS).imag.sum(axis=1)
    return out


# }}}


def _evaluate(z, p: WrightParams, d: EvalDomain, clip_tail: bool):
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    zf = np.atleast_1d(z).ravel()
    if not np.isfinite(zf).all():
        raise DomainError("Wright argument must be finite")

    decaying = -0.5 <= p.rho <= 0.0 and p.beta > 0.0
    out = np.zeros(zf.shape)
    outside = np.abs(zf) > d.z_max
    if outside.any():
        if not (clip_tail and decaying and (zf[outside] < 0).all()):
            raise DomainError(
                f"|z| = {np.abs(zf).max():g} exceeds certified bound z_max = {d.z_max:g}"
            )
        # W(-x) decays faster than exp(-x) here; at x = 50 it is below 1e-20.

    inside = ~outside
    if inside.any():
        zi = zf[inside]
        cap = np.where(decaying & (zi < 0), d.tol / (4.0 * _EPS), np.inf)
        with np.errstate(over="ignore", invalid="ignore"):
            val, abs_sum, ok = _series(zi, p.rho, p.beta, d, cap)
        if not ok.all():
            if not (decaying and (zi[~ok] < 0).all()):
                raise NonConvergence(
                    f"Wright series overflowed (rho={p.rho}, beta={p.beta}); "
                    "no fallback outside -1/2 <= rho <= 0"
                )
            val[~ok] = _contour(-zi[~ok], -p.rho, p.beta)
        lossy = ok & (4.0 * _EPS * abs_sum > 1e-6 * np.maximum(1.0, np.abs(val)))
        if lossy.any():
            raise DomainError(
                f"cancellation leaves fewer than 6 digits at z = {zi[lossy][0]:g} "
                f"(rho={p.rho}, beta={p.beta})"
            )
        out[inside] = val

    out = out.reshape(np.shape(z)) if not scalar else out[0]
    return float(out) if scalar else out


def wright(z, p: WrightParams, d: EvalDomain = DEFAULT_DOMAIN, *, clip_tail: bool = False):
    """Evaluate ``W(z; p.rho, p.beta)`` for real ``z`` (scalar or array).

    ``clip_tail=True`` returns 0 instead of raising for ``z < -d.z_max`` when
    the function is known to decay there (``-1/2 <= rho <= 0``, ``beta > 0``).
    """
    return _evaluate(z, p, d, clip_tail)


def wright_dz(z, p: WrightParams, d: EvalDomain = DEFAULT_DOMAIN, *, clip_tail: bool = False):
    """Derivative in ``z``: ``W(z; rho, rho + beta)``."""
    return _evaluate(z, WrightParams(p.rho, p.rho + p.beta), d, clip_tail)


def mainardi(z, rho: float, d: EvalDomain = DEFAULT_DOMAIN, *, clip_tail: bool = False):
    """Mainardi function ``M_rho(z) = W(-z; -rho, 1 - rho)``."""
    if not rho < 1:
        raise DomainError(f"Mainardi order must be < 1 (got {rho})")
    return _evaluate(-np.asarray(z, dtype=float), WrightParams(-rho, 1.0 - rho), d, clip_tail)


def erf_ref(x):
    """Error function from libm, kept independent of the Wright series."""
    if np.ndim(x) == 0:
        return math.erf(float(x))
    return np.vectorize(math.erf, otypes=[float])(x)


def erfc_ref(x):
    """Complementary error function from libm."""
    if np.ndim(x) == 0:
        return math.erfc(float(x))
    return np.vectorize(math.erfc, otypes=[float])(x)
