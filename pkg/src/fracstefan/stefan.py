r"""Similarity solution of the one-phase fractional Stefan problem.

With unit diffusivity and latent-heat constant, temperature 1 at the fixed
face and an initially empty domain, the problem

.. math::

    u_t = \partial_x\left({}^{RL}D_t^{1-\alpha} u_x\right), \quad
    u(0, t) = 1, \quad u(s(t), t) = 0, \quad
    \dot s(t) = -\left.{}^{RL}D_t^{1-\alpha} u_x\right|_{x = s(t)}

has the solution

.. math::

    u(x, t) = 1 - \frac{1 - W(-x t^{-\alpha/2}; -\alpha/2, 1)}{D}, \qquad
    s(t) = 2 \xi t^{\alpha/2}, \qquad D = 1 - W(-2\xi; -\alpha/2, 1),

where :math:`\xi` is the unique positive root of

.. math::

    F(x) = 2x\,[1 - 2 W(-2x; -\alpha/2, 1)] - W(-2x; -\alpha/2, 1 + \alpha/2).

Signs: ``fractional_flux`` returns the Riemann--Liouville derivative of
:math:`u_x` itself, which is negative because :math:`u` decreases in
:math:`x`; the interface law is then :math:`\dot s + \text{flux} = 0`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import rgamma

from fracstefan.errors import DomainError, NonConvergence
from fracstefan.wright import DEFAULT_DOMAIN, EvalDomain, WrightParams, erf_ref, wright

__all__ = [
    "SimilaritySolution",
    "xi_residual",
    "xi_residual_derivative",
    "solve_xi",
    "classical_xi",
    "classical_residual",
    "temperature",
    "in_domain",
    "free_boundary",
    "free_boundary_velocity",
    "fractional_flux",
    "rl_derivative_temperature",
    "auxiliary_v",
]


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha out of (0,1] (got {alpha})")
    return alpha


def _w(y, alpha: float, beta: float, d: EvalDomain = DEFAULT_DOMAIN):
    # W(-y; -alpha/2, beta); past -z_max the function is negligibly small
    return wright(-np.asarray(y, dtype=float), WrightParams(-alpha / 2.0, beta), d, clip_tail=True)


@dataclass(frozen=True)
class SimilaritySolution:
    """Root ``xi`` and coefficient ``denom = 1 - W(-2 xi; -alpha/2, 1)``."""

    alpha: float
    xi: float
    denom: float
    residual: float = 0.0

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if not self.xi > 0:
            raise DomainError(f"xi must be positive (got {self.xi})")
        if not 0.0 < self.denom < 1.0:
            raise DomainError(f"denominator must lie in (0, 1) (got {self.denom})")

    @classmethod
    def from_xi(cls, alpha: float, xi: float) -> SimilaritySolution:
        return cls(alpha, xi, 1.0 - _w(2.0 * xi, alpha, 1.0), xi_residual(xi, alpha))


# {{{ root


def xi_residual(x, alpha: float):
    """``H(2x) - G(2x)``; negative at 0, strictly increasing, zero at ``xi``.

    Accepts a scalar or an array of ``x >= 0``.
    """
    alpha = _check_alpha(alpha)
    xa = np.asarray(x, dtype=float)
    if not np.all(xa >= 0):
        raise DomainError(f"xi residual needs x >= 0 (got {x})")
    y = 2.0 * xa
    w1 = _w(y, alpha, 1.0)
    out = y * (1.0 - 2.0 * w1) - _w(y, alpha, 1.0 + alpha / 2.0)
    return float(out) if out.ndim == 0 else out


def xi_residual_derivative(x: float, alpha: float) -> float:
    """``dF/dx = 2 [1 - W(-2x; 1) + 4x M_{alpha/2}(2x)]``."""
    alpha = _check_alpha(alpha)
    y = 2.0 * x
    m = _w(y, alpha, 1.0 - alpha / 2.0)
    return float(2.0 * (1.0 - _w(y, alpha, 1.0) + 2.0 * y * m))


def classical_residual(x: float) -> float:
    """``sqrt(pi) x exp(x**2) erf(x) - 1``, the Neumann condition for ``xi``."""
    return math.sqrt(math.pi) * x * math.exp(x * x) * erf_ref(x) - 1.0


def _bisect(f, lo: float, hi: float, tol: float) -> float:
    flo = f(lo)
    while True:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol or mid in (lo, hi):
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid


def classical_xi(tol: float = 1e-12) -> float:
    """Root of ``sqrt(pi) x exp(x**2) erf(x) = 1`` by bisection (about 0.620063)."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    return _bisect(classical_residual, 0.0, 1.0, tol)


def solve_xi(alpha: float, tol: float = 1e-12) -> SimilaritySolution:
    """Solve ``F(xi) = 0`` by bracketing, bisection to width 1e-6, then Newton.

    Raises :class:`NonConvergence` only if the bisection fallback cannot reach
    ``tol`` either.
    """
    alpha = _check_alpha(alpha)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if alpha == 1.0:
        return SimilaritySolution.from_xi(1.0, classical_xi(tol))

    def f(x):
        return xi_residual(x, alpha)

    lo, hi = 0.0, 1.0
    while f(hi) <= 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e3:
            raise NonConvergence(f"no sign change of the xi residual below {hi}")

    lo_b, hi_b = lo, hi
    flo = f(lo)
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid

    x = 0.5 * (lo + hi)
    for _ in range(50):
        fx = f(x)
        if abs(fx) <= tol:
            return SimilaritySolution.from_xi(alpha, x)
        x_new = x - fx / xi_residual_derivative(x, alpha)
        if not lo_b < x_new < hi_b:
            break
        if x_new == x:
            break
        x = x_new

    x = _bisect(f, lo_b, hi_b, tol)
    if abs(f(x)) > tol:
        raise NonConvergence(f"xi residual {f(x):.3e} above tolerance {tol:.1e}")
    return SimilaritySolution.from_xi(alpha, x)


# }}}


# {{{ evaluators


def _positive_time(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if (t <= 0).any():
        raise DomainError("the similarity solution is evaluated for t > 0 only")
    return t


def free_boundary(sol: SimilaritySolution, t):
    """Interface position ``s(t) = 2 xi t**(alpha/2)``."""
    t = np.asarray(t, dtype=float)
    if (t < 0).any():
        raise DomainError("free boundary needs t >= 0")
    out = 2.0 * sol.xi * t ** (sol.alpha / 2.0)
    return float(out) if out.ndim == 0 else out


def free_boundary_velocity(sol: SimilaritySolution, t):
    """``s'(t) = alpha xi t**(alpha/2 - 1)``."""
    t = _positive_time(t)
    out = sol.alpha * sol.xi * t ** (sol.alpha / 2.0 - 1.0)
    return float(out) if out.ndim == 0 else out


def in_domain(sol: SimilaritySolution, x, t):
    """True where ``0 <= x <= s(t)``; elsewhere evaluators extrapolate."""
    x = np.asarray(x, dtype=float)
    return (x >= 0) & (x <= free_boundary(sol, t) * (1 + 1e-14))


def temperature(sol: SimilaritySolution, x, t):
    """``u(x, t)``; equals 1 at ``x = 0`` and 0 at the interface."""
    t = _positive_time(t)
    eta = np.asarray(x, dtype=float) / t ** (sol.alpha / 2.0)
    out = 1.0 - (1.0 - _w(eta, sol.alpha, 1.0)) / sol.denom
    return float(out) if np.ndim(out) == 0 else out


def fractional_flux(sol: SimilaritySolution, x, t):
    """Riemann--Liouville derivative of order ``1 - alpha`` in time of ``u_x``."""
    t = _positive_time(t)
    x = np.asarray(x, dtype=float)
    a = sol.alpha
    eta = x / t ** (a / 2.0)
    bracket = (x / t) * _w(eta, a, 1.0) + t ** (a / 2.0 - 1.0) * _w(eta, a, 1.0 + a / 2.0)
    out = -(a / 2.0) / sol.denom * bracket
    return float(out) if np.ndim(out) == 0 else out


def rl_derivative_temperature(sol: SimilaritySolution, x, t):
    """Riemann--Liouville derivative of order ``1 - alpha`` in time of ``u``."""
    t = _positive_time(t)
    x = np.asarray(x, dtype=float)
    a = sol.alpha
    eta = x / t ** (a / 2.0)
    const = (1.0 - 1.0 / sol.denom) * t ** (a - 1.0) * rgamma(a)
    moving = a * t ** (a - 1.0) * _w(eta, a, 1.0 + a) + (a / 2.0) * x * t ** (a / 2.0 - 1.0) * _w(
        eta, a, 1.0 + a / 2.0
    )
    out = const + moving / sol.denom
    return float(out) if np.ndim(out) == 0 else out


def auxiliary_v(sol: SimilaritySolution, x, t):
    """Potential ``v`` with ``v_x = -u`` and ``v_t = -fractional_flux``."""
    t = _positive_time(t)
    x = np.asarray(x, dtype=float)
    a = sol.alpha
    eta = x / t ** (a / 2.0)
    out = -(1.0 - 1.0 / sol.denom) * x + t ** (a / 2.0) / sol.denom * _w(eta, a, 1.0 + a / 2.0)
    return float(out) if np.ndim(out) == 0 else out


# }}}
