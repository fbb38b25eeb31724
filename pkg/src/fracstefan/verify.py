r"""Numerical verification of the similarity solution.

The central identity is the integral form of the free-boundary condition,
which for the problem solved in :mod:`fracstefan.stefan` (no initial liquid
region, unit face temperature) reads

.. math::

    s^2(t) = 2\int_0^t {}^{RL}D^{1-\alpha} 1\,d\tau
             - 2\int_0^{s(t)} z\,u(z, t)\,dz
             - 2\int_0^t \left.{}^{RL}D^{1-\alpha} u\right|_{x = s(\tau)} d\tau .

It is checked twice: once from Wright-function closed forms of every term and
once by quadrature on sampled signals. The remaining checks are residuals of
the field equation (Riemann--Liouville and Caputo forms), the Stefan condition
and the approach to the classical Neumann solution as ``alpha -> 1``.

All residuals are relative. Tolerances of the numerical checks come from the
convergence tables in ``docs/convergence.md``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import rgamma

from fracstefan.errors import DomainError, SingularityWarning
from fracstefan.fracops import (
    SampledSignal,
    TemporalMesh,
    caputo_derivative,
    rl_derivative,
    rl_derivative_nodes,
    rl_power_rule,
)
from fracstefan.stefan import (
    SimilaritySolution,
    classical_xi,
    fractional_flux,
    free_boundary,
    free_boundary_velocity,
    rl_derivative_temperature,
    solve_xi,
    temperature,
)
from fracstefan.wright import WrightParams, erf_ref, erfc_ref, mainardi, wright

__all__ = [
    "METHODS",
    "Budgets",
    "VerificationEntry",
    "VerificationReport",
    "integral_terms",
    "integral_relationship_closed_form",
    "integral_relationship_quadrature",
    "fde_residual",
    "caputo_cross_check",
    "stefan_condition_residual",
    "run_suite",
]

METHODS = ("closed_form", "quadrature", "finite_difference")
REPORT_VERSION = 1

DEFAULT_ALPHAS = (0.25, 0.5, 0.75, 1.0)
DEFAULT_TS = (0.5, 1.0, 2.0)
LIMIT_ALPHAS = (0.9, 0.99, 0.999)


# {{{ report


@dataclass(frozen=True)
class VerificationEntry:
    name: str
    alpha: float | None
    t: float | str | None
    residual: float
    tolerance: float
    method: str
    error: str | None = None
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        ok = math.isfinite(self.residual) and self.residual <= self.tolerance
        object.__setattr__(self, "passed", bool(ok))

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "alpha": self.alpha,
            "t": self.t,
            "residual": self.residual if math.isfinite(self.residual) else None,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "method": self.method,
        }
        if self.error is not None or not math.isfinite(self.residual):
            d["error"] = self.error or f"non-finite residual {self.residual!r}"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> VerificationEntry:
        res = d["residual"]
        entry = cls(
            name=d["name"],
            alpha=d["alpha"],
            t=d["t"],
            residual=math.inf if res is None else float(res),
            tolerance=float(d["tolerance"]),
            method=d["method"],
            error=d.get("error"),
        )
        if entry.passed != d["passed"]:
            raise ValueError(f"inconsistent 'passed' flag for entry {d['name']!r}")
        return entry


@dataclass
class VerificationReport:
    """Ordered list of checks plus the configuration that produced them."""

    config: dict = field(default_factory=dict)
    entries: list[VerificationEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list[VerificationEntry]:
        return [e for e in self.entries if not e.passed]

    def __len__(self) -> int:
        return len(self.entries)

    def to_json(self) -> str:
        doc = {
            "version": REPORT_VERSION,
            "config": self.config,
            "entries": [e.to_dict() for e in self.entries],
        }
        # json writes floats with repr, i.e. the shortest round-trip form
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> VerificationReport:
        doc = json.loads(text)
        if doc.get("version") != REPORT_VERSION:
            raise ValueError(f"unsupported report version {doc.get('version')!r}")
        return cls(doc["config"], [VerificationEntry.from_dict(d) for d in doc["entries"]])

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["name", "alpha", "t", "residual", "tolerance", "passed", "method", "error"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for e in self.entries:
            d = e.to_dict()
            w.writerow(["" if d.get(c) is None else _fmt(d[c]) for c in cols])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


# }}}


# {{{ closed-form checks


def stefan_condition_residual(sol: SimilaritySolution, t: float) -> float:
    """``|s'(t) + flux(s(t), t)| / |s'(t)|``."""
    v = free_boundary_velocity(sol, t)
    return abs(v + fractional_flux(sol, free_boundary(sol, t), t)) / abs(v)


def _w2xi(sol: SimilaritySolution, beta: float) -> float:
    return wright(-2.0 * sol.xi, WrightParams(-sol.alpha / 2.0, beta))


def integral_terms(sol: SimilaritySolution, t: float) -> dict[str, float]:
    """Closed forms of the three integrals in the identity.

    Keys: ``source`` (time integral of the RL derivative of the face
    temperature), ``interface`` (time integral of the RL derivative of ``u``
    along the interface), ``moment`` (first moment of ``u`` over the liquid).
    """
    if not t > 0:
        raise DomainError(f"t must be positive (got {t})")
    a, xi, d = sol.alpha, sol.xi, sol.denom
    ta = t**a
    g1a = float(rgamma(1.0 + a))
    w_half = _w2xi(sol, 1.0 + a / 2.0)
    w_full = _w2xi(sol, 1.0 + a)
    source = ta * g1a
    interface = (1.0 - 1.0 / d) * ta * g1a + ta / d * (w_half * xi + w_full)
    moment = (
        2.0 * xi**2 * ta * (1.0 - 1.0 / d)
        - w_full * ta / d
        - 2.0 * xi * ta / d * w_half
        + ta * g1a / d
    )
    return {"source": source, "interface": interface, "moment": moment}


def integral_relationship_closed_form(sol: SimilaritySolution, t: float) -> float:
    """Relative residual of the integral identity with every term in closed form."""
    terms = integral_terms(sol, t)
    lhs = free_boundary(sol, t) ** 2
    rhs = 2.0 * terms["source"] - 2.0 * terms["interface"] - 2.0 * terms["moment"]
    return abs(lhs - rhs) / lhs


def classical_relationship_gap(sol: SimilaritySolution, t: float) -> float:
    """Residual of the ``alpha = 1`` identity ``s^2 = 2t - 2 int z u dz`` for ``sol``.

    Zero for the Neumann solution; measures how far a fractional solution is
    from satisfying the classical law.
    """
    m = integral_terms(sol, t)["moment"]
    lhs = free_boundary(sol, t) ** 2
    return abs(lhs - (2.0 * t - 2.0 * m)) / lhs


# }}}


# {{{ quadrature path


_GL_X, _GL_W = np.polynomial.legendre.leggauss(3)


def _moment_quadrature(sol: SimilaritySolution, t: float, nx: int) -> float:
    # composite 3-point Gauss-Legendre on nx equal panels of [0, s(t)]
    s = free_boundary(sol, t)
    edges = np.linspace(0.0, s, nx + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    z = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return float(np.sum(w * z * temperature(sol, z, t)))


def _time_integral(mesh: TemporalMesh, q: np.ndarray, alpha: float) -> float:
    """Trapezoidal rule in ``sigma = i / n`` for an integrand ``~ t**(alpha - 1)``.

    With ``t = T sigma**g`` the substituted integrand ``q dt/dsigma`` behaves
    like ``sigma**(g alpha - 1)``, which is bounded (and vanishes at 0) once
    ``g alpha > 1``; otherwise the first panel falls back to its right-end value.
    """
    g = mesh.grading
    sigma = np.arange(len(mesh)) / mesh.n
    f = np.empty(len(mesh))
    f[1:] = q[1:] * mesh.T * g * sigma[1:] ** (g - 1.0)
    if alpha == 1.0 and np.isfinite(q[0]):
        f[0] = q[0] * mesh.T * g * (1.0 if g == 1.0 else 0.0)
    elif g * alpha > 1.0:
        f[0] = 0.0
    else:
        f[0] = f[1]
    return float(np.sum(0.5 * (f[1:] + f[:-1])) / mesh.n)


def _u_at_rest(sol: SimilaritySolution) -> float:
    # limit of u(x, t) as t -> 0+ for fixed x > 0
    return 1.0 - 1.0 / sol.denom


def _interface_rl_numeric(sol: SimilaritySolution, mesh: TemporalMesh) -> np.ndarray:
    """``RL D^(1-alpha) u(x, .)`` at ``(s(t_j), t_j)`` from sampled signals."""
    t = mesh.nodes
    n = mesh.n
    mu = 1.0 - sol.alpha
    s = free_boundary(sol, t)
    out = np.full(n + 1, np.nan)
    row = np.empty(n + 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SingularityWarning)
        for j in range(1, n + 1):
            m = min(j + 1, n)
            row[0] = _u_at_rest(sol)
            row[1 : m + 1] = temperature(sol, s[j], t[1 : m + 1])
            row[m + 1 :] = 0.0  # never read by the stencil at node j
            out[j] = rl_derivative(SampledSignal(mesh, row), mu, j)
    return out


def integral_relationship_quadrature(
    sol: SimilaritySolution,
    t: float,
    mesh: TemporalMesh,
    nx: int,
    *,
    interface: str = "numeric",
) -> float:
    """Relative residual of the integral identity evaluated by quadrature.

    The source and interface integrands are RL derivatives computed by
    :mod:`fracstefan.fracops` on signals sampled on ``mesh``, then integrated
    in time by the trapezoidal rule (the first panel, where the integrand
    blows up like ``t**(alpha - 1)``, uses its right-end value). With
    ``interface="closed_form"`` the interface integrand is sampled from its
    closed form instead. The moment integral uses composite Gauss--Legendre
    on ``nx`` panels.
    """
    if not math.isclose(t, mesh.T, rel_tol=1e-12):
        raise DomainError(f"t = {t} must equal the mesh end time {mesh.T}")
    if nx < 16:
        raise DomainError(f"nx must be >= 16 (got {nx})")
    if interface not in ("numeric", "closed_form"):
        raise ValueError(f"unknown interface mode {interface!r}")
    mu = 1.0 - sol.alpha
    nodes = mesh.nodes

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SingularityWarning)
        q_src = rl_derivative_nodes(SampledSignal(mesh, np.ones(len(mesh))), mu)
    if sol.alpha < 1.0:
        q_src[0] = np.nan

    if interface == "numeric":
        q_int = _interface_rl_numeric(sol, mesh)
    else:
        q_int = np.full(len(mesh), np.nan)
        q_int[1:] = rl_derivative_temperature(sol, free_boundary(sol, nodes[1:]), nodes[1:])
    if sol.alpha == 1.0:
        q_int[0] = 0.0

    src = _time_integral(mesh, q_src, sol.alpha)
    itf = _time_integral(mesh, q_int, sol.alpha)
    mom = _moment_quadrature(sol, t, nx)
    lhs = free_boundary(sol, t) ** 2
    return abs(lhs - (2.0 * src - 2.0 * itf - 2.0 * mom)) / lhs


# }}}


# {{{ field equation


def _upper_half(mesh: TemporalMesh) -> np.ndarray:
    return np.flatnonzero((mesh.nodes >= 0.5 * mesh.T) & (np.arange(len(mesh)) >= 1))


def _default_hx(sol: SimilaritySolution, mesh: TemporalMesh) -> float:
    return 2.0 * free_boundary(sol, mesh.T) / mesh.n


def _check_probes(sol: SimilaritySolution, xs, mesh: TemporalMesh, hx: float) -> np.ndarray:
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    s_lo = free_boundary(sol, mesh.nodes[_upper_half(mesh)[0]])
    if xs.size == 0 or (xs - 2 * hx <= 0).any() or (xs + 2 * hx >= s_lo).any():
        raise DomainError(
            f"probes must lie inside (0, {s_lo:g}) with room for the x-stencil"
        )
    return xs


def _u_signal(sol: SimilaritySolution, x: float, mesh: TemporalMesh) -> np.ndarray:
    v = np.empty(len(mesh))
    v[0] = _u_at_rest(sol)
    v[1:] = temperature(sol, x, mesh.nodes[1:])
    return v


def fde_residual(
    sol: SimilaritySolution, x_grid, mesh: TemporalMesh, hx: float | None = None
) -> float:
    """Max relative residual of ``u_t = d/dx (RL D^(1-alpha) u_x)`` on probes.

    ``u_t`` is a three-point difference on the mesh; the right side nests a
    central ``x``-difference around the RL derivative (from
    :mod:`fracstefan.fracops`) of a central-difference ``u_x`` signal. Probes
    are taken at every mesh node in the upper half of ``[0, T]``. The default
    ``hx`` is ``2 s(T) / n`` so that both steps shrink together.
    """
    hx = _default_hx(sol, mesh) if hx is None else float(hx)
    xs = _check_probes(sol, x_grid, mesh, hx)
    mu = 1.0 - sol.alpha
    idx = _upper_half(mesh)
    worst = 0.0
    for x in xs:
        u = SampledSignal(mesh, _u_signal(sol, x, mesh))
        lhs = np.array([rl_derivative(u, 1.0, i) for i in idx])
        flux = []
        for y in (x - hx, x + hx):
            ux = (_u_signal(sol, y + hx, mesh) - _u_signal(sol, y - hx, mesh)) / (2 * hx)
            sig = SampledSignal(mesh, ux)
            flux.append(np.array([rl_derivative(sig, mu, i) for i in idx]))
        rhs = (flux[1] - flux[0]) / (2 * hx)
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.abs(lhs))))
    return worst


def caputo_cross_check(
    sol: SimilaritySolution, x: float, mesh: TemporalMesh, hx: float | None = None
) -> float:
    """Max relative residual of ``C D^alpha u(x, .) = u_xx(x, .)`` at upper-half nodes."""
    hx = _default_hx(sol, mesh) if hx is None else float(hx)
    (x,) = _check_probes(sol, [x], mesh, hx)
    idx = _upper_half(mesh)
    u = SampledSignal(mesh, _u_signal(sol, x, mesh))
    lhs = np.array([caputo_derivative(u, sol.alpha, i) for i in idx])
    t = mesh.nodes[idx]
    uxx = (
        temperature(sol, x + hx, t) - 2.0 * temperature(sol, x, t) + temperature(sol, x - hx, t)
    ) / hx**2
    return float(np.max(np.abs(lhs - uxx) / np.abs(uxx)))


# }}}


# {{{ suite


@dataclass(frozen=True)
class Budgets:
    """Mesh sizes and grading used by :func:`run_suite`.

    ``grading=None`` grades each mesh as ``2 / alpha``, which restores second
    order for signals behaving like ``t**(alpha - 1)`` near 0.
    """

    quad_n: int = 512
    nx: int = 512
    fde_n: int = 1024
    power_n: int = 4096
    grading: float | None = None

    @classmethod
    def uniform(cls, n: int, grading: float | None = None) -> Budgets:
        return cls(quad_n=n, nx=max(n, 16), fde_n=n, power_n=n, grading=grading)

    def mesh(self, alpha: float, T: float, n: int) -> TemporalMesh:
        g = 2.0 / alpha if self.grading is None else self.grading
        return TemporalMesh(T, n, g)


# Tolerances of the numerical checks; see docs/convergence.md.
TOL_XI = 1e-12
TOL_CLOSED = 1e-9
TOL_ERFC = 1e-10
TOL_POWER = 1e-4
TOL_QUAD = 1e-3
TOL_QUAD_CLASSICAL = 1e-6
TOL_FDE = 5e-2
TOL_FDE_CLASSICAL = 1e-4
TOL_LIMIT_XI = 2e-2
TOL_LIMIT = 5e-2


def _describe(exc: BaseException) -> str:
    return f"{type(exc).__name__}: {exc}"


def _record(entries, name, alpha, t, method, tol, fn) -> None:
    try:
        res = float(fn())
        err = None
    except Exception as exc:  # an entry failure must not stop the suite
        res, err = math.inf, _describe(exc)
    entries.append(VerificationEntry(name, alpha, t, res, tol, method, err))


def _erfc_identity() -> float:
    x = np.arange(13) * 0.25
    return float(np.max(np.abs(wright(-2.0 * x, WrightParams(-0.5, 1.0)) - erfc_ref(x))))


def _power_rule_error(alpha: float, p: float, budgets: Budgets) -> float:
    mesh = budgets.mesh(alpha, 1.0, budgets.power_n)
    sig = SampledSignal.from_function(mesh, lambda t: t**p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SingularityWarning)
        d = rl_derivative_nodes(sig, 1.0 - alpha)
    t = mesh.nodes
    sel = t >= 0.5
    return float(np.max(np.abs(d[sel] - rl_power_rule(p, 1.0 - alpha, t[sel]))))


def _mainardi_shape(alpha: float) -> float:
    # positive and strictly decreasing on [0, 10]; residual 0 when both hold
    x = np.linspace(0.0, 10.0, 401)
    m = mainardi(x, alpha / 2.0)
    return float(max(0.0, -m.min(), np.max(np.diff(m))))


def _classical_profile(sol: SimilaritySolution, t: float) -> float:
    x = np.linspace(0.0, free_boundary(sol, t), 101)
    ref = 1.0 - erf_ref(x / (2.0 * math.sqrt(t))) / erf_ref(sol.xi)
    return float(np.max(np.abs(temperature(sol, x, t) - ref)))


_LIMIT_X = np.array([0.25, 0.5, 1.0])


def _limit_gaussian(alpha: float) -> float:
    m = mainardi(2.0 * _LIMIT_X, alpha / 2.0)
    return float(np.max(np.abs(m - np.exp(-(_LIMIT_X**2)) / math.sqrt(math.pi))))


def _limit_erf(alpha: float) -> float:
    w = wright(-2.0 * _LIMIT_X, WrightParams(-alpha / 2.0, 1.0))
    return float(np.max(np.abs(1.0 - w - erf_ref(_LIMIT_X))))


def _monotone_violations(values: list[float]) -> float:
    return float(sum(1 for a, b in zip(values, values[1:]) if not b < a))


def run_suite(
    alphas=DEFAULT_ALPHAS, ts=DEFAULT_TS, budgets: Budgets | None = None
) -> VerificationReport:
    """Run every check and collect the results in configuration order.

    Failing or raising checks are recorded as failed entries. An empty
    ``alphas`` gives an empty report.
    """
    budgets = Budgets() if budgets is None else budgets
    alphas = [float(a) for a in alphas]
    ts = [float(t) for t in ts]
    for a in alphas:
        if not 0.0 < a <= 1.0:
            raise DomainError(f"alpha out of (0,1] (got {a})")
    for t in ts:
        if not t > 0:
            raise DomainError(f"t must be positive (got {t})")
    config = {"alphas": alphas, "ts": ts, "budgets": asdict(budgets)}
    entries: list[VerificationEntry] = []
    if not alphas:
        return VerificationReport(config, entries)

    _record(entries, "wright_erfc_identity", None, "x in [0, 3] step 0.25",
            "closed_form", TOL_ERFC, _erfc_identity)

    for a in alphas:
        try:
            sol = solve_xi(a)
        except Exception as exc:
            entries.append(VerificationEntry(
                "xi_residual", a, None, math.inf, TOL_XI, "closed_form", _describe(exc)))
            continue
        _record(entries, "xi_residual", a, None, "closed_form", TOL_XI, lambda: abs(sol.residual))
        classical = a == 1.0
        _record(entries, "mainardi_positive_decreasing", a, "x in [0, 10]", "closed_form", 0.0,
                lambda: _mainardi_shape(a))
        for p, label in ((0.0, "power_rule_constant"), (-0.2, "power_rule_t^-0.2")):
            _record(entries, label, a, "t in [0.5, 1]", "finite_difference", TOL_POWER,
                    lambda p=p: _power_rule_error(a, p, budgets))
        for t in ts:
            _record(entries, "stefan_condition", a, t, "closed_form", TOL_CLOSED,
                    lambda t=t: stefan_condition_residual(sol, t))
            _record(entries, "integral_relationship_closed_form", a, t, "closed_form", TOL_CLOSED,
                    lambda t=t: integral_relationship_closed_form(sol, t))
            _record(entries, "integral_relationship_quadrature", a, t, "quadrature",
                    TOL_QUAD_CLASSICAL if classical else TOL_QUAD,
                    lambda t=t: integral_relationship_quadrature(
                        sol, t, budgets.mesh(a, t, budgets.quad_n), budgets.nx))

        mesh = budgets.mesh(a, 1.0, budgets.fde_n)
        s1 = free_boundary(sol, 1.0)
        tol_fd = TOL_FDE_CLASSICAL if classical else TOL_FDE
        _record(entries, "fde_residual", a, "x in {0.2, 0.4} s(1), t in [0.5, 1]",
                "finite_difference", tol_fd, lambda: fde_residual(sol, [0.2 * s1, 0.4 * s1], mesh))
        _record(entries, "caputo_cross_check", a, "x = 0.3 s(1), t in [0.5, 1]",
                "finite_difference", tol_fd, lambda: caputo_cross_check(sol, 0.3 * s1, mesh))
        if classical:
            _record(entries, "classical_xi_agreement", a, None, "closed_form", TOL_XI,
                    lambda: abs(sol.xi - classical_xi()))
            for t in ts:
                _record(entries, "neumann_profile", a, t, "closed_form", TOL_CLOSED,
                        lambda t=t: _classical_profile(sol, t))

    _limit_block(entries)
    return VerificationReport(config, entries)


def _limit_block(entries: list[VerificationEntry]) -> None:
    xi_ref = classical_xi()
    series: dict[str, list[float]] = {}
    grid = "x in {0.25, 0.5, 1}"
    checks = (
        ("limit_xi_gap", None, TOL_LIMIT_XI, lambda a: abs(solve_xi(a).xi - xi_ref)),
        ("limit_mainardi_gaussian", grid, TOL_LIMIT, _limit_gaussian),
        ("limit_wright_erf", grid, TOL_LIMIT, _limit_erf),
        ("limit_classical_relationship", 1.0, TOL_LIMIT,
         lambda a: classical_relationship_gap(solve_xi(a), 1.0)),
    )
    for name, where, tol, fn in checks:
        for a in LIMIT_ALPHAS:
            _record(entries, name, a, where, "closed_form", tol, lambda a=a: fn(a))
            series.setdefault(name, []).append(entries[-1].residual)
    for name, vals in series.items():
        _record(entries, name + "_monotone", None, "alpha in {0.9, 0.99, 0.999}",
                "closed_form", 0.0, lambda vals=vals: _monotone_violations(vals))


# }}}
