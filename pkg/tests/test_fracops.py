from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import rgamma

from fracstefan.errors import DomainError, SingularityWarning
from fracstefan.fracops import (
    SampledSignal,
    TemporalMesh,
    caputo_derivative,
    caputo_derivative_nodes,
    chi_kernel,
    rl_derivative,
    rl_derivative_nodes,
    rl_integral,
    rl_integral_nodes,
    rl_power_rule,
)


@pytest.fixture(autouse=True)
def _quiet_singularity_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SingularityWarning)
        yield


def observed_order(ns, errs):
    return [math.log(e0 / e1) / math.log(n1 / n0) for n0, n1, e0, e1 in zip(ns, ns[1:], errs, errs[1:])]


# {{{ mesh and signal


def test_mesh_nodes():
    m = TemporalMesh(2.0, 4, 2.0)
    assert np.allclose(m.nodes, [0, 0.125, 0.5, 1.125, 2.0])
    assert m.nodes[-1] == 2.0 and len(m) == 5
    assert np.all(np.diff(TemporalMesh(1.0, 100, 3.7).nodes) > 0)
    with pytest.raises(ValueError):
        m.nodes[0] = 1.0


@pytest.mark.parametrize(("T", "n", "g"), [(0.0, 4, 1.0), (1.0, 1, 1.0), (1.0, 4, 0.5)])
def test_mesh_validation(T, n, g):
    with pytest.raises(ValueError):
        TemporalMesh(T, n, g)


def test_signal_length_and_immutability():
    m = TemporalMesh.uniform(1.0, 4)
    with pytest.raises(ValueError):
        SampledSignal(m, np.ones(4))
    s = SampledSignal(m, np.ones(5))
    with pytest.raises(ValueError):
        s.values[0] = 2.0


def test_singular_start_detection():
    m = TemporalMesh.uniform(1.0, 8)
    assert SampledSignal.from_function(m, lambda t: t**-0.3).singular_start
    assert not SampledSignal.from_function(m, np.cos).singular_start


# }}}


# {{{ kernel and power rule


@pytest.mark.parametrize(
    ("alpha", "t", "expected"),
    [(0.5, 0.0, 0.0), (1.0, 2.7, 1.0), (0.5, 1.0, 0.5641895835477563), (0.3, -1.0, 0.0)],
)
def test_chi_kernel(alpha, t, expected):
    assert chi_kernel(alpha, t) == pytest.approx(expected, rel=1e-15)


def test_power_rule_examples():
    a = 0.3
    assert rl_power_rule(0.0, 1 - a, 2.0) == pytest.approx(2.0 ** (a - 1) / math.gamma(a), rel=1e-14)
    assert rl_power_rule(0.0, -a, 2.0) == pytest.approx(2.0**a / math.gamma(1 + a), rel=1e-14)
    assert rl_power_rule(1.0, 0.5, 1.0) == pytest.approx(1.1283791671, rel=1e-10)
    # t**(mu - 1) lies in the kernel of the RL derivative of order mu
    assert rl_power_rule(-0.6, 0.4, 3.0) == 0.0


def test_power_rule_errors():
    with pytest.raises(DomainError):
        rl_power_rule(-1.0, 0.5, 1.0)
    with pytest.raises(DomainError):
        rl_power_rule(0.0, 0.5, -1.0)
    with pytest.raises(DomainError):
        rl_power_rule(0.0, 0.5, 0.0)


# }}}


# {{{ RL integral


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9, 1.0])
@pytest.mark.parametrize("grading", [1.0, 2.5])
def test_integral_of_constant_is_exact(alpha, grading):
    m = TemporalMesh(1.7, 37, grading)
    got = rl_integral_nodes(SampledSignal(m, np.ones(len(m))), alpha)
    assert np.allclose(got, m.nodes**alpha * rgamma(1 + alpha), rtol=1e-13, atol=0)


def test_integral_of_linear():
    m = TemporalMesh.uniform(1.0, 10)
    f = SampledSignal.from_function(m, lambda t: t)
    assert rl_integral(f, 0.5, 10) == pytest.approx(0.7522527780636751, rel=1e-13)


def test_trapezoid_at_alpha_one():
    errs = []
    for n in (32, 128):
        m = TemporalMesh.uniform(1.0, n)
        errs.append(abs(rl_integral(SampledSignal.from_function(m, np.square), 1.0, n) - 1 / 3))
    assert errs[1] < 1e-4 and observed_order([32, 128], errs)[0] == pytest.approx(2.0, abs=0.05)


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(0.05, 1.0),
    grading=st.floats(1.0, 4.0),
    n=st.integers(4, 60),
    a=st.floats(-2, 2),
    b=st.floats(-2, 2),
    c=st.floats(-2, 2),
    k=st.integers(1, 3),
)
def test_integral_exact_for_piecewise_linear(alpha, grading, n, a, b, c, k):
    m = TemporalMesh(1.0, n, grading)
    t = m.nodes
    tk = t[k]
    f = a + b * t + c * np.maximum(t - tk, 0.0)
    exact = (
        a * t**alpha * rgamma(1 + alpha)
        + b * t ** (1 + alpha) * rgamma(2 + alpha)
        + c * np.maximum(t - tk, 0.0) ** (1 + alpha) * rgamma(2 + alpha)
    )
    got = rl_integral_nodes(SampledSignal(m, f), alpha)
    assert np.max(np.abs(got - exact)) <= 1e-12 * max(1.0, abs(a) + abs(b) + abs(c))


def test_integral_index_bounds():
    m = TemporalMesh.uniform(1.0, 4)
    f = SampledSignal(m, np.ones(5))
    with pytest.raises(IndexError):
        rl_integral(f, 0.5, 0)
    with pytest.raises(IndexError):
        rl_integral(f, 0.5, 5)
    with pytest.raises(DomainError):
        rl_integral(f, 1.5, 2)


# }}}


# {{{ RL derivative


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_derivative_of_constant(alpha):
    m = TemporalMesh.uniform(1.0, 256)
    d = rl_derivative(SampledSignal(m, np.ones(len(m))), 1 - alpha, 256)
    assert d == pytest.approx(1 / math.gamma(alpha), rel=1e-4)


def test_derivative_of_decreasing_power_example():
    m = TemporalMesh(1.0, 1024, 4.0)
    f = SampledSignal.from_function(m, lambda t: t**-0.2)
    assert rl_derivative(f, 0.5, 1024) == pytest.approx(math.gamma(0.8) / math.gamma(0.3), rel=1e-5)
    assert rl_derivative(f, 0.5, 1024) == pytest.approx(0.38917027102397664, rel=1e-5)  # mpmath


def test_first_node_warns():
    m = TemporalMesh.uniform(1.0, 8)
    with warnings.catch_warnings():
        warnings.simplefilter("error", SingularityWarning)
        with pytest.raises(SingularityWarning):
            rl_derivative(SampledSignal(m, np.ones(9)), 0.5, 1)


def test_order_extremes():
    m = TemporalMesh.uniform(1.0, 16)
    f = SampledSignal.from_function(m, np.square)
    assert rl_derivative(f, 0.0, 7) == f.values[7]
    assert rl_derivative(f, 1.0, 8) == pytest.approx(1.0, abs=1e-12)  # exact on quadratics
    assert np.isnan(rl_derivative_nodes(f, 0.5)[0])
    with pytest.raises(DomainError):
        rl_derivative(f, 1.2, 3)


def _integral_of_sin(mu, t):
    return sum((-1) ** k * t ** (2 * k + 1 + mu) * rgamma(2 * k + 2 + mu) for k in range(30))


@pytest.mark.parametrize(
    ("name", "integral", "g"),
    [
        ("one", lambda mu, t: t**mu * rgamma(1 + mu), lambda t: np.ones_like(t)),
        ("t", lambda mu, t: t ** (1 + mu) * rgamma(2 + mu), lambda t: t),
        ("t^2", lambda mu, t: 2 * t ** (2 + mu) * rgamma(3 + mu), np.square),
        ("sin", _integral_of_sin, np.sin),
    ],
)
def test_left_inverse(name, integral, g):
    # D^mu I^mu g = g; probed at interior nodes of [0.25, 1)
    mu = 0.4
    ns = [64, 256, 1024]
    errs = []
    for n in ns:
        m = TemporalMesh.uniform(1.0, n)
        t = m.nodes
        d = rl_derivative_nodes(SampledSignal(m, integral(mu, t)), mu)
        sel = (t >= 0.25) & (t < 1.0)
        errs.append(np.max(np.abs(d[sel] - g(t[sel]))))
    assert errs[-1] < 1e-3
    assert all(e < 1e-13 for e in errs) or min(observed_order(ns, errs)) >= 1.0


@pytest.mark.parametrize("mu", [0.3, 0.6])
def test_integral_does_not_undo_derivative(mu):
    # I^mu D^mu f = f - c t^(mu - 1) with c = I^(1-mu) f(0+) / Gamma(mu), here 1
    m = TemporalMesh(1.0, 1024, 2.0 / mu)
    t = m.nodes
    f = SampledSignal.from_function(m, lambda t: t ** (mu - 1))
    d = rl_derivative_nodes(f, mu)
    # the discrete derivative carries the t = 0 mass on its first panels; cut it
    d[t < 0.1] = 0.0
    back = rl_integral_nodes(SampledSignal(m, d), mu)
    sel = t >= 0.5
    basis = t[sel] ** (mu - 1)
    c_fit = np.dot(basis - back[sel], basis) / np.dot(basis, basis)
    c_expected = rl_integral(f, 1 - mu, m.n) / math.gamma(mu)
    assert c_fit == pytest.approx(c_expected, rel=0.05)
    assert c_fit == pytest.approx(1.0, rel=0.05)


def test_decreasing_function_has_positive_derivative():
    alpha, gamma_ = 0.5, 0.2
    m = TemporalMesh(1.0, 512, 2.0 / alpha)
    f = SampledSignal.from_function(m, lambda t: t**-gamma_)
    d = rl_derivative_nodes(f, 1 - alpha)
    assert np.all(d[1:] > 0)


# }}}


# {{{ Caputo


def test_caputo_constant_is_zero():
    m = TemporalMesh(1.0, 50, 1.5)
    assert np.all(caputo_derivative_nodes(SampledSignal(m, np.full(51, 3.2)), 0.4) == 0.0)


def test_caputo_of_linear_is_exact():
    m = TemporalMesh(1.0, 20, 2.0)
    f = SampledSignal.from_function(m, lambda t: t)
    assert caputo_derivative(f, 0.5, 20) == pytest.approx(1.1283791670955126, rel=1e-13)


@pytest.mark.parametrize("mu", [0.2, 0.5, 0.8])
def test_caputo_order_on_square(mu):
    ns = [64, 256, 1024]
    errs = []
    for n in ns:
        m = TemporalMesh.uniform(1.0, n)
        t = m.nodes
        c = caputo_derivative_nodes(SampledSignal(m, t**2), mu)
        errs.append(np.max(np.abs(c[1:] - 2 * t[1:] ** (2 - mu) * rgamma(3 - mu))))
    assert min(observed_order(ns, errs)) >= 2 - mu - 0.2


def test_caputo_rl_decomposition():
    mu = 0.4
    ns = [64, 256, 1024]
    errs = []
    for n in ns:
        m = TemporalMesh.uniform(1.0, n)
        t = m.nodes
        f = SampledSignal(m, 1 + t + np.sin(t))
        rl = rl_derivative_nodes(f, mu)
        cap = caputo_derivative_nodes(f, mu)
        sel = t >= 0.5
        errs.append(np.max(np.abs(rl[sel] - (t[sel] ** -mu * rgamma(1 - mu) + cap[sel]))))
    assert min(observed_order(ns, errs)) >= 1.0


def test_caputo_order_one_is_classical():
    m = TemporalMesh.uniform(1.0, 10)
    f = SampledSignal.from_function(m, np.square)
    assert caputo_derivative(f, 1.0, 5) == pytest.approx(1.0, abs=1e-12)


# }}}
