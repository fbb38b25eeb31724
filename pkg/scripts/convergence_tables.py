"""Regenerate docs/convergence.md: error tables behind the suite tolerances.

Run from the repository root::

    python3 scripts/convergence_tables.py > docs/convergence.md
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from fracstefan.errors import SingularityWarning
from fracstefan.fracops import SampledSignal, TemporalMesh, rl_derivative_nodes, rl_power_rule
from fracstefan.stefan import free_boundary, solve_xi
from fracstefan.verify import caputo_cross_check, fde_residual, integral_relationship_quadrature


def orders(ns, errs):
    out = ["-"]
    for (n0, e0), (n1, e1) in zip(zip(ns, errs), zip(ns[1:], errs[1:])):
        out.append(f"{math.log(e0 / e1) / math.log(n1 / n0):.2f}" if e0 > 0 and e1 > 0 else "-")
    return out


def table(title, ns, columns):
    print(f"### {title}\n")
    head = "| N |" + "".join(f" {name} | order |" for name in columns)
    print(head)
    print("|" + "---|" * (1 + 2 * len(columns)))
    cols = {name: (errs, orders(ns, errs)) for name, errs in columns.items()}
    for k, n in enumerate(ns):
        cells = "".join(f" {cols[c][0][k]:.3e} | {cols[c][1][k]} |" for c in columns)
        print(f"| {n} |{cells}")
    print()


def power_rule(alpha, p, n, grading):
    mesh = TemporalMesh(1.0, n, grading)
    sig = SampledSignal.from_function(mesh, lambda t: t**p)
    d = rl_derivative_nodes(sig, 1.0 - alpha)
    t = mesh.nodes
    sel = t >= 0.5
    return float(np.max(np.abs(d[sel] - rl_power_rule(p, 1.0 - alpha, t[sel]))))


def main():
    warnings.simplefilter("ignore", SingularityWarning)
    print("# Convergence tables\n")
    print("Generated by `scripts/convergence_tables.py`. Errors are maxima over the")
    print("stated probes; `order` is the observed rate between consecutive rows.\n")

    print("## RL derivative of order 1 - alpha, alpha = 0.5, t in [0.5, 1]\n")
    ns = [64, 256, 1024, 4096]
    for g in (1.0, 2.0, 4.0):
        table(f"mesh grading {g:g}", ns, {
            "f = 1": [power_rule(0.5, 0.0, n, g) for n in ns],
            "f = t^-0.2": [power_rule(0.5, -0.2, n, g) for n in ns],
        })
    print("On graded meshes the `f = 1` column is at roundoff, because the stencil in the")
    print("mesh variable differentiates that case exactly; the negative orders there are")
    print("roundoff growth, not divergence. The uniform mesh loses order on `t^-0.2` (the")
    print("first-panel rule is only first order there), so the power-rule checks measure")
    print("`f = 1` on a uniform mesh and `t^-0.2` with grading `2/alpha`.")
    print("Suite tolerance: `1e-4` at N = 4096.\n")

    print("## Integral relationship, quadrature path, t = 1, N = nx, grading 2/alpha\n")
    ns = [128, 512, 2048]
    cols = {}
    for a in (0.25, 0.5, 0.75, 1.0):
        sol = solve_xi(a)
        cols[f"alpha={a:g}"] = [
            integral_relationship_quadrature(sol, 1.0, TemporalMesh(1.0, n, 2.0 / a), n)
            for n in ns
        ]
    table("relative residual", ns, cols)
    print("For alpha = 1 the residual sits at the floor set by the root tolerance of xi.")
    print("Suite tolerance at N = 512: `1e-3` (`1e-6` for alpha = 1).\n")

    print("## Field equation residuals at N, grading 2/alpha, hx = 2 s(1)/N\n")
    ns = [256, 1024, 4096]
    fde, cap = {}, {}
    for a in (0.25, 0.5, 0.75, 1.0):
        sol = solve_xi(a)
        s1 = free_boundary(sol, 1.0)
        meshes = [TemporalMesh(1.0, n, 2.0 / a) for n in ns]
        fde[f"alpha={a:g}"] = [fde_residual(sol, [0.2 * s1, 0.4 * s1], m) for m in meshes]
        cap[f"alpha={a:g}"] = [caputo_cross_check(sol, 0.3 * s1, m) for m in meshes]
    table("RL form, probes x in {0.2, 0.4} s(1)", ns, fde)
    table("Caputo form, probe x = 0.3 s(1)", ns, cap)
    print("Suite tolerance at N = 1024: `5e-2` (`1e-4` for alpha = 1).\n")
    print("The `5e-2` and `1e-3` tolerances are fixed requirements; the measured residuals")
    print("sit two or more orders of magnitude below them.")


if __name__ == "__main__":
    main()
