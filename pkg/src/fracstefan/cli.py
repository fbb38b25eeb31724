"""Command-line front end: ``fracstefan {xi, eval, sweep, verify}``.

Tables are written as CSV (header row, LF line endings) or JSON; floats use
the shortest decimal that round-trips. Exit codes: 0 success, 1 failed
verification or tolerance, 2 usage error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from fracstefan.errors import DomainError, NonConvergence
from fracstefan.stefan import fractional_flux, free_boundary, solve_xi, temperature
from fracstefan.verify import DEFAULT_ALPHAS, DEFAULT_TS, Budgets, run_suite

__all__ = ["CliConfig", "Range", "UsageError", "main", "parse_config"]

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NONCONVERGENCE = 0, 1, 2, 3
COMMANDS = ("xi", "eval", "sweep", "verify")
FORMATS = ("csv", "json")


class UsageError(Exception):
    """Invalid command-line or config-file input."""


@dataclass(frozen=True)
class Range:
    min: float
    max: float
    count: int

    def __post_init__(self) -> None:
        if not self.min < self.max:
            raise UsageError(f"range needs min < max (got {self.min}, {self.max})")
        if self.count < 2:
            raise UsageError(f"range needs count >= 2 (got {self.count})")

    @classmethod
    def parse(cls, value) -> Range:
        """Accept ``"min,max,count"`` or a ``{"min", "max", "count"}`` mapping."""
        try:
            if isinstance(value, dict):
                lo, hi, n = value["min"], value["max"], value["count"]
            else:
                lo, hi, n = str(value).split(",")
            n = float(n)
            if n != int(n):
                raise ValueError
            return cls(float(lo), float(hi), int(n))
        except (KeyError, ValueError, TypeError):
            raise UsageError(f"bad range {value!r}; expected min,max,count") from None

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class CliConfig:
    command: str
    alpha: tuple[float, ...] = ()
    t_range: Range | None = None
    x_range: Range | None = None
    x_scale: str = "absolute"
    tol: float = 1e-12
    mesh_n: int | None = None
    grading: float | None = None
    format: str | None = None
    output: Path | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        for a in self.alpha:
            if not 0.0 < a <= 1.0:
                raise UsageError("alpha out of (0,1]")
        if not self.tol > 0:
            raise UsageError("tol must be positive")
        if self.mesh_n is not None and self.mesh_n < 2:
            raise UsageError("mesh-n must be >= 2")
        if self.grading is not None and not self.grading >= 1:
            raise UsageError("grading must be >= 1")
        if self.format is not None and self.format not in FORMATS:
            raise UsageError(f"format must be one of {', '.join(FORMATS)}")
        if self.x_scale not in ("absolute", "interface"):
            raise UsageError("x-scale must be 'absolute' or 'interface'")
        if self.t_range is not None and not self.t_range.min > 0:
            raise UsageError("t-range must start above 0")
        if self.x_range is not None and self.x_range.min < 0:
            raise UsageError("x-range must start at or above 0")


# {{{ parsing


def _alpha_list(values) -> tuple[float, ...]:
    if values is None:
        return ()
    if isinstance(values, (int, float)):
        values = [values]
    out = []
    for v in values:
        for piece in str(v).split(","):
            piece = piece.strip()
            if not piece:
                continue
            try:
                out.append(float(piece))
            except ValueError:
                raise UsageError(f"bad alpha value {piece!r}") from None
    return tuple(out)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with default option values")
    common.add_argument("--alpha", nargs="+", help="order(s) in (0,1]; space or comma separated")
    common.add_argument("--tol", type=float)
    common.add_argument("--t-range", metavar="MIN,MAX,COUNT")
    common.add_argument("--x-range", metavar="MIN,MAX,COUNT")
    common.add_argument("--x-scale", choices=("absolute", "interface"),
                        help="with 'interface', x-range values are multiples of s(t)")
    common.add_argument("--mesh-n", type=int)
    common.add_argument("--grading", type=float)
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--output", type=Path, help="write here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="fracstefan",
        description="Similarity solution of the fractional one-phase Stefan problem.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("xi", parents=[common], help="solve for the similarity root xi")
    sub.add_parser("eval", parents=[common], help="tabulate u, s and the flux on an (x, t) grid")
    sub.add_parser("sweep", parents=[common], help="xi over a list of alphas, sorted")
    sub.add_parser("verify", parents=[common], help="run the verification suite")
    return parser


_KEYS = ("alpha", "tol", "t_range", "x_range", "x_scale", "mesh_n", "grading", "format", "output")


def parse_config(argv: list[str] | None = None) -> CliConfig:
    """Parse arguments, layering explicit flags over ``--config`` file values."""
    ns = _build_parser().parse_args(argv)
    merged: dict = {}
    if ns.config is not None:
        try:
            doc = json.loads(ns.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError("config file must hold a JSON object")
        doc = {k.replace("-", "_"): v for k, v in doc.items()}
        unknown = set(doc) - set(_KEYS) - {"command"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if doc.get("command", ns.command) != ns.command:
            raise UsageError(f"config is for command {doc['command']!r}, not {ns.command!r}")
        merged.update({k: v for k, v in doc.items() if k != "command"})
    for k in _KEYS:
        v = getattr(ns, k)
        if v is not None:
            merged[k] = v

    kwargs: dict = {"alpha": _alpha_list(merged.get("alpha"))}
    for k in ("t_range", "x_range"):
        if merged.get(k) is not None:
            kwargs[k] = Range.parse(merged[k])
    try:
        if merged.get("tol") is not None:
            kwargs["tol"] = float(merged["tol"])
        if merged.get("mesh_n") is not None:
            kwargs["mesh_n"] = int(merged["mesh_n"])
        if merged.get("grading") is not None:
            kwargs["grading"] = float(merged["grading"])
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    for k in ("x_scale", "format"):
        if merged.get(k) is not None:
            kwargs[k] = str(merged[k])
    if merged.get("output") is not None:
        kwargs["output"] = Path(merged["output"])
    return CliConfig(ns.command, **kwargs)


# }}}


# {{{ commands


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _table(columns: list[str], rows: list[tuple], fmt: str) -> str:
    if fmt == "json":
        body = [dict(zip(columns, (float(v) for v in r))) for r in rows]
        return json.dumps(body, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _require_alpha(cfg: CliConfig) -> tuple[float, ...]:
    if not cfg.alpha:
        raise UsageError(f"{cfg.command} needs --alpha")
    return cfg.alpha


def cmd_xi(cfg: CliConfig) -> tuple[str, int]:
    rows = []
    for a in _require_alpha(cfg):
        sol = solve_xi(a, cfg.tol)
        rows.append((a, sol.xi, sol.denom, sol.residual))
    code = EXIT_OK if all(abs(r[3]) <= cfg.tol for r in rows) else EXIT_FAILED
    return _table(["alpha", "xi", "denom", "residual"], rows, cfg.format or "csv"), code


def cmd_sweep(cfg: CliConfig) -> tuple[str, int]:
    rows = []
    for a in sorted(set(_require_alpha(cfg))):
        sol = solve_xi(a, cfg.tol)
        rows.append((a, sol.xi))
    return _table(["alpha", "xi"], rows, cfg.format or "csv"), EXIT_OK


def cmd_eval(cfg: CliConfig) -> tuple[str, int]:
    alphas = _require_alpha(cfg)
    if len(alphas) != 1:
        raise UsageError("eval takes a single alpha")
    sol = solve_xi(alphas[0], cfg.tol)
    ts = (cfg.t_range or Range(0.5, 2.0, 4)).values()
    xr = (cfg.x_range or Range(0.0, 1.0, 11)).values()
    rows = []
    for t in ts:
        s = free_boundary(sol, t)
        x = xr * s if cfg.x_scale == "interface" else xr
        u = np.atleast_1d(temperature(sol, x, t))
        q = np.atleast_1d(fractional_flux(sol, x, t))
        rows.extend(zip(x, [t] * len(x), u, [s] * len(x), q))
    return _table(["x", "t", "u", "s", "flux"], rows, cfg.format or "csv"), EXIT_OK


def cmd_verify(cfg: CliConfig) -> tuple[str, int]:
    alphas = cfg.alpha or DEFAULT_ALPHAS
    ts = tuple(cfg.t_range.values()) if cfg.t_range else DEFAULT_TS
    if cfg.mesh_n is not None:
        budgets = Budgets.uniform(cfg.mesh_n, cfg.grading)
    else:
        budgets = replace(Budgets(), grading=cfg.grading)
    report = run_suite(alphas, ts, budgets)
    text = report.to_csv() if cfg.format == "csv" else report.to_json()
    for e in report.failures:
        print(
            f"FAILED {e.name} alpha={e.alpha} t={e.t}: residual {e.residual!r} "
            f"> tolerance {e.tolerance!r}" + (f" ({e.error})" if e.error else ""),
            file=sys.stderr,
        )
    return text, EXIT_OK if report.passed else EXIT_FAILED


_DISPATCH = {"xi": cmd_xi, "eval": cmd_eval, "sweep": cmd_sweep, "verify": cmd_verify}


# }}}


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(output, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        text, code = _DISPATCH[cfg.command](cfg)
        _emit(text, cfg.output)
        return code
    except SystemExit as exc:  # argparse: --help or bad flags
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except (UsageError, DomainError) as exc:
        print(f"fracstefan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergence as exc:
        print(f"fracstefan: no convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        print(f"fracstefan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
