"""Command-line front end.

Every run resolves its configuration as flags > ``--config`` file > defaults
(quadrature sizes default from ``PHASEMOMENTS_N_R`` / ``PHASEMOMENTS_N_THETA``)
and echoes the resolved configuration at the top of its output, so a rerun
with the same configuration is byte-identical.

Exit codes: 0 success, 1 verification failure, 2 invalid configuration or
factorial overflow guard, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import checks, margins, moments, povm
from .quadrature import QuadratureError, Region
from .specfun import FactorialOverflowError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

COMMON_KEYS = {"format", "out", "n_r", "n_theta"}
COMMAND_KEYS = {
    "moments": {"s", "m_max", "n_max", "d"},
    "density": {"s", "k", "l", "extent", "spacing"},
    "margin": {"kind", "s", "k", "l", "d", "phi", "interval", "x_min", "x_max", "points"},
    "povm": {"s", "region", "d"},
    "sample": {"s", "phi", "count", "seed", "coords"},
    "determinacy": {"s", "k", "measure", "a", "a_min"},
    "verify": {"suite", "tol"},
}
DEFAULTS = {
    "moments": {"s": 0, "m_max": 2, "n_max": 2, "d": 4},
    "density": {"s": 0, "k": 0, "l": None, "extent": 6.0, "spacing": 0.05},
    "margin": {"kind": "position", "s": 0, "k": 0, "l": 0, "d": 4, "phi": "1", "interval": None,
               "x_min": -6.0, "x_max": 6.0, "points": 121},
    "povm": {"s": 0, "region": "full", "d": 4},
    "sample": {"s": 0, "phi": "1", "count": 1000, "seed": 0, "coords": "cartesian"},
    "determinacy": {"s": 0, "k": 0, "measure": None, "a": 1.0, "a_min": moments.DEFAULT_A_MIN},
    "verify": {"suite": "all", "tol": None},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    output: str = "json"
    out: str | None = None
    n_r: int = 64
    n_theta: int = 128

    def echo(self) -> dict:
        return {"command": self.command, "format": self.output, "n_r": self.n_r, "n_theta": self.n_theta,
                **{k: self.params[k] for k in sorted(self.params)}}


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{name}={raw!r} is not an integer") from exc


def resolve_config(args: argparse.Namespace) -> RunConfig:
    command = args.command
    allowed = COMMAND_KEYS[command] | COMMON_KEYS
    merged = {"format": "json", "out": None, "n_r": _env_int("PHASEMOMENTS_N_R", 64),
              "n_theta": _env_int("PHASEMOMENTS_N_THETA", 128), **DEFAULTS[command]}
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        unknown = set(file_cfg) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
        merged.update(file_cfg)
    for key in allowed:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if merged["format"] not in ("json", "csv"):
        raise ConfigError("format must be json or csv")
    params = {k: v for k, v in merged.items() if k not in COMMON_KEYS}
    return RunConfig(command, params, merged["format"], merged["out"], int(merged["n_r"]), int(merged["n_theta"]))


# --- output ----------------------------------------------------------------


def _num(v) -> str:
    return repr(float(v)) if not isinstance(v, (int, np.integer)) else str(int(v))


def render_csv(cfg: RunConfig, header, rows) -> str:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(cfg.echo(), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def render_json(cfg: RunConfig, result) -> str:
    return json.dumps({"config": cfg.echo(), "result": result}, indent=2, sort_keys=True) + "\n"


def _emit(cfg: RunConfig, text: str):
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- parsing helpers -------------------------------------------------------


def parse_phi(text: str) -> povm.FockVector:
    try:
        coeffs = [complex(c.strip()) for c in str(text).split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad Fock coefficients {text!r}") from exc
    vec = povm.FockVector(coeffs)
    if vec.norm() == 0:
        raise ConfigError("phi must be nonzero")
    return vec.normalized()


def _interval(text, default):
    if text is None:
        return default
    lo, hi = (float(v) for v in str(text).split(","))
    return lo, hi


# --- commands --------------------------------------------------------------


def cmd_moments(cfg: RunConfig) -> str:
    p = cfg.params
    s, d = int(p["s"]), int(p["d"])
    rows = []
    for m in range(int(p["m_max"]) + 1):
        for n in range(int(p["n_max"]) + 1):
            for k in range(d):
                l = k + m - n
                if 0 <= l < d:
                    rows.append({"m": m, "n": n, "k": k, "l": l, "v": povm.moment_matrix_element(s, m, n, k, l)})
    if cfg.output == "csv":
        return render_csv(cfg, ["m", "n", "k", "l", "v"], [[r[c] for c in "mnklv"] for r in rows])
    return render_json(cfg, {"s": s, "entries": rows})


def cmd_density(cfg: RunConfig) -> str:
    p = cfg.params
    s, k = int(p["s"]), int(p["k"])
    l = None if p["l"] is None else int(p["l"])
    spacing, extent = float(p["spacing"]), float(p["extent"])
    m = int(round(extent / spacing))
    ax = spacing * np.arange(-m, m + 1)
    xx, yy = np.meshgrid(ax, ax, indexing="ij")
    z = (xx + 1j * yy).ravel()
    if l is None or l == k:
        vals = povm.diagonal_density(s, k, z)
        header = ["x", "y", "density"]
        rows = [[a.real, a.imag, v] for a, v in zip(z, vals)]
    else:
        vals = povm.pair_density(s, k, l, z)
        header = ["x", "y", "re", "im"]
        rows = [[a.real, a.imag, v.real, v.imag] for a, v in zip(z, vals)]
    if cfg.output == "csv":
        return render_csv(cfg, header, rows)
    return render_json(cfg, {"columns": header, "rows": rows})


def _operator_result(op: povm.TruncatedOperator):
    return op.to_json()


def cmd_margin(cfg: RunConfig) -> str:
    p = cfg.params
    kind, s = p["kind"], int(p["s"])
    if kind in ("position", "momentum"):
        phi = margins.WavefunctionRep.from_fock(parse_phi(p["phi"]))
        x = np.linspace(float(p["x_min"]), float(p["x_max"]), int(p["points"]))
        fn = margins.unsharp_position_density if kind == "position" else margins.unsharp_momentum_density
        g = fn(s, phi, x)
        col = "x" if kind == "position" else "p"
        if cfg.output == "csv":
            return render_csv(cfg, [col, "density"], list(zip(x, g)))
        return render_json(cfg, {"columns": [col, "density"], "rows": [[a, b] for a, b in zip(x.tolist(), g.tolist())]})
    d = int(p["d"])
    if kind == "radial":
        r0, r1 = _interval(p["interval"], (0.0, math.inf))
        region = Region.annulus_sector(r0, r1, 0.0, 2 * math.pi)
    elif kind == "angular":
        t0, t1 = _interval(p["interval"], (0.0, 2 * math.pi))
        region = Region.annulus_sector(0.0, math.inf, t0, t1)
    else:
        raise ConfigError(f"unknown margin kind {kind!r}")
    op = povm.povm_element(s, region, d, cfg.n_r, cfg.n_theta)
    if cfg.output == "csv":
        rows = [[k, l, op.entries[k, l].real, op.entries[k, l].imag] for k in range(d) for l in range(d)]
        return render_csv(cfg, ["k", "l", "re", "im"], rows)
    return render_json(cfg, _operator_result(op))


def cmd_povm(cfg: RunConfig) -> str:
    p = cfg.params
    try:
        region = Region.parse(str(p["region"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    d = int(p["d"])
    op = povm.povm_element(int(p["s"]), region, d, cfg.n_r, cfg.n_theta)
    if cfg.output == "csv":
        rows = [[k, l, op.entries[k, l].real, op.entries[k, l].imag] for k in range(d) for l in range(d)]
        return render_csv(cfg, ["k", "l", "re", "im"], rows)
    return render_json(cfg, _operator_result(op))


def cmd_sample(cfg: RunConfig) -> str:
    p = cfg.params
    pts = povm.sample_outcomes(int(p["s"]), parse_phi(p["phi"]), int(p["count"]), int(p["seed"]))
    if p["coords"] == "polar":
        header = ["r", "theta"]
        rows = zip(np.abs(pts), np.mod(np.angle(pts), 2 * math.pi))
    elif p["coords"] == "cartesian":
        header = ["re", "im"]
        rows = zip(pts.real, pts.imag)
    else:
        raise ConfigError("coords must be cartesian or polar")
    if cfg.output == "csv":
        return render_csv(cfg, header, rows)
    return render_json(cfg, {"columns": header, "rows": [list(r) for r in rows]})


def cmd_determinacy(cfg: RunConfig) -> str:
    p = cfg.params
    if p["measure"]:
        try:
            with open(p["measure"]) as fh:
                mu = moments.MeasureRep.from_json(json.load(fh))
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load measure: {exc}") from exc
    else:
        mu = moments.MeasureRep.number_state(int(p["s"]), int(p["k"]))
    report = moments.determinacy_report(mu, a_start=float(p["a"]), a_min=float(p["a_min"]))
    if cfg.output == "csv":
        rows = [[v.axis, v.support, v.reduction, str(v.exp_bounded).lower(), "" if v.witness is None else repr(v.witness)]
                for v in report.per_axis]
        text = render_csv(cfg, ["axis", "support", "reduction", "exp_bounded", "witness"], rows)
        return text + f"# determinate_verdict: {str(report.determinate_verdict).lower()}\n"
    return render_json(cfg, report.to_json())


def cmd_verify(cfg: RunConfig):
    p = cfg.params
    names = list(checks.SUITES) if p["suite"] == "all" else [p["suite"]]
    for name in names:
        if name not in checks.SUITES:
            raise ConfigError(f"unknown suite {name!r}; choose from {sorted(checks.SUITES)} or all")
    tol = None if p["tol"] is None else float(p["tol"])
    rows = [row for name in names for row in checks.run_suite(name, tol)]
    ok = all(r.passed for r in rows)
    if cfg.output == "csv":
        text = render_csv(cfg, ["suite", "check", "params", "error", "tol", "passed"],
                          [[r.suite, r.name, json.dumps(r.params, sort_keys=True), r.error, r.tol, str(r.passed).lower()] for r in rows])
    else:
        text = render_json(cfg, {"passed": ok, "checks": [
            {"suite": r.suite, "check": r.name, "params": r.params, "error": r.error, "tol": r.tol, "passed": r.passed}
            for r in rows]})
    for r in rows:
        print(r.line(), file=sys.stderr)
    return text, ok


COMMANDS = {
    "moments": cmd_moments,
    "density": cmd_density,
    "margin": cmd_margin,
    "povm": cmd_povm,
    "sample": cmd_sample,
    "determinacy": cmd_determinacy,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasemoments", description="Number-state phase space observables: moments, densities, margins, checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file of parameters (flags override it)")
        sp.add_argument("--format", choices=["json", "csv"])
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--n-r", dest="n_r", type=int, help="radial quadrature nodes")
        sp.add_argument("--n-theta", dest="n_theta", type=int, help="angular quadrature nodes")
        return sp

    sp = common(sub.add_parser("moments", help="table of <k|A[m,n]|l>"))
    sp.add_argument("--s", type=int)
    sp.add_argument("--m-max", dest="m_max", type=int)
    sp.add_argument("--n-max", dest="n_max", type=int)
    sp.add_argument("--d", type=int)

    sp = common(sub.add_parser("density", help="phase space density on a square grid"))
    sp.add_argument("--s", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--l", type=int)
    sp.add_argument("--extent", type=float)
    sp.add_argument("--spacing", type=float)

    sp = common(sub.add_parser("margin", help="Cartesian densities or polar margin operators"))
    sp.add_argument("--kind", choices=["position", "momentum", "radial", "angular"])
    sp.add_argument("--s", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--l", type=int)
    sp.add_argument("--d", type=int)
    sp.add_argument("--phi", help="comma-separated Fock coefficients, e.g. '1,0.5j'")
    sp.add_argument("--interval", help="lo,hi for radial or angular margins")
    sp.add_argument("--x-min", dest="x_min", type=float)
    sp.add_argument("--x-max", dest="x_max", type=float)
    sp.add_argument("--points", type=int)

    sp = common(sub.add_parser("povm", help="truncated POVM element over a region"))
    sp.add_argument("--s", type=int)
    sp.add_argument("--region", help="full | disk:cx,cy,R | rect:x0,x1,y0,y1 | sector:r0,r1,t0,t1 | halfplane:angle,offset")
    sp.add_argument("--d", type=int)

    sp = common(sub.add_parser("sample", help="Monte Carlo outcomes"))
    sp.add_argument("--s", type=int)
    sp.add_argument("--phi")
    sp.add_argument("--count", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--coords", choices=["cartesian", "polar"])

    sp = common(sub.add_parser("determinacy", help="exponential-boundedness determinacy report"))
    sp.add_argument("--s", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--measure", help="MeasureRep JSON file (overrides --s/--k)")
    sp.add_argument("--a", type=float, help="first exponent tried in the witness search")
    sp.add_argument("--a-min", dest="a_min", type=float)

    sp = common(sub.add_parser("verify", help="run invariant suites"))
    sp.add_argument("--suite", choices=sorted(checks.SUITES) + ["all"])
    sp.add_argument("--tol", type=float, help="override every tolerance in the suite")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        result = COMMANDS[cfg.command](cfg)
    except moments.UndecidableTailError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FactorialOverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if args.command == "moments" else EXIT_NUMERIC
    except (QuadratureError, FloatingPointError, ArithmeticError, povm.EnvelopeViolationError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg.command == "verify":
        text, ok = result
        _emit(cfg, text)
        return EXIT_OK if ok else EXIT_FAIL
    _emit(cfg, result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
