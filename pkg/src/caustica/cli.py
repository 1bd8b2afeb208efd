"""Command-line front end: one subcommand per experiment, CSV/JSON output.

Every run prints a one-line ``PASS``/``FAIL`` summary to stderr and writes its
data (CSV with a ``# schema:`` header, or JSON) to ``--output`` or stdout.
Exit codes: 0 pass, 1 check failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import billiards, curves, incidence, jets, outer, strings, surface
from .errors import CausticaError, ConvergenceError


# --- results and output ----------------------------------------------------------------


@dataclass
class Result:
    quantity: str
    value: float
    tolerance: float
    passed: bool
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def summary(self) -> dict:
        return {"quantity": self.quantity, "value": _num(self.value), "tolerance": _num(self.tolerance),
                "pass": bool(self.passed)}

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.quantity}={self.value:.6g} tolerance={self.tolerance:.6g}"


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def render_csv(res: Result) -> str:
    names = [c for c, _ in res.columns]
    schema = ",".join(f"{c}[{u}]" for c, u in res.columns)
    lines = [f"# schema: {schema}", ",".join(names)]
    lines += [",".join(_fmt(v) for v in row) for row in res.rows]
    return "\n".join(lines) + "\n"


def render_json(res: Result | list) -> str:
    if isinstance(res, list):
        return json.dumps([r.summary() for r in res], indent=2) + "\n"
    out = res.summary()
    if res.rows:
        out["columns"] = [c for c, _ in res.columns]
        out["rows"] = [[_num(v) for v in row] for row in res.rows]
    return json.dumps(out, indent=2) + "\n"


def _threads() -> int:
    cap = os.environ.get("CAUSTICA_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def parallel_map(fn, items) -> list:
    """``[fn(x) for x in items]`` on up to ``CAUSTICA_THREADS`` threads, in input order."""
    items = list(items)
    n = min(_threads(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# --- argument parsing helpers ----------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _points(text: str) -> np.ndarray:
    try:
        pts = [[float(v) for v in grp.split(",")] for grp in str(text).split(";") if grp.strip()]
        return np.array(pts, dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected points 'x,y;x,y;...', got {text!r}") from None


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _positive_list(text: str) -> list[float]:
    vals = _floats(text)
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError(f"expected positive numbers, got {text!r}")
    return vals


@dataclass
class RunConfig:
    """Resolved settings of one run (flags over config file over defaults)."""

    subcommand: str
    params: dict
    output: str | None
    fmt: str


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- subcommands -----------------------------------------------------------------------


def cmd_surface(a) -> Result:
    S = surface.make_surface(a.surface)
    center = np.array([0.0, 0.0, 1.0]) if S.kind == "sphere" else np.zeros(2)

    def one(r):
        c = surface.circle_circumference(S, center, r) / (2 * math.pi)
        p = float(surface.psi(S, r))
        return (r, c, p, abs(c - p) / p)

    rows = parallel_map(one, a.r)
    err = max(row[3] for row in rows)
    return Result("psi_relative_error", err, a.tol, err < a.tol,
                  [("r", "length"), ("circumference_over_2pi", "length"), ("psi", "length"),
                   ("rel_error", "1")], rows)


def cmd_string(a) -> Result:
    c = curves.parse_curve(a.curve, a.surface)
    sc = strings.string_curve(c, a.p, a.method, a.samples)
    res = sc.residuals()
    pts = np.atleast_2d(sc.points)
    cols = [("s_A", "length"), ("s_B", "length"), ("C_x", "chart"), ("C_y", "chart")]
    if pts.shape[1] == 3:
        cols.append(("C_z", "chart"))
    cols.append(("L_residual", "length"))
    rows = [(sa, sb, *pt, r) for sa, sb, pt, r in zip(sc.s_A, sc.s_B, pts, res)]
    err = float(np.max(np.abs(res)))
    return Result("max_L_residual", err, a.tol, err < a.tol, cols, rows)


def cmd_poritsky(a) -> Result:
    c = curves.parse_curve(a.curve, a.surface)
    reps = parallel_map(lambda p: strings.poritsky_check(c, [p], a.samples, a.tol), a.p)
    rows = [(r.p_values[0], r.c_p[0], r.max_deviation[0]) for r in reps]
    dev = max(row[2] for row in rows)
    return Result("max_t_increment_deviation", dev, a.tol, dev < a.tol,
                  [("p", "length"), ("c_p", "lazutkin"), ("max_deviation", "lazutkin")], rows)


def cmd_lazutkin(a) -> Result:
    c = curves.parse_curve(a.curve, a.surface)
    F = billiards.billiard_map_sy(c)
    chart = billiards.billiard_lazutkin_chart(c, a.x0)
    rec = billiards.orbit(F, chart, (a.x0_lazutkin, a.y0), a.delta, a.budget)
    rows = [(j, X, Y, math.log(Y / rec.Y[0])) for j, (X, Y) in enumerate(zip(rec.X, rec.Y))]
    return Result("exit_steps", rec.m, a.budget, not rec.capped,
                  [("j", "1"), ("X", "lazutkin"), ("Y", "lazutkin"), ("logY_ratio", "1")], rows)


def cmd_plog(a) -> Result:
    c = curves.parse_curve(a.curve, a.surface)
    F = billiards.billiard_map_sy(c)
    chart = billiards.billiard_lazutkin_chart(c, a.x0)
    y0s = sorted(a.y0, reverse=True)

    def one(y0):
        rec = billiards.orbit(F, chart, (a.x0_lazutkin, y0), a.delta, a.budget)
        b = billiards.plog_bounds_check(rec)
        return (y0, b.m, b.alpha, b.beta, b.step_beta)

    rows = parallel_map(one, y0s)
    alphas = [r[2] for r in rows]
    decreasing = all(x > y for x, y in zip(alphas, alphas[1:]))
    beta = rows[-1][3]
    return Result("beta_at_smallest_y0", beta, a.beta_tol, decreasing and beta < a.beta_tol,
                  [("Y0", "lazutkin"), ("m", "1"), ("alpha", "1"), ("beta", "1"), ("step_beta", "1")], rows)


def cmd_outer(a) -> Result:
    c = curves.parse_curve(a.curve, a.surface)
    if a.check == "homothety":
        ac = outer.area_construction(c, a.p[0], a.samples)
        lam, res = outer.homothety_fit(ac)
        tol = a.tol if a.tol is not None else 1e-6
        rows = [(a.p[0], lam, res, ac.bisection_residual())]
        return Result("homothety_residual", res, tol, res < tol,
                      [("p", "area"), ("lambda", "1"), ("residual", "1"), ("bisection_residual", "length")],
                      rows)
    tol = a.tol if a.tol is not None else 1e-5
    rep = outer.area_poritsky_check(c, a.p, a.samples, tol=tol)
    rows = list(zip(rep.p_values, rep.c_p, rep.max_deviation))
    dev = max(rep.max_deviation)
    return Result("max_area_increment_deviation", dev, tol, dev < tol,
                  [("p", "area"), ("c_p", "length"), ("max_deviation", "length")], rows)


def cmd_ceva(a) -> Result:
    S = surface.make_surface(a.surface)
    if len(a.triangle) != 3:
        raise UsageError("--triangle needs three points")
    T = incidence.GeodesicTriangle(S, *a.triangle)
    if a.feet is not None:
        if len(a.feet) != 3:
            raise UsageError("--feet needs three points A',B',C'")
        feet = a.feet
    elif a.point is not None:
        feet = incidence.cevian_feet(S, T, a.point[0])
    else:
        raise UsageError("give --feet or --point")
    prod = incidence.ceva_product(S, T, *feet)
    err = abs(prod - 1)
    rows = [(i, *np.atleast_1d(f)) for i, f in enumerate(feet)]
    cols = [("foot", "index")] + [(n, "chart") for n in ("x", "y", "z")[: len(np.atleast_1d(feet[0]))]]
    res = Result("ceva_product", prod, a.tol, err < a.tol, cols, rows)
    return res


def cmd_incidence(a) -> Result:
    c = curves.parse_curve(a.curve, a.surface)
    if len(a.params) != 3:
        raise UsageError("--params needs three natural parameters a,b,c")
    r = incidence.tangent_incidence_check(c, *a.params)
    return Result("concurrency_residual", r, a.tol, r < a.tol, [("s_a", "length"), ("s_b", "length"),
                                                                  ("s_c", "length"), ("residual", "length")],
                  [(*a.params, r)])


def cmd_jet_ode(a) -> Result:
    if len(a.jet) != 6:
        raise UsageError("--jet needs x,b0,b1,b2,b3,b4")
    J = jets.Jet4(a.jet[0], tuple(a.jet[1:]))
    sol = jets.integrate_jet_ode(J, a.metric, a.range, a.step)
    cols = [("x", "chart"), ("y", "chart")] + [(f"b{k}", "chart") for k in range(1, 5)]
    rows = [(x, *b) for x, b in zip(sol.x, sol.b)]
    if surface.make_surface(a.metric).kind == "euclidean":
        ref = jets.conic_y(jets.conic_through_jet(J), sol.x, sol.y)
        dev = float(np.max(np.abs(sol.y - ref)))
        return Result("max_deviation_from_conic", dev, a.tol, sol.complete and dev < a.tol, cols, rows)
    return Result("complete", float(sol.complete), 1.0, sol.complete, cols, rows)


def _verify_checks():
    def circle_L():
        c = curves.circle(1.0)
        th = np.linspace(0.01, 0.5, 8)
        L = [curves.string_length_L(c, -t, t) for t in th]
        err = float(np.max(np.abs(np.array(L) / (2 * np.tan(th) - 2 * th) - 1)))
        return Result("circle_L_relative_error", err, 1e-9, err < 1e-9)

    def psi_check():
        errs = []
        for kind, centre in (("sphere", [0.0, 0.0, 1.0]), ("hyperbolic", [0.0, 0.0])):
            S = surface.make_surface(kind)
            for r in (0.1, 0.5, 1.0):
                c = surface.circle_circumference(S, centre, r) / (2 * math.pi)
                errs.append(abs(c / float(surface.psi(S, r)) - 1))
        return Result("psi_relative_error", max(errs), 1e-6, max(errs) < 1e-6)

    def poritsky():
        rep = strings.poritsky_check(curves.ellipse(2, 1), [1e-3], 20)
        return Result("ellipse_poritsky_deviation", rep.max_deviation[0], 1e-6, rep.passed)

    def symplectic():
        F = billiards.billiard_map_sy(curves.ellipse(2, 1))
        dets = [np.linalg.det(billiards.jacobian(F, s, y)) for s in (0.2, 1.0) for y in (1e-3, 1e-2)]
        err = float(np.max(np.abs(np.array(dets) - 1)))
        return Result("jacobian_minus_one", err, 1e-6, err < 1e-6)

    def tinc():
        r = incidence.tangent_incidence_check(curves.ellipse(2, 1), 0.3, 2.0, 5.0)
        return Result("ellipse_concurrency_residual", r, 1e-8, r < 1e-8)

    def ceva():
        T = incidence.GeodesicTriangle("sphere", [0.1, 0.0, 1.0], [0.0, 0.2, 1.0], [-0.1, -0.1, 1.0])
        feet = incidence.cevian_feet("sphere", T, [0.0, 0.03, 1.0])
        err = abs(incidence.ceva_product("sphere", T, *feet) - 1)
        return Result("sphere_ceva_error", err, 1e-9, err < 1e-9)

    def rotation():
        c = curves.circle(1.0)
        d = 1.7
        T = outer.outer_map(c, [d, 0.0])
        ang = math.atan2(T[1], T[0])
        err = abs(abs(ang) - 2 * math.acos(1 / d))
        return Result("outer_rotation_error", err, 1e-9, err < 1e-9)

    def sigma5():
        l0 = jets.lambda6("euclidean", jets.Jet4(0, (0, 0, 1, 0, 0)), 0.0)
        l1 = jets.lambda6("euclidean", jets.Jet4(0, (0, 0, 1, 0, 0)), 1.0)
        err = abs((l1 - l0) * 720 - 1)
        return Result("lambda6_slope_relative_error", err, 0.02, err < 0.02)

    return [circle_L, psi_check, poritsky, symplectic, tinc, ceva, rotation, sigma5]


def cmd_verify_all(a) -> list:
    return parallel_map(lambda f: f(), _verify_checks())


# --- parser ------------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, fmt: str, curve: bool = True):
    p.add_argument("--config", help="key=value file mirroring the flags")
    p.add_argument("--out", choices=["csv", "json"], default=fmt, help="output format")
    p.add_argument("--output", help="output file (default stdout)")
    if curve:
        p.add_argument("--curve", required=False, help="curve spec, e.g. ellipse:a=2,b=1")
        p.add_argument("--surface", default=None, help="surface kind for the curve spec")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="caustica", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    p = sub.add_parser("surface", help="circle circumference against psi")
    _common(p, "csv", curve=False)
    p.add_argument("--surface", default="sphere")
    p.add_argument("--r", type=_positive_list, default=[0.1, 0.5, 1.0])
    p.add_argument("--tol", type=_positive, default=1e-6)

    p = sub.add_parser("string", help="sample the string construction")
    _common(p, "csv")
    p.add_argument("--p", type=_positive, default=1e-3)
    p.add_argument("--method", choices=["pair-rootfind", "bisector-ode"], default="pair-rootfind")
    p.add_argument("--samples", type=_positive_int, default=64)
    p.add_argument("--tol", type=_positive, default=1e-9)

    p = sub.add_parser("poritsky-check", help="translation test in the Lazutkin parameter")
    _common(p, "json")
    p.add_argument("--p", type=_positive_list, default=[1e-4, 1e-3])
    p.add_argument("--samples", type=_positive_int, default=50)
    p.add_argument("--tol", type=_positive, default=1e-6)

    for name, fmt, text in (("lazutkin-map", "csv", "billiard orbit in Lazutkin coordinates"),
                            ("plog", "json", "orbit bounds alpha and beta over several Y0")):
        p = sub.add_parser(name, help=text)
        _common(p, fmt)
        if name == "lazutkin-map":
            p.add_argument("--y0", type=_positive, default=1e-4)
        else:
            p.add_argument("--y0", type=_positive_list, default=[1e-4, 1e-5, 1e-6])
            p.add_argument("--beta-tol", type=_positive, default=0.1)
        p.add_argument("--delta", type=_positive, default=0.5)
        p.add_argument("--x0", type=float, default=0.0, help="natural parameter of the chart origin")
        p.add_argument("--x0-lazutkin", type=float, default=0.0, help="starting X")
        p.add_argument("--budget", type=_positive_int, default=10**6)

    p = sub.add_parser("outer", help="area construction checks")
    _common(p, "json")
    p.add_argument("--p", type=_positive_list, default=[1e-3, 2e-3])
    p.add_argument("--check", choices=["poritsky", "homothety"], default="poritsky")
    p.add_argument("--samples", type=_positive_int, default=50)
    p.add_argument("--tol", type=_positive, default=None)

    p = sub.add_parser("ceva", help="Ceva product with psi-lengths")
    _common(p, "json", curve=False)
    p.add_argument("--surface", default="euclidean")
    p.add_argument("--triangle", type=_points, required=False)
    p.add_argument("--feet", type=_points, default=None)
    p.add_argument("--point", type=_points, default=None, help="construct the cevians through this point")
    p.add_argument("--tol", type=_positive, default=1e-9)

    p = sub.add_parser("incidence", help="tangent incidence for a tangent triple")
    _common(p, "json")
    p.add_argument("--params", type=_floats, default=None, help="natural parameters a,b,c")
    p.add_argument("--tol", type=_positive, default=1e-8)

    p = sub.add_parser("jet-ode", help="reconstruct a curve from its 4-jet")
    _common(p, "csv", curve=False)
    p.add_argument("--jet", type=_floats, default=[0, 0, 0, 1, 0, 3])
    p.add_argument("--range", type=_positive, default=0.1)
    p.add_argument("--step", type=_positive, default=1e-2)
    p.add_argument("--metric", default="euclidean")
    p.add_argument("--tol", type=_positive, default=1e-5)

    p = sub.add_parser("verify-all", help="quick versions of all checks")
    _common(p, "json", curve=False)
    return parser


_COMMANDS = {
    "surface": cmd_surface,
    "string": cmd_string,
    "poritsky-check": cmd_poritsky,
    "lazutkin-map": cmd_lazutkin,
    "plog": cmd_plog,
    "outer": cmd_outer,
    "ceva": cmd_ceva,
    "incidence": cmd_incidence,
    "jet-ode": cmd_jet_ode,
    "verify-all": cmd_verify_all,
}

_REQUIRED = {"string": ["curve"], "poritsky-check": ["curve"], "lazutkin-map": ["curve"], "plog": ["curve"],
             "outer": ["curve"], "incidence": ["curve", "params"], "ceva": ["triangle"]}


def read_config(path: str) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{n}: expected key=value")
            out[key.strip()] = val.strip()
    return out


def _apply_config(sp: argparse.ArgumentParser, path: str):
    actions = {a.dest: a for a in sp._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, val in read_config(path).items():
        dest = key.lstrip("-").replace("-", "_")
        if dest not in actions:
            raise UsageError(f"unknown config key {key!r}")
        act = actions[dest]
        try:
            v = act.type(val) if act.type else val
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"bad value for config key {key!r}: {exc}") from None
        if act.choices is not None and v not in act.choices:
            raise UsageError(f"bad value for config key {key!r}: {val!r}")
        defaults[dest] = v
    sp.set_defaults(**defaults)


def resolve(argv) -> RunConfig:
    """Parse ``argv``; command-line flags take precedence over ``--config`` values."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.subcommand:
        raise UsageError("missing subcommand")
    if getattr(args, "config", None):
        sp = parser._subparsers._group_actions[0].choices[args.subcommand]
        try:
            _apply_config(sp, args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        args = parser.parse_args(argv)
    for key in _REQUIRED.get(args.subcommand, []):
        if getattr(args, key, None) is None:
            raise UsageError(f"--{key} is required")
    params = {k: v for k, v in vars(args).items() if k not in ("subcommand", "config", "out", "output")}
    return RunConfig(args.subcommand, params, args.output, args.out)


def run(argv=None) -> int:
    """Execute one subcommand; returns the exit code."""
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = resolve(argv)
    except UsageError as exc:
        print(f"caustica: error: {exc}", file=sys.stderr)
        return 2
    ns = argparse.Namespace(**cfg.params)
    try:
        res = _COMMANDS[cfg.subcommand](ns)
    except UsageError as exc:
        print(f"caustica: error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"FAIL {cfg.subcommand}: {exc}", file=sys.stderr)
        return 1
    except (CausticaError, ValueError) as exc:
        print(f"caustica: error: {exc}", file=sys.stderr)
        return 2
    results = res if isinstance(res, list) else [res]
    if isinstance(res, list):
        text = render_json(res) if cfg.fmt == "json" else render_csv(Result(
            "all", 0.0, 0.0, True, [("quantity", "-"), ("value", "-"), ("tolerance", "-"), ("pass", "-")],
            [(r.quantity, r.value, r.tolerance, int(r.passed)) for r in res]))
    else:
        text = render_csv(res) if cfg.fmt == "csv" else render_json(res)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for r in results:
        print(r.line(), file=sys.stderr)
    return 0 if all(r.passed for r in results) else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
