"""Command-line front end.

Every command writes one record ``{command, params, results, tolerances,
version}`` as JSON, or its main table as CSV.  Floats are written in their
shortest round-trip form, so outputs re-read bit for bit and repeated runs
with the same flags are byte-identical.

Exit codes: 0 success, 2 invalid arguments, 3 numerical failure (including
a failed identity check).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__, altops, beam, measure, poisson, quadrature, validation
from .diffops import LameFrame, div_alpha, grad_alpha, scalar_laplacian
from .errors import FracdimError, NumericalError, ValidationError

log = logging.getLogger("fracdim")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(ValidationError):
    pass


# -- parsing helpers ----------------------------------------------------------------


def _floats(text, flag, count=None):
    if isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        try:
            vals = [float(v) for v in str(text).split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise UsageError(f"{flag}: expected {count} values, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{flag}: values must be finite")
    return vals


def _alpha(value, flag="--alpha"):
    try:
        return measure.check_alpha(value)
    except ValidationError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def _alphas(text, flag="--alphas"):
    vals = _floats(text, flag, 3)
    for v in vals:
        _alpha(v, flag)
    return tuple(vals)


def _positive(value, flag):
    if not (math.isfinite(value) and value > 0):
        raise UsageError(f"{flag}: must be > 0, got {value}")
    return value


# -- output ------------------------------------------------------------------------


def _plain(obj):
    """Make ``obj`` JSON-ready: numpy scalars and arrays become Python numbers and lists."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Record:
    def __init__(self, command, params):
        self.command = command
        self.params = params
        self.results = {}
        self.tolerances = {}
        self.columns = []
        self.rows = []
        self.failed = False

    def table(self, columns, rows):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]

    def render(self, fmt):
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([_cell(v) for v in r])
            return buf.getvalue()
        rec = {
            "command": self.command,
            "params": self.params,
            "results": self.results,
            "tolerances": self.tolerances,
            "version": __version__,
        }
        return json.dumps(_plain(rec), indent=2, allow_nan=False) + "\n"


def _params(args, skip=("func", "config", "out", "format", "command", "beam_command")):
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# -- commands ----------------------------------------------------------------------


def cmd_measure(args):
    rec = Record("measure", _params(args))
    q = args.quantity
    rows = []
    if q in ("ball-volume", "sphere-area", "effective-coordinate", "axis-mass"):
        a = _alpha(args.alpha)
        if q == "ball-volume":
            v = measure.ball_volume(a, args.radius)
            rows.append([q, a, args.radius, v])
        elif q == "sphere-area":
            v = measure.sphere_area(a, args.radius)
            rows.append([q, a, args.radius, v])
        elif q == "axis-mass":
            v = measure.axis_mass(a, args.radius)
            rows.append([q, a, args.radius, v])
        else:
            xs = _floats(args.x, "--x")
            emap = measure.EffectiveCoordinateMap(a, args.variant)
            for x in xs:
                rows.append([q, a, x, emap(x)])
    else:
        al = _alphas(args.alphas)
        edges = _floats(args.edges, "--edges", 3)
        for e in edges:
            _positive(e, "--edges")
        v = measure.parallelepiped_mass(al, edges, _positive(args.rho0, "--rho0"))
        rows.append([q, ",".join(repr(a) for a in al), ",".join(repr(e) for e in edges), v])
    rec.results = {"quantity": q, "values": [r[3] for r in rows], "arguments": [r[2] for r in rows]}
    rec.table(["quantity", "alpha", "argument", "value"], rows)
    return rec


def _integrand(name, alphas, halfwidth):
    D = sum(alphas)
    if name == "gaussian":
        b = halfwidth or quadrature.gaussian_halfwidth(D, 1e-12)
        return (lambda x, y, z: np.exp(-(x * x + y * y + z * z)),
                quadrature.Box3.cube(-b, b), math.pi ** (0.5 * D))
    if name == "exp-decay":
        b = halfwidth or 40.0
        exact = 2.0 * math.pi ** (0.5 * D) / math.gamma(0.5 * D) * math.gamma(D)
        return (lambda x, y, z: np.exp(-np.sqrt(x * x + y * y + z * z)), quadrature.Box3.cube(-b, b), exact)
    # polynomial x**2 + y**2 + z**2 on the unit cube, exact from the per-axis moments
    b = halfwidth or 1.0
    m0 = [measure.nids_prefactor(a) * b**a / a for a in alphas]
    m2 = [measure.nids_prefactor(a) * b ** (a + 2) / (a + 2) for a in alphas]
    exact = m2[0] * m0[1] * m0[2] + m0[0] * m2[1] * m0[2] + m0[0] * m0[1] * m2[2]
    return (lambda x, y, z: x * x + y * y + z * z, quadrature.Box3.cube(0.0, b), exact)


def cmd_integrate(args):
    rec = Record("integrate", _params(args))
    tol = _positive(args.tol, "--tol")
    if args.mode == "angular":
        grid = np.linspace(0.4, 2.5, 5)
        rows, worst = [], 0.0
        for m in grid:
            for n in grid:
                p = quadrature.angular_integral_phi(m, n)
                cp = quadrature.angular_phi_closed_form(m, n)
                t = quadrature.angular_integral_theta(m, n)
                ct = quadrature.angular_theta_closed_form(m, n)
                dev = max(abs(p - cp) / cp, abs(t - ct) / ct)
                worst = max(worst, dev)
                rows.append([float(m), float(n), p, cp, t, ct, dev])
        rec.results = {"max_deviation": worst}
        rec.tolerances = {"max_deviation": tol}
        rec.failed = worst > tol
        rec.table(["mu", "nu", "phi_quadrature", "phi_closed", "theta_quadrature", "theta_closed",
                   "deviation"], rows)
        return rec
    alphas = tuple(args.D * s for s in validation.GAUSSIAN_SHARES) if args.D else _alphas(args.alphas)
    D = sum(alphas)
    q = quadrature.QuadratureSpec(nodes_per_panel=args.nodes, panels=args.panels, rel_tol=tol)
    f, box, exact = _integrand(args.integrand, alphas, args.halfwidth)
    if args.mode == "radial":
        if args.integrand == "polynomial":
            raise UsageError("--mode radial needs a radial integrand (gaussian or exp-decay)")
        prof = (lambda r: np.exp(-r * r)) if args.integrand == "gaussian" else (lambda r: np.exp(-r))
        rmax = box[0][1]
        value, dis = quadrature.radial_integral(prof, D, rmax, q, full_output=True)
    else:
        value, dis = quadrature.integrate_product(f, box, alphas, q, full_output=True)
    rec.results = {
        "alphas": list(alphas),
        "D": D,
        "estimate": value,
        "disagreement": dis,
        "closed_form": exact,
        "relative_error": abs(value - exact) / abs(exact),
    }
    rec.tolerances = {"rel_tol": tol}
    row = [args.integrand, args.mode, D, value, dis, exact]
    cols = ["integrand", "mode", "D", "estimate", "disagreement", "closed_form"]
    if args.mc:
        if args.seed is None:
            raise UsageError("--mc needs --seed")
        mc, se = quadrature.mc_integrate_product(f, box, alphas, args.seed, args.samples)
        rec.results.update({"mc_estimate": mc, "mc_stderr": se})
        row += [mc, se]
        cols += ["mc_estimate", "mc_stderr"]
    rec.table(cols, [row])
    return rec


def _identity_rows(rec, checks):
    rows = [[c.group, c.name, c.value, c.tolerance, c.passed] for c in checks]
    rec.results["checks"] = [c.as_dict() for c in checks]
    rec.results["passed"] = all(c.passed for c in checks)
    rec.tolerances = {c.name: c.tolerance for c in checks}
    rec.failed = not rec.results["passed"]
    rec.table(["group", "name", "value", "tolerance", "passed"], rows)


def cmd_operators(args):
    rec = Record("operators", _params(args))
    if args.verify:
        _identity_rows(rec, validation.run_suite(["vector-calculus", "operator-zoo"]))
        return rec
    alphas = _alphas(args.alphas)
    mi = measure.MultiIndex(alphas, relaxed=True)
    fields = dict(validation.scalar_battery(alphas))
    fields.update(dict(validation.zoo_battery()))
    if args.field not in fields:
        raise UsageError(f"--field: unknown field {args.field!r}; choose from {sorted(fields)}")
    f = fields[args.field]
    if args.points < 1:
        raise UsageError("--points must be >= 1")
    pts = validation.sample_points(args.points, 0.5, 2.0, seed=args.seed)
    op = args.operator
    if op == "laplacian":
        vals = scalar_laplacian(f, LameFrame(mi))(*pts)
    elif op == "div-grad":
        fr = LameFrame(mi)
        vals = div_alpha(grad_alpha(f, fr), fr)(*pts)
    else:
        spec = altops.LaplacianSpec(op, mi, l=args.l)
        vals = altops.apply_laplacian(spec, f, pts)
    vals = np.asarray(vals, dtype=float)
    rows = [[float(pts[0][i]), float(pts[1][i]), float(pts[2][i]), float(vals[i])] for i in range(len(vals))]
    rec.results = {"operator": op, "field": args.field, "values": vals}
    rec.table(["x1", "x2", "x3", "value"], rows)
    return rec


SOURCES = {
    "const": lambda x: np.ones_like(x),
    "x": lambda x: x,
    "sin": np.sin,
    "exp": np.exp,
}


def cmd_poisson(args):
    rec = Record("poisson", _params(args))
    a = _alpha(args.alpha)
    lo, hi = _floats(args.interval, "--interval", 2)
    bc = _floats(args.bc, "--bc", 2)
    try:
        pr = poisson.PoissonProblem(args.operator, a, SOURCES[args.f], (lo, hi), tuple(bc))
    except ValidationError as exc:
        raise UsageError(f"--interval: {exc}") from None
    sol = (poisson.poisson_solve_analytic(pr) if args.method == "analytic"
           else poisson.poisson_solve_numeric(pr, nodes=args.nodes))
    xs = np.linspace(lo, hi, args.samples)
    phi = np.asarray(sol(xs), dtype=float)
    rec.results = {
        "method": sol.method,
        "residual_norm": sol.residual_norm,
        "constants": list(sol.constants) if sol.constants is not None else None,
        "error_estimate": sol.error_estimate,
        "x": xs,
        "phi": phi,
    }
    if args.check_paper_form:
        chk = poisson.paper_particular_solution(args.operator, a, SOURCES[args.f], (lo, hi))
        rec.results["paper_form"] = {"residual_norm": chk.residual_norm, "discrepancy": chk.discrepancy,
                                     "note": chk.note}
    bound = 1e-6 * (1.0 + float(np.max(np.abs(SOURCES[args.f](xs)))))
    rec.tolerances = {"residual_norm": bound}
    rec.table(["x", "phi"], zip(xs.tolist(), phi.tolist()))
    return rec


BEAM_FLAGS = {"rho": "--rho", "A": "--area", "E": "--E", "I_d": "--inertia", "kappa_shear": "--kappa",
              "G": "--G", "L": "--length"}


def _beam_config(args):
    try:
        return beam.BeamConfig(rho=args.rho, A=args.area, E=args.E, I_d=args.inertia,
                               kappa_shear=args.kappa, G=args.G, L=args.length, alpha=args.alpha)
    except ValidationError as exc:
        field = str(exc).split()[0]
        flag = BEAM_FLAGS.get(field, "--alpha")
        raise UsageError(f"{flag}: {exc}") from None


def cmd_beam_modes(args):
    cfg = _beam_config(args)
    rec = Record("beam modes", _params(args))
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    z = beam.cantilever_roots(args.count)
    k = beam.characteristic_roots(cfg, args.count, args.paper_literal)
    om = beam.natural_frequencies(cfg, k)
    shapes = [beam.ModeShape(cfg, n, paper_literal=args.paper_literal) for n in range(1, args.count + 1)]
    rec.results = {
        "effective_length": cfg.effective_length,
        "z": list(z),
        "k": k,
        "omega": om,
        "C": [m.C for m in shapes],
        "boundary_residuals": [m.boundary_residuals() for m in shapes],
    }
    rec.tolerances = {"boundary_residuals": 1e-6}
    if args.shape:
        if not 1 <= args.shape <= args.count:
            raise UsageError("--shape must lie in 1..--count")
        res = beam.mode_shape(cfg, args.shape, points=args.points, paper_literal=args.paper_literal)
        rec.results["shape"] = {"n": args.shape, "x": res.x, "X": res.X, "w": res.shape}
        rec.table(["x", "X", f"w_{args.shape}"], zip(res.x.tolist(), res.X.tolist(), res.shape.tolist()))
    else:
        rows = [[n + 1, z[n], float(k[n]), float(om[n]), shapes[n].C] for n in range(args.count)]
        rec.table(["n", "z", "k", "omega", "C"], rows)
    return rec


def cmd_beam_simulate(args):
    cfg = _beam_config(args)
    rec = Record("beam simulate", _params(args))
    if args.steps < 1 or args.every < 1 or args.nodes < 3:
        raise UsageError("--steps, --every must be >= 1 and --nodes >= 3")
    model = beam.timoshenko_model(cfg, args.nodes)
    omega, _ = model.modes(1)
    period = 2.0 * math.pi / float(omega[0])
    dt = args.dt if args.dt else period / 200.0
    _positive(dt, "--dt")
    lam = cfg.effective_length
    amp = args.amplitude

    def w0(x):
        return amp * (measure.effective_x(cfg.alpha, x) / lam) ** 2

    res = model.simulate(model.initial_state(w0), dt, args.steps, args.every)
    total = res.total
    rec.results = {
        "dt": dt,
        "fundamental_period": period,
        "initial_energy": float(total[0]),
        "final_energy": float(total[-1]),
        "relative_drift": res.drift,
        "kernels": model.kernels.name,
    }
    rec.tolerances = {"relative_drift": 1e-3}
    rows = zip(res.times.tolist(), res.tip.tolist(), res.kinetic.tolist(), res.bending.tolist(),
               res.shear.tolist())
    rec.table(["t", "tip", "kinetic", "bending", "shear"], rows)
    return rec


def cmd_validate(args):
    rec = Record("validate", _params(args))
    groups = None
    if args.groups:
        groups = [g.strip() for g in args.groups.split(",") if g.strip()]
        bad = [g for g in groups if g not in validation.GROUPS]
        if bad:
            raise UsageError(f"--groups: unknown group(s) {bad}; choose from {list(validation.GROUPS)}")
    _identity_rows(rec, validation.run_suite(groups, seed=args.seed, samples=args.samples))
    return rec


# -- parser ------------------------------------------------------------------------


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="write here instead of stdout")
    p.add_argument("--config", help="JSON file of flag defaults; explicit flags win")
    return p


def _beam_flags(p):
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--area", type=float, default=1.0)
    p.add_argument("--E", type=float, default=1.0)
    p.add_argument("--inertia", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=5.0 / 6.0)
    p.add_argument("--G", type=float, default=10.0)


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="fracdim", description="Calculus in non-integer-dimensional spaces.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", parents=[common], help="volumes, areas, effective coordinates, masses")
    p.add_argument("--quantity", default="ball-volume",
                   choices=("ball-volume", "sphere-area", "effective-coordinate", "axis-mass", "mass"))
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--alphas", default="1,1,1")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--x", default="1")
    p.add_argument("--variant", choices=("X", "Q"), default="X")
    p.add_argument("--edges", default="1,1,1")
    p.add_argument("--rho0", type=float, default=1.0)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("integrate", parents=[common], help="product-measure integrals")
    p.add_argument("--integrand", choices=("gaussian", "exp-decay", "polynomial"), default="gaussian")
    p.add_argument("--mode", choices=("product", "radial", "angular"), default="product")
    p.add_argument("--alphas", default="0.625,0.875,1.0")
    p.add_argument("--D", type=float, default=None, help="total dimension, split over the axes")
    p.add_argument("--halfwidth", type=float, default=None)
    p.add_argument("--nodes", type=int, default=10)
    p.add_argument("--panels", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--mc", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=10**6)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("operators", parents=[common], help="apply operators or verify identities")
    p.add_argument("--operator", default="laplacian",
                   choices=("laplacian", "div-grad") + altops.KINDS)
    p.add_argument("--alphas", default="0.7,1.2,0.9")
    p.add_argument("--field", default="mixed")
    p.add_argument("--l", type=float, default=None)
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verify", action="store_true")
    p.set_defaults(func=cmd_operators)

    p = sub.add_parser("poisson", parents=[common], help="single-variable Poisson problems")
    p.add_argument("--operator", choices=poisson.OPERATORS, default="news")
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--f", choices=tuple(SOURCES), default="const")
    p.add_argument("--interval", default="0.1,2")
    p.add_argument("--bc", default="0,0")
    p.add_argument("--method", choices=("analytic", "numeric"), default="analytic")
    p.add_argument("--nodes", type=int, default=2001)
    p.add_argument("--samples", type=int, default=21)
    p.add_argument("--check-paper-form", action="store_true")
    p.set_defaults(func=cmd_poisson)

    p = sub.add_parser("beam", help="cantilever modes and Timoshenko dynamics")
    bsub = p.add_subparsers(dest="beam_command", required=True)
    q = bsub.add_parser("modes", parents=[common])
    _beam_flags(q)
    q.add_argument("--count", type=int, default=3)
    q.add_argument("--shape", type=int, default=None, help="emit this mode's shape as the table")
    q.add_argument("--points", type=int, default=101)
    q.add_argument("--paper-literal", action="store_true")
    q.set_defaults(func=cmd_beam_modes)
    q = bsub.add_parser("simulate", parents=[common])
    _beam_flags(q)
    q.add_argument("--nodes", type=int, default=400)
    q.add_argument("--steps", type=int, default=10_000)
    q.add_argument("--every", type=int, default=100)
    q.add_argument("--dt", type=float, default=None)
    q.add_argument("--amplitude", type=float, default=0.01)
    q.set_defaults(func=cmd_beam_simulate)

    p = sub.add_parser("validate", parents=[common], help="run the identity suite")
    p.add_argument("--groups", default=None, help=f"comma-separated subset of {','.join(validation.GROUPS)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10**6)
    p.set_defaults(func=cmd_validate)
    return parser


def _leaf_parser(parser, argv):
    # the subparser that will receive the flags, for applying config defaults
    action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for i, tok in enumerate(argv):
        if tok in action.choices:
            sp = action.choices[tok]
            inner = [a for a in sp._actions if isinstance(a, argparse._SubParsersAction)]
            if inner:
                for tok2 in argv[i + 1:]:
                    if tok2 in inner[0].choices:
                        return inner[0].choices[tok2]
            return sp
    return None


def _apply_config(parser, argv, path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--config: cannot read {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("--config: expected a JSON object")
    leaf = _leaf_parser(parser, argv)
    known = {a.dest for a in leaf._actions}
    norm = {}
    for k, v in cfg.items():
        dest = k.replace("-", "_")
        if dest not in known:
            raise UsageError(f"--config: unknown key {k!r}")
        if isinstance(v, list):
            v = ",".join(repr(float(t)) for t in v)
        norm[dest] = v
    leaf.set_defaults(**norm)
    args = parser.parse_args(argv)
    # argparse converts string defaults only; convert the rest here
    for a in leaf._actions:
        if a.dest in norm and a.type is not None and not isinstance(getattr(args, a.dest), str):
            setattr(args, a.dest, a.type(getattr(args, a.dest)))
    return args


def _setup_logging():
    level = os.environ.get("FRACDIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    _setup_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        if args.config:
            args = _apply_config(parser, argv, args.config)
        log.info("running %s", args.command)
        rec = args.func(args)
        text = rec.render(args.format)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_NUMERIC if rec.failed else EXIT_OK
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FracdimError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
