"""Identity and closed-form checks across the package.

Each group returns :class:`Check` records: a measured error, the tolerance
it is held to and whether it passed.  Nothing here depends on wall-clock
time, so a seeded run is reproducible bit for bit.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import altops, beam, measure, poisson, quadrature
from .diffops import (
    FiniteDifference,
    LameFrame,
    VectorField,
    curl_alpha,
    derivative,
    div_alpha,
    grad_alpha,
    laplace_beltrami,
    scalar_laplacian,
)
from .measure import MultiIndex, effective_x


@dataclass
class Check:
    group: str
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "group": self.group,
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "detail": self.detail,
        }


def _le(group, name, value, tol, **detail):
    value = float(value)
    return Check(group, name, value, float(tol), bool(value <= tol), detail)


# -- shared batteries ------------------------------------------------------------

ANISOTROPIC = ((0.7, 1.2, 0.9), (0.5, 0.8, 1.5), (1.3, 0.6, 1.0))
ZOO_ALPHAS = (0.4, 0.8, 1.3, 1.6)


def scalar_battery(alphas):
    """Smooth scalar fields on ``x > 0``; the first is linear in the effective coordinates."""
    a1, a2, a3 = alphas
    return (
        ("effective-product", lambda x, y, z: effective_x(a1, x) * effective_x(a2, y) * effective_x(a3, z)),
        ("mixed", lambda x, y, z: np.sin(x * y) + z**3 * x),
        ("exp-log", lambda x, y, z: np.exp(0.4 * x) * np.log1p(y * z)),
    )


def vector_battery():
    return (
        ("trig-poly", VectorField([lambda a, b, c: np.sin(a * b) + c**2, lambda a, b, c: a * b * c,
                                   lambda a, b, c: np.exp(0.3 * a) * b])),
        ("rational", VectorField([lambda a, b, c: b / (1.0 + a * a), lambda a, b, c: np.cos(c) * a,
                                  lambda a, b, c: a * b * b + c])),
    )


def zoo_battery():
    return (
        ("power", lambda a, b, c: a**1.3 + b * c),
        ("exp", lambda a, b, c: np.exp(0.5 * a) * b + c),
        ("trig", lambda a, b, c: np.sin(a) + b * b * c),
        ("cubic", lambda a, b, c: a * a * b - c**3 + a * b * c),
        ("log", lambda a, b, c: np.log(1 + a * b * c)),
    )


def sample_points(n=20, lo=0.5, hi=2.0, seed=2):
    rng = np.random.Generator(np.random.Philox(seed))
    return tuple(rng.uniform(lo, hi, (3, n)))


# -- groups ------------------------------------------------------------------------


def check_measure():
    """Ball volume against quadrature of the weight on ``[-R, R]``; sphere area as its derivative."""
    out = []
    worst_v, worst_s = 0.0, 0.0
    fd = FiniteDifference(step=1e-2, richardson=1)
    for a in (0.3, 0.5, 1.0, 1.5, 2.0, 2.9):
        for R in (0.5, 1.0, 4.0):
            vq = quadrature.integrate_1d(lambda x: np.ones_like(x), (-R, R), a)
            worst_v = max(worst_v, abs(measure.ball_volume(a, R) - vq) / vq)

            def vol(r):
                return np.array([quadrature.integrate_1d(lambda x: np.ones_like(x), (-t, t), a)
                                 for t in np.atleast_1d(r)]).reshape(np.shape(r))

            sq = float(derivative(vol, R, 1, fd, singular_at_zero=True))
            worst_s = max(worst_s, abs(measure.sphere_area(a, R) - sq) / abs(sq))
    out.append(_le("measure", "ball_volume vs quadrature", worst_v, 1e-10))
    out.append(_le("measure", "sphere_area vs d(volume)/dR", worst_s, 1e-10))
    return out


GAUSSIAN_Q = quadrature.QuadratureSpec(nodes_per_panel=10, panels=4, rel_tol=1e-8)
GAUSSIAN_SHARES = (0.25, 0.35, 0.4)


def check_spherical(seed=0, samples=10**6):
    """Gaussian over the product measure equals ``pi**(D/2)``; Monte Carlo agrees within 4 stderr."""
    out = []

    def f(x, y, z):
        return np.exp(-(x * x + y * y + z * z))

    for D in (1.5, 2.0, 2.5, 3.0):
        alphas = tuple(D * s for s in GAUSSIAN_SHARES)
        exact = math.pi ** (0.5 * D)
        b = quadrature.gaussian_halfwidth(D, 1e-9 * exact)
        box = quadrature.Box3.cube(-b, b)
        val = quadrature.integrate_product(f, box, alphas, GAUSSIAN_Q)
        out.append(_le("spherical", f"gaussian D={D}", abs(val - exact) / exact, 1e-6, halfwidth=b))
        mc, se = quadrature.mc_integrate_product(f, box, alphas, seed=seed, n=samples)
        out.append(_le("spherical", f"monte-carlo D={D} (in stderr)", abs(mc - exact) / se, 4.0,
                       estimate=mc, stderr=se))
        rad = quadrature.radial_integral(lambda r: np.exp(-r * r), D, 12.0)
        out.append(_le("spherical", f"radial reduction D={D}", abs(rad - exact) / exact, 1e-10))
    return out


def check_angular():
    grid = np.linspace(0.4, 2.5, 5)
    wp, wt = 0.0, 0.0
    for m, n in itertools.product(grid, grid):
        cp = quadrature.angular_phi_closed_form(m, n)
        ct = quadrature.angular_theta_closed_form(m, n)
        wp = max(wp, abs(quadrature.angular_integral_phi(m, n) - cp) / cp)
        wt = max(wt, abs(quadrature.angular_integral_theta(m, n) - ct) / ct)
    return [
        _le("angular", "phi integral vs Gamma closed form", wp, 1e-8),
        _le("angular", "theta integral vs Gamma closed form", wt, 1e-8),
    ]


def _monomials(degree=3):
    return [e for e in itertools.product(range(degree + 1), repeat=3) if sum(e) <= degree]


def _mono(e):
    return lambda x, y, z: x ** e[0] * y ** e[1] * z ** e[2]


def _mono_d(e, k, order=1):
    c = 1.0
    p = list(e)
    for _ in range(order):
        c *= p[k]
        p[k] = max(p[k] - 1, 0)
    return lambda x, y, z: c * x ** p[0] * y ** p[1] * z ** p[2]


def check_vector_calculus():
    out = []
    pts = sample_points(12, 0.3, 2.0, seed=3)
    for alphas in ANISOTROPIC:
        fr = LameFrame(MultiIndex(alphas))
        cg = dc = lg = lb = 0.0
        for _, f in scalar_battery(alphas):
            cg = max(cg, float(np.max(np.abs(curl_alpha(grad_alpha(f, fr), fr)(*pts)))))
            l1 = scalar_laplacian(f, fr)(*pts)
            lg = max(lg, float(np.max(np.abs(l1 - div_alpha(grad_alpha(f, fr), fr)(*pts)))))
            lb = max(lb, float(np.max(np.abs(l1 - laplace_beltrami(f, fr)(*pts)))))
        for _, u in vector_battery():
            dc = max(dc, float(np.max(np.abs(div_alpha(curl_alpha(u, fr), fr)(*pts)))))
        tag = f"alpha={alphas}"
        out.append(_le("vector-calculus", f"curl grad = 0, {tag}", cg, 1e-6))
        out.append(_le("vector-calculus", f"div curl = 0, {tag}", dc, 1e-6))
        out.append(_le("vector-calculus", f"laplacian = div grad, {tag}", lg, 1e-6))
        out.append(_le("vector-calculus", f"laplacian = Laplace-Beltrami, {tag}", lb, 1e-6))

    # alpha = (1, 1, 1): classical values on monomials of degree <= 3
    fr = LameFrame(MultiIndex((1.0, 1.0, 1.0)))
    rng = np.random.Generator(np.random.Philox(4))
    P = tuple(rng.uniform(-1.5, 1.5, (3, 8)))
    err = 0.0
    monos = _monomials()
    for e in monos:
        f = _mono(e)
        g = grad_alpha(f, fr)(*P)
        for k in range(3):
            err = max(err, float(np.max(np.abs(g[k] - _mono_d(e, k)(*P)))))
        lap = sum(_mono_d(e, k, 2)(*P) for k in range(3))
        err = max(err, float(np.max(np.abs(scalar_laplacian(f, fr)(*P) - lap))))
    for e1, e2, e3 in zip(monos, monos[7:] + monos[:7], monos[13:] + monos[:13]):
        u = VectorField([_mono(e1), _mono(e2), _mono(e3)])
        div = _mono_d(e1, 0)(*P) + _mono_d(e2, 1)(*P) + _mono_d(e3, 2)(*P)
        err = max(err, float(np.max(np.abs(div_alpha(u, fr)(*P) - div))))
        c = curl_alpha(u, fr)(*P)
        curl = (
            _mono_d(e3, 1)(*P) - _mono_d(e2, 2)(*P),
            _mono_d(e1, 2)(*P) - _mono_d(e3, 0)(*P),
            _mono_d(e2, 0)(*P) - _mono_d(e1, 1)(*P),
        )
        for k in range(3):
            err = max(err, float(np.max(np.abs(c[k] - curl[k]))))
    out.append(_le("vector-calculus", "alpha=(1,1,1) classical reduction", err, 1e-7))
    return out


def check_operator_zoo():
    out = []
    pts = sample_points()
    fd = altops.IDENTITY_FD
    w = {k: 0.0 for k in ("k1=kl", "k2=kl", "k2=sumD2", "k1=ps", "zmn=k2")}
    news_min, news_match = math.inf, 0.0

    def upd(key, a, b):
        w[key] = max(w[key], float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))))

    for a in ZOO_ALPHAS:
        iso = MultiIndex.isotropic(a, relaxed=True)
        spec = {kind: altops.LaplacianSpec(kind, iso, fd=fd) for kind in (altops.K1, altops.K2, altops.PS)}
        kl1 = altops.LaplacianSpec(altops.KL, iso, l=1.0 - 0.5 * a, fd=fd)
        kl2 = altops.LaplacianSpec(altops.KL, iso, l=0.5, fd=fd)
        for _, f in zoo_battery():
            k1 = altops.apply_laplacian(spec[altops.K1], f, pts)
            k2 = altops.apply_laplacian(spec[altops.K2], f, pts)
            upd("k1=kl", k1, altops.apply_laplacian_definitional(kl1, f, pts))
            upd("k2=kl", k2, altops.apply_laplacian_definitional(kl2, f, pts))
            upd("k2=sumD2", k2, altops.square_of_first_order(iso, f, pts, "calcagni", fd))
            upd("k1=ps", altops.apply_laplacian_definitional(spec[altops.K1], f, pts),
                altops.apply_laplacian(spec[altops.PS], f, pts))
        news = altops.LaplacianSpec(altops.NEWS, iso)
        ps = altops.LaplacianSpec(altops.PS, iso)
        for _, f in zoo_battery():
            rep = altops.operator_discrepancy(news, ps, f, np.array(pts))
            news_min = min(news_min, rep.max_abs)
            news_match = max(news_match, rep.analytic_mismatch)
    for alphas in ANISOTROPIC:
        mi = MultiIndex(alphas)
        k2n = altops.LaplacianSpec(altops.K2, mi, weight=altops.NIDS_WEIGHT, fd=fd)
        for _, f in zoo_battery():
            upd("zmn=k2", altops.square_of_first_order(mi, f, pts, "zmn", fd),
                altops.apply_laplacian_definitional(k2n, f, pts))
    out.append(_le("operator-zoo", "K1 = K_{alpha,1-alpha/2}", w["k1=kl"], 1e-10))
    out.append(_le("operator-zoo", "K2 = K_{alpha,1/2}", w["k2=kl"], 1e-10))
    out.append(_le("operator-zoo", "K2 = sum D_k^2", w["k2=sumD2"], 1e-10))
    out.append(_le("operator-zoo", "K1 = PS (isotropic)", w["k1=ps"], 1e-10))
    out.append(_le("operator-zoo", "ZMN = K2 (per axis)", w["zmn=k2"], 1e-10))
    out.append(Check("operator-zoo", "NEWS - PS is nonzero", news_min, 1e-3, bool(news_min > 1e-3),
                     {"rule": "value > tolerance"}))
    out.append(_le("operator-zoo", "NEWS - PS matches difference term", news_match, 1e-8))
    return out


POISSON_SOURCES = (
    ("1", lambda x: np.ones_like(x)),
    ("x", lambda x: x),
    ("sin x", np.sin),
)


def check_poisson():
    out = []
    worst, basis = 0.0, 0.0
    xs = np.linspace(0.1, 2.0, 400)
    for op in poisson.OPERATORS:
        for a in (0.5, 0.8, 1.0, 1.3):
            for _, f in POISSON_SOURCES:
                pr = poisson.PoissonProblem(op, a, f, (0.1, 2.0), (0.3, -0.2))
                an = poisson.poisson_solve_analytic(pr)
                nu = poisson.poisson_solve_numeric(pr)
                worst = max(worst, float(np.max(np.abs(an(xs) - nu(xs)))))
            for h in poisson.poisson_homogeneous_basis(op, a):
                A, B, C = poisson.operator_coefficients(op, a, xs)
                r = A * h.derivative(2)(xs) + B * h.derivative(1)(xs) + C * h(xs)
                basis = max(basis, float(np.max(np.abs(r))))
    out.append(_le("poisson", "analytic = numeric (max norm)", worst, 1e-5))
    out.append(_le("poisson", "homogeneous basis residual", basis, 1e-8))
    return out


def _bisect_roots(count):
    # plain bisection on the sign of cosh z cos z + 1, no derivative polish
    roots = []
    for n in range(1, count + 1):
        lo, hi = (n - 1) * math.pi, n * math.pi
        slo = math.copysign(1.0, math.cosh(lo) * math.cos(lo) + 1.0)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if math.copysign(1.0, math.cosh(mid) * math.cos(mid) + 1.0) == slo:
                lo = mid
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    return roots


def check_cantilever():
    out = []
    z = beam.cantilever_roots(10)
    res = float(np.max(np.abs(beam.frequency_function(np.array(z)))))
    out.append(_le("cantilever", "|cos z + sech z| at roots n<=10", res, 1e-12))
    ref = _bisect_roots(10)
    out.append(_le("cantilever", "roots vs bisection", max(abs(p - q) for p, q in zip(z, ref)), 1e-10))
    cfg = beam.BeamConfig(alpha=0.8)
    bc = 0.0
    for n in range(1, 11):
        bc = max(bc, max(beam.ModeShape(cfg, n).boundary_residuals().values()))
    out.append(_le("cantilever", "boundary conditions, modes 1..10", bc, 1e-6))
    orth = max(abs(beam.modal_inner_product(cfg, m, n)) for m in range(1, 5) for n in range(m + 1, 5))
    out.append(_le("cantilever", "modal orthogonality m!=n<=4", orth, 1e-6))
    eb = 0.0
    k = beam.characteristic_roots(cfg, 10)
    for n in range(1, 11):
        eb = max(eb, beam.euler_bernoulli_residual(beam.modal_solution(cfg, n), cfg, wavenumber=k[n - 1]))
    out.append(_le("cantilever", "Euler-Bernoulli residual alpha=0.8, modes 1..10", eb, 1e-5))
    return out


TIMOSHENKO_G = 10.0


def timoshenko_transfer_error(nodes=400, alpha=0.8):
    """Relative max difference after one fundamental period between a direct
    fractal run and the transferred classical run on the same effective length."""
    cfg_f = beam.BeamConfig(alpha=alpha, G=TIMOSHENKO_G)
    lam = cfg_f.effective_length
    cfg_c = beam.BeamConfig(alpha=1.0, G=TIMOSHENKO_G, L=lam)
    mc = beam.TimoshenkoModel(cfg_c, nodes)
    mf = beam.TimoshenkoModel(cfg_f, nodes)
    omega, _ = mf.modes(1)
    period = 2.0 * math.pi / float(omega[0])
    steps = 400
    dt = period / steps

    def w0c(x):
        return 0.01 * (x / lam) ** 2

    rc = mc.simulate(mc.initial_state(w0c), dt, steps)
    rf = mf.simulate(mf.initial_state(lambda x: w0c(effective_x(alpha, x))), dt, steps)
    xc, wc = mc.x, rc.state.w

    def classical(x, t):
        return np.interp(x, xc, wc)

    wf = beam.transfer_solution(classical, alpha)(mf.x, period)
    return float(np.max(np.abs(wf - rf.state.w)) / np.max(np.abs(rf.state.w)))


def timoshenko_energy_drift(nodes=400, alpha=0.8, steps=10_000):
    cfg = beam.BeamConfig(alpha=alpha, G=TIMOSHENKO_G)
    m = beam.TimoshenkoModel(cfg, nodes)
    omega, _ = m.modes(1)
    dt = 2.0 * math.pi / float(omega[0]) / 200.0
    lam = cfg.effective_length
    r = m.simulate(m.initial_state(lambda x: 0.01 * (effective_x(alpha, x) / lam) ** 2), dt, steps, every=10)
    return r.drift


def check_timoshenko():
    return [
        _le("timoshenko", "energy drift over 1e4 steps", timoshenko_energy_drift(), 1e-3),
        _le("timoshenko", "transfer alpha=1 -> 0.8 after one period", timoshenko_transfer_error(), 1e-2),
    ]


def check_mass_law():
    alphas = (0.7, 1.0, 1.3)
    L = np.geomspace(0.5, 8.0, 9)
    worst = 0.0
    for k in range(3):
        m = []
        for v in L:
            edges = [1.0, 1.0, 1.0]
            edges[k] = v
            m.append(measure.parallelepiped_mass(alphas, edges))
        slope = np.polyfit(np.log(L), np.log(m), 1)[0]
        worst = max(worst, abs(slope - alphas[k]))
    return [_le("mass-law", "log-log slope per edge = alpha_k", worst, 1e-12)]


GROUPS = {
    "measure": check_measure,
    "spherical": check_spherical,
    "angular": check_angular,
    "vector-calculus": check_vector_calculus,
    "operator-zoo": check_operator_zoo,
    "poisson": check_poisson,
    "cantilever": check_cantilever,
    "timoshenko": check_timoshenko,
    "mass-law": check_mass_law,
}


def run_suite(groups=None, seed=0, samples=10**6):
    """Run the named groups (all by default) in a fixed order."""
    names = list(GROUPS) if groups is None else list(groups)
    checks = []
    for name in names:
        if name not in GROUPS:
            raise KeyError(f"unknown check group {name!r}")
        fn = GROUPS[name]
        checks.extend(fn(seed=seed, samples=samples) if name == "spherical" else fn())
    return checks
