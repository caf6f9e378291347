"""Cantilever beams of fractal material.

Along the beam axis ``d_{x,alpha} = d/dX`` with ``X`` the effective
coordinate, so every beam equation becomes the classical one on
``[0, Lambda]`` with ``Lambda = X(L)``.  The Euler-Bernoulli part is modal
analysis in closed form; the Timoshenko part is a time-domain solver on a
grid uniform in ``X``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

from . import _kernels
from .errors import DomainError, InvalidDimension, RootBracketFailure, StabilityViolation, ValidationError
from .measure import check_alpha, effective_x, inverse_effective_x

MAX_ALPHA = 1.5
ROOT_TOL = 1e-12


@dataclass(frozen=True)
class BeamConfig:
    """Material, geometry and axial dimension of a homogeneous fractal beam."""

    rho: float = 1.0
    A: float = 1.0
    E: float = 1.0
    I_d: float = 1.0
    kappa_shear: float = 5.0 / 6.0
    G: float = 0.4
    L: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        for name in ("rho", "A", "E", "I_d", "kappa_shear", "G", "L"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0.0):
                raise ValidationError(f"{name} must be finite and > 0, got {v}")
            object.__setattr__(self, name, v)
        a = check_alpha(self.alpha)
        if a > MAX_ALPHA:
            raise InvalidDimension(f"beam axis dimension must lie in (0, {MAX_ALPHA}], got {a}")
        object.__setattr__(self, "alpha", a)

    @property
    def effective_length(self):
        """``Lambda = X(L)``."""
        return effective_x(self.alpha, self.L)

    @property
    def EI(self):
        return self.E * self.I_d

    @property
    def rhoA(self):
        return self.rho * self.A

    @property
    def rhoI(self):
        return self.rho * self.I_d

    @property
    def kGA(self):
        return self.kappa_shear * self.G * self.A


# -- characteristic equation ---------------------------------------------------


def frequency_function(z):
    """``cos z + 1/cosh z``: the cantilever equation divided by ``cosh z``.

    Same roots as ``cosh z cos z + 1`` but bounded, so a residual is
    meaningful at large ``z``.
    """
    z = np.asarray(z, dtype=float)
    return np.cos(z) + 1.0 / np.cosh(z)


def _frequency_derivative(z):
    return -math.sin(z) - math.tanh(z) / math.cosh(z)


def _cantilever_root(n, tol=ROOT_TOL):
    # cos z changes sign across [(n-1) pi, n pi] and the sech term is too
    # small to move it, so each such interval holds exactly one root
    lo, hi = (n - 1) * math.pi, n * math.pi
    flo, fhi = float(frequency_function(lo)), float(frequency_function(hi))
    if flo * fhi > 0.0:
        raise RootBracketFailure(f"no sign change for root {n} on [{lo}, {hi}]")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = float(frequency_function(mid))
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < 1e-9:
            break
    z = 0.5 * (lo + hi)
    for _ in range(8):
        step = float(frequency_function(z)) / _frequency_derivative(z)
        z -= step
        if abs(step) < 1e-15 * z:
            break
    if not abs(float(frequency_function(z))) <= tol:
        raise RootBracketFailure(f"root {n} did not converge: residual {float(frequency_function(z)):.3g}")
    return z


@functools.lru_cache(maxsize=None)
def cantilever_roots(count):
    """First ``count`` positive roots ``z_n`` of ``cosh z cos z + 1 = 0``."""
    count = int(count)
    if count < 1:
        raise ValidationError("need at least one root")
    return tuple(_cantilever_root(n) for n in range(1, count + 1))


def characteristic_roots(config, count, paper_literal=False):
    """Wavenumbers ``k_n = z_n / Lambda`` (``z_n / L`` with ``paper_literal``)."""
    z = np.array(cantilever_roots(count))
    return z / (config.L if paper_literal else config.effective_length)


def natural_frequencies(config, roots):
    """``omega_n = k_n**2 sqrt(E I / (rho A))``."""
    k = np.asarray(roots, dtype=float)
    return k * k * math.sqrt(config.EI / config.rhoA)


# -- mode shapes ------------------------------------------------------------------


@dataclass
class ModalResult:
    """One Euler-Bernoulli cantilever mode.

    ``shape`` holds ``w_n`` sampled at ``x`` (``X`` alongside); ``C`` is the
    mode constant and ``w0`` the amplitude.
    """

    index: int
    root: float
    frequency: float
    shape_constant: float
    x: np.ndarray
    X: np.ndarray
    shape: np.ndarray
    w0: float = 1.0
    paper_literal: bool = False
    boundary_residuals: dict = field(default_factory=dict)


class ModeShape:
    """``w0 (cosh u - cos u + C (sin u - sinh u))`` with ``u = k chi``.

    The hyperbolic part is evaluated as ``e**-u (1 + C)/2 + e**u (1 - C)/2``
    with ``1 - C`` formed without cancellation, so high modes stay accurate.
    ``chi = X(x)`` by default and ``x**alpha`` in paper-literal mode, where
    ``C`` is formed at ``k L**alpha``.
    """

    def __init__(self, config, n, w0=1.0, paper_literal=False):
        self.config = config
        self.n = int(n)
        self.w0 = float(w0)
        self.paper_literal = paper_literal
        k = characteristic_roots(config, self.n, paper_literal)[-1]
        self.k = float(k)
        end = config.L**config.alpha if paper_literal else config.effective_length
        z = self.k * end
        s, c = math.sin(z), math.cos(z)
        if z > 30.0:
            # sinh z and cosh z are e**z / 2 to working precision
            denom = 2.0 * s * math.exp(-z) + 1.0
            self.C = (2.0 * c * math.exp(-z) + 1.0) / denom
            self.one_minus_C = 2.0 * (s - c) * math.exp(-z) / denom
        else:
            denom = s + math.sinh(z)
            self.C = (c + math.cosh(z)) / denom
            self.one_minus_C = (s - c - math.exp(-z)) / denom
        self.end = end

    def chi(self, x):
        x = np.asarray(x, dtype=float)
        if self.paper_literal:
            return np.abs(x) ** self.config.alpha
        return effective_x(self.config.alpha, x)

    def _parts(self, u):
        ep = np.exp(-u)
        en = np.exp(u)
        # cosh u - C sinh u  and  sinh u - C cosh u
        hc = 0.5 * (ep * (1.0 + self.C) + en * self.one_minus_C)
        hs = 0.5 * (-ep * (1.0 + self.C) + en * self.one_minus_C)
        return hc, hs, np.cos(u), np.sin(u)

    def derivative_chi(self, chi, order=0):
        """``d^order w / d chi^order`` at ``chi``."""
        u = self.k * np.asarray(chi, dtype=float)
        hc, hs, cu, su = self._parts(u)
        C = self.C
        # near the clamp use forms that vanish exactly at u = 0
        gap = 2.0 * (np.sinh(0.5 * u) ** 2 + np.sin(0.5 * u) ** 2)  # cosh u - cos u
        small = np.abs(u) < 1.0
        if order in (0, 4):
            out = np.where(small, gap + C * (su - np.sinh(u)), hc - cu + C * su)
        elif order == 1:
            out = np.where(small, np.sinh(u) + su - C * gap, hs + su + C * cu)
        elif order == 2:
            out = hc + cu - C * su
        elif order == 3:
            out = hs - su - C * cu
        else:
            raise ValidationError("orders 0..4 are available")
        return self.w0 * self.k**order * out

    def __call__(self, x):
        return self.derivative_chi(self.chi(x), 0)

    def boundary_residuals(self):
        """The four clamped/free conditions, relative to ``max |w|`` on the beam."""
        chi = np.linspace(0.0, self.end, 2001)
        scale = float(np.max(np.abs(self.derivative_chi(chi))))
        return {
            "w(0)": abs(float(self.derivative_chi(0.0, 0))) / scale,
            "dw(0)": abs(float(self.derivative_chi(0.0, 1))) / scale,
            "d2w(L)": abs(float(self.derivative_chi(self.end, 2))) / scale,
            "d3w(L)": abs(float(self.derivative_chi(self.end, 3))) / scale,
        }


def mode_shape(config, n, x=None, w0=1.0, paper_literal=False, points=201):
    """Sample mode ``n`` and collect its root, frequency and boundary residuals."""
    m = ModeShape(config, n, w0, paper_literal)
    if x is None:
        x = np.linspace(0.0, config.L, points)
    x = np.asarray(x, dtype=float)
    return ModalResult(
        index=int(n),
        root=m.k,
        frequency=float(natural_frequencies(config, [m.k])[0]),
        shape_constant=m.C,
        x=x,
        X=effective_x(config.alpha, x),
        shape=m(x),
        w0=m.w0,
        paper_literal=paper_literal,
        boundary_residuals=m.boundary_residuals(),
    )


def modal_inner_product(config, m, n, nodes=400):
    """``int w_m w_n dX / sqrt(int w_m**2 dX int w_n**2 dX)`` over the beam."""
    a, b = ModeShape(config, m), ModeShape(config, n)
    t, w = np.polynomial.legendre.leggauss(nodes)
    lam = config.effective_length
    chi = 0.5 * lam * (t + 1.0)
    wa, wb = a.derivative_chi(chi), b.derivative_chi(chi)
    ab = np.dot(w, wa * wb)
    return float(ab / math.sqrt(np.dot(w, wa * wa) * np.dot(w, wb * wb)))


# -- Euler-Bernoulli residual -------------------------------------------------------


def _d1(g, s, h):
    return (g(s - 2 * h) - 8.0 * g(s - h) + 8.0 * g(s + h) - g(s + 2 * h)) / (12.0 * h)


def euler_bernoulli_residual(w, config, x=None, t=None, wavenumber=None, resolution=0.02):
    """``max |rho A w_tt + E I d_{x,alpha}^4 w|`` normalised by ``E I k**4 max |w|``.

    ``w(x, t)`` is any callable.  ``d_{x,alpha}`` is applied four times as
    a five-point difference in ``X``; ``w_tt`` as a five-point second
    difference.  Steps are ``resolution / k`` in ``X`` and ``resolution /
    omega`` in time, with ``k`` the ``wavenumber`` hint (first cantilever
    wavenumber by default).  Sample points must keep every stencil at
    ``X > 0``.
    """
    k = float(wavenumber) if wavenumber is not None else float(characteristic_roots(config, 1)[0])
    omega = float(natural_frequencies(config, [k])[0])
    if x is None:
        x = np.linspace(0.2 * config.L, config.L, 17)
    if t is None:
        t = np.linspace(0.0, 2.0 * math.pi / omega, 9)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    a = config.alpha
    h = resolution / k
    X = effective_x(a, x)
    if np.any(x <= 0.0) or np.any(X - 8.0 * h <= 0.0):
        raise DomainError("sample points too close to x = 0 for the nested stencils")
    XX, TT = np.meshgrid(X, t, indexing="ij")

    def in_X(s):
        return w(inverse_effective_x(a, s), TT)

    d = in_X
    for _ in range(4):
        d = functools.partial(_d1, d, h=h)
    d4 = d(XX)
    tau = resolution / omega

    def g(s):
        return w(inverse_effective_x(a, XX), s)

    wtt = (-g(TT - 2 * tau) + 16 * g(TT - tau) - 30 * g(TT) + 16 * g(TT + tau) - g(TT + 2 * tau)) / (
        12.0 * tau * tau
    )
    r = config.rhoA * wtt + config.EI * d4
    scale = config.EI * k**4 * max(float(np.max(np.abs(in_X(XX)))), np.finfo(float).tiny)
    return float(np.max(np.abs(r))) / scale


def modal_solution(config, n, w0=1.0, paper_literal=False):
    """``w_n(x) cos(omega_n t)`` as a callable of ``(x, t)``."""
    m = ModeShape(config, n, w0, paper_literal)
    omega = float(natural_frequencies(config, [m.k])[0])
    return lambda x, t: m(x) * np.cos(omega * np.asarray(t, dtype=float))


# -- Timoshenko --------------------------------------------------------------------


def transfer_solution(classical, alpha):
    """``(x, t) -> classical(X(alpha, x), t)``: a solution of the alpha-equations."""
    a = check_alpha(alpha)
    return lambda x, t: classical(effective_x(a, x), t)


@dataclass
class TimoshenkoState:
    """Nodal deflection ``w``, rotation ``phi``, their rates and accelerations.

    Node 0 is the clamped end and stays zero.
    """

    w: np.ndarray
    phi: np.ndarray
    vw: np.ndarray
    vphi: np.ndarray
    aw: np.ndarray
    aphi: np.ndarray
    t: float = 0.0

    def copy(self):
        return TimoshenkoState(*(np.array(v) for v in (self.w, self.phi, self.vw, self.vphi, self.aw,
                                                         self.aphi)), t=self.t)


@dataclass
class SimulationResult:
    times: np.ndarray
    tip: np.ndarray
    kinetic: np.ndarray
    bending: np.ndarray
    shear: np.ndarray
    state: TimoshenkoState

    @property
    def total(self):
        return self.kinetic + self.bending + self.shear

    @property
    def drift(self):
        """Largest relative deviation of the total energy from its start value."""
        e = self.total
        return float(np.max(np.abs(e - e[0])) / e[0]) if e[0] > 0 else float(np.max(np.abs(e)))


class TimoshenkoModel:
    """Finite elements on ``nodes`` points uniform in ``X``.

    Element ``e`` carries the shear strain
    ``(w[e+1] - w[e]) / h - (phi[e] + phi[e+1]) / 2`` and the curvature
    ``(phi[e+1] - phi[e]) / h``; the potential is the sum over elements of
    ``h (kGA gamma**2 + EI kappa**2) / 2``, the discrete form of the
    Lagrangian's potential terms with measure ``dX``.  Free-end conditions
    hold naturally.  Masses are lumped.
    """

    def __init__(self, config, nodes=400):
        if nodes < 3:
            raise ValidationError("need at least 3 nodes")
        self.config = config
        self.nodes = int(nodes)
        lam = config.effective_length
        self.X = np.linspace(0.0, lam, self.nodes)
        self.x = inverse_effective_x(config.alpha, self.X)
        self.x[-1] = config.L
        self.h = lam / (self.nodes - 1)
        self.mass = np.full(self.nodes, self.h)
        self.mass[-1] = 0.5 * self.h
        self.mass[0] = 0.0
        self._factor = {}
        self.kernels = _kernels.ACTIVE

    # free dofs are interleaved [w1, phi1, w2, phi2, ...]

    def stiffness(self):
        """Sparse stiffness on the free dofs."""
        c, h, n = self.config, self.h, self.nodes
        bg = np.array([-1.0 / h, -0.5, 1.0 / h, -0.5])
        bk = np.array([0.0, -1.0 / h, 0.0, 1.0 / h])
        ke = h * (c.kGA * np.outer(bg, bg) + c.EI * np.outer(bk, bk))
        rows, cols, vals = [], [], []
        for e in range(n - 1):
            dofs = np.array([2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3]) - 2
            keep = dofs >= 0
            d = dofs[keep]
            sub = ke[np.ix_(keep, keep)]
            rows.append(np.repeat(d, len(d)))
            cols.append(np.tile(d, len(d)))
            vals.append(sub.ravel())
        m = 2 * (n - 1)
        return scipy.sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m)
        )

    def mass_diagonal(self):
        c = self.config
        out = np.empty(2 * (self.nodes - 1))
        out[0::2] = c.rhoA * self.mass[1:]
        out[1::2] = c.rhoI * self.mass[1:]
        return out

    def _banded(self, matrix, bands=4):
        dense = matrix.toarray() if scipy.sparse.issparse(matrix) else matrix
        m = dense.shape[0]
        ab = np.zeros((bands, m))
        for k in range(bands):
            ab[k, : m - k] = np.diagonal(dense, -k)
        return ab

    def factor(self, dt):
        """Cholesky factor of ``M + dt**2 / 4 K`` in lower banded storage (cached)."""
        key = float(dt)
        if key not in self._factor:
            K = self.stiffness()
            eff = scipy.sparse.diags(self.mass_diagonal()) + 0.25 * key * key * K
            self._factor[key] = self.kernels.band_cholesky(self._banded(eff.tocsr()))
        return self._factor[key]

    def potential_gradient(self, w, phi):
        """Gradient of the discrete potential at nodal ``(w, phi)``; zero at node 0."""
        c = self.config
        fw = np.empty(self.nodes)
        fphi = np.empty(self.nodes)
        self.kernels.timo_forces(np.ascontiguousarray(w, dtype=float), np.ascontiguousarray(phi, dtype=float),
                                 self.h, c.kGA, c.EI, fw, fphi)
        return fw, fphi

    def potential(self, w, phi):
        _, bend, shear = self.energy_parts(w, phi, np.zeros(self.nodes), np.zeros(self.nodes))
        return bend + shear

    def energy_parts(self, w, phi, vw, vphi):
        c = self.config
        kin, bend, shear = self.kernels.timo_energy(
            *(np.ascontiguousarray(v, dtype=float) for v in (w, phi, vw, vphi)),
            self.mass, self.h, c.kGA, c.EI, c.rhoA, c.rhoI,
        )
        return float(kin), float(bend), float(shear)

    def initial_state(self, w0, phi0=None, vw0=None, vphi0=None):
        """State from callables of physical ``x``; ``phi0`` defaults to ``d_{x,alpha} w0``.

        The default rotation is the shear-free one, computed by central
        differences of ``w0`` on the grid.
        """
        x = self.x
        w = np.asarray(w0(x), dtype=float) * np.ones(self.nodes)
        if phi0 is None:
            phi = np.gradient(w, self.h, edge_order=2)
        else:
            phi = np.asarray(phi0(x), dtype=float) * np.ones(self.nodes)
        vw = np.zeros(self.nodes) if vw0 is None else np.asarray(vw0(x), dtype=float) * np.ones(self.nodes)
        vphi = np.zeros(self.nodes) if vphi0 is None else np.asarray(vphi0(x), dtype=float) * np.ones(self.nodes)
        for v in (w, phi, vw, vphi):
            v[0] = 0.0
        return self.state_from(w, phi, vw, vphi)

    def state_from(self, w, phi, vw, vphi, t=0.0):
        c = self.config
        fw, fphi = self.potential_gradient(w, phi)
        aw = np.zeros(self.nodes)
        aphi = np.zeros(self.nodes)
        aw[1:] = -fw[1:] / (c.rhoA * self.mass[1:])
        aphi[1:] = -fphi[1:] / (c.rhoI * self.mass[1:])
        return TimoshenkoState(np.array(w, dtype=float), np.array(phi, dtype=float), np.array(vw, dtype=float),
                               np.array(vphi, dtype=float), aw, aphi, t)

    def energy(self, state):
        return self.energy_parts(state.w, state.phi, state.vw, state.vphi)

    def simulate(self, state, dt, steps, every=1, check_stability=True):
        """Advance ``steps`` Newmark steps (average acceleration) from a copy of ``state``."""
        if not dt > 0.0:
            raise ValidationError("dt must be > 0")
        steps, every = int(steps), int(every)
        if steps < 0 or every < 1:
            raise ValidationError("steps must be >= 0 and every >= 1")
        c = self.config
        s = state.copy()
        cb = self.factor(dt)
        tip, ener = self.kernels.newmark(s.w, s.phi, s.vw, s.vphi, s.aw, s.aphi, self.mass, cb, self.h,
                                         c.kGA, c.EI, c.rhoA, c.rhoI, float(dt), steps, every)
        s.t = state.t + steps * dt
        if not (np.all(np.isfinite(s.w)) and np.all(np.isfinite(s.phi))):
            raise StabilityViolation("non-finite state during time stepping")
        ener = np.asarray(ener).reshape(-1, 3)
        times = state.t + dt * every * np.arange(len(tip))
        if check_stability:
            _check_growth(ener.sum(axis=1), every)
        return SimulationResult(times, np.asarray(tip), ener[:, 0], ener[:, 1], ener[:, 2], s)

    def modes(self, count):
        """Lowest ``count`` angular frequencies and mode vectors of the discrete system."""
        K = self.stiffness().toarray()
        Mdiag = self.mass_diagonal()
        vals, vecs = scipy.linalg.eigh(K, np.diag(Mdiag), subset_by_index=[0, count - 1])
        return np.sqrt(np.maximum(vals, 0.0)), vecs

    def mode_state(self, vector, amplitude=1.0):
        """State at rest in the shape of a discrete mode vector."""
        w = np.zeros(self.nodes)
        phi = np.zeros(self.nodes)
        w[1:] = amplitude * vector[0::2]
        phi[1:] = amplitude * vector[1::2]
        z = np.zeros(self.nodes)
        return self.state_from(w, phi, z, z.copy())


def _check_growth(total, every, limit=1e-3, window=1000):
    # energy may not grow by more than `limit` relative per `window` steps
    stride = max(1, window // every)
    for i in range(stride, len(total), stride):
        ref = total[i - stride]
        if ref > 0.0 and total[i] > ref * (1.0 + limit):
            raise StabilityViolation(
                f"energy grew by {total[i] / ref - 1.0:.3g} over {window} steps"
            )


@functools.lru_cache(maxsize=8)
def timoshenko_model(config, nodes=400):
    return TimoshenkoModel(config, nodes)


def timoshenko_step(state, config, dt, nodes=None):
    """One Newmark step; the grid size is taken from the state."""
    model = timoshenko_model(config, nodes or len(state.w))
    return model.simulate(state, dt, 1).state


def timoshenko_energy(state, config):
    """``(kinetic, bending, shear)`` of ``state``, integrated over ``dX``."""
    return timoshenko_model(config, len(state.w)).energy(state)


def simulate(config, w0, dt, steps, nodes=400, every=1, phi0=None, vw0=None, vphi0=None):
    """Free vibration from initial data given as callables of ``x``."""
    model = timoshenko_model(config, nodes)
    return model.simulate(model.initial_state(w0, phi0, vw0, vphi0), dt, steps, every)
