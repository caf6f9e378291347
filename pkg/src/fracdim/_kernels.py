"""Hot loops: tridiagonal elimination and the Timoshenko time stepper.

Each kernel exists twice.  The loop versions below are compiled with
``numba.njit`` when numba is importable; the ``*_numpy`` versions use
vectorised numpy and scipy's banded LAPACK wrappers.  Setting the
environment variable ``FRACDIM_NO_NUMBA=1`` before import selects the numpy
path everywhere.  Both paths are always importable (``JIT`` and ``NUMPY``
namespaces) so tests and the benchmark can compare them directly.
"""
import os
from types import SimpleNamespace

import numpy as np
import scipy.linalg

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("FRACDIM_NO_NUMBA", "").lower() not in (
    "1",
    "true",
    "yes",
)


# -- tridiagonal ------------------------------------------------------------


def _thomas_loop(lower, diag, upper, rhs):
    # lower[0] and upper[-1] are ignored
    n = diag.shape[0]
    c = np.empty(n)
    d = np.empty(n)
    c[0] = upper[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i] * c[i - 1]
        c[i] = upper[i] / m if i < n - 1 else 0.0
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m
    x = np.empty(n)
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def _thomas_numpy(lower, diag, upper, rhs):
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    return scipy.linalg.solve_banded((1, 1), ab, rhs)


# -- symmetric banded (lower storage, scipy layout: ab[k, j] = A[j + k, j]) --


def _band_cholesky_loop(ab):
    nb, n = ab.shape
    cb = ab.copy()
    for j in range(n):
        s = cb[0, j]
        for k in range(1, nb):
            if j - k < 0:
                break
            s -= cb[k, j - k] * cb[k, j - k]
        if s <= 0.0:
            raise ValueError("matrix is not positive definite")
        d = np.sqrt(s)
        cb[0, j] = d
        for i in range(1, nb):
            if j + i >= n:
                break
            t = cb[i, j]
            for k in range(1, nb - i):
                if j - k < 0:
                    break
                t -= cb[i + k, j - k] * cb[k, j - k]
            cb[i, j] = t / d
    return cb


def _band_cho_solve_loop(cb, b):
    nb, n = cb.shape
    y = b.copy()
    for j in range(n):
        y[j] /= cb[0, j]
        for i in range(1, nb):
            if j + i >= n:
                break
            y[j + i] -= cb[i, j] * y[j]
    for j in range(n - 1, -1, -1):
        s = y[j]
        for i in range(1, nb):
            if j + i >= n:
                break
            s -= cb[i, j] * y[j + i]
        y[j] = s / cb[0, j]
    return y


def _band_cholesky_numpy(ab):
    return scipy.linalg.cholesky_banded(ab, lower=True)


def _band_cho_solve_numpy(cb, b):
    return scipy.linalg.cho_solve_banded((cb, True), b)


# -- Timoshenko beam on a grid uniform in the effective coordinate ----------
#
# Nodes 0..n-1, node 0 clamped.  Element e joins nodes e and e+1 with
#   shear strain  g_e = (w[e+1] - w[e]) / h - (phi[e] + phi[e+1]) / 2
#   curvature     k_e = (phi[e+1] - phi[e]) / h
# and the discrete potential sum_e h (S g_e**2 + B k_e**2) / 2.


def _timo_forces_loop(w, phi, h, S, B, fw, fphi):
    n = w.shape[0]
    for i in range(n):
        fw[i] = 0.0
        fphi[i] = 0.0
    for e in range(n - 1):
        g = (w[e + 1] - w[e]) / h - 0.5 * (phi[e] + phi[e + 1])
        k = (phi[e + 1] - phi[e]) / h
        fw[e] -= S * g
        fw[e + 1] += S * g
        fphi[e] += -0.5 * h * S * g - B * k
        fphi[e + 1] += -0.5 * h * S * g + B * k
    fw[0] = 0.0
    fphi[0] = 0.0


def _timo_forces_numpy(w, phi, h, S, B, fw, fphi):
    g = np.diff(w) / h - 0.5 * (phi[:-1] + phi[1:])
    k = np.diff(phi) / h
    fw[:] = 0.0
    fphi[:] = 0.0
    fw[:-1] -= S * g
    fw[1:] += S * g
    fphi[:-1] += -0.5 * h * S * g - B * k
    fphi[1:] += -0.5 * h * S * g + B * k
    fw[0] = 0.0
    fphi[0] = 0.0


def _timo_energy_loop(w, phi, vw, vphi, mass, h, S, B, rhoA, rhoI):
    n = w.shape[0]
    kin = 0.0
    for i in range(1, n):
        kin += 0.5 * mass[i] * (rhoA * vw[i] * vw[i] + rhoI * vphi[i] * vphi[i])
    bend = 0.0
    shear = 0.0
    for e in range(n - 1):
        g = (w[e + 1] - w[e]) / h - 0.5 * (phi[e] + phi[e + 1])
        k = (phi[e + 1] - phi[e]) / h
        shear += 0.5 * h * S * g * g
        bend += 0.5 * h * B * k * k
    return kin, bend, shear


def _timo_energy_numpy(w, phi, vw, vphi, mass, h, S, B, rhoA, rhoI):
    kin = 0.5 * np.sum(mass[1:] * (rhoA * vw[1:] ** 2 + rhoI * vphi[1:] ** 2))
    g = np.diff(w) / h - 0.5 * (phi[:-1] + phi[1:])
    k = np.diff(phi) / h
    return float(kin), float(0.5 * h * B * np.dot(k, k)), float(0.5 * h * S * np.dot(g, g))


def _make_newmark(forces, energy, cho_solve):
    # average-acceleration Newmark: beta = 1/4, gamma = 1/2
    def run(w, phi, vw, vphi, aw, aphi, mass, cb, h, S, B, rhoA, rhoI, dt, steps, every):
        n = w.shape[0]
        nrec = steps // every + 1
        tip = np.empty(nrec)
        ener = np.empty((nrec, 3))
        fw = np.empty(n)
        fphi = np.empty(n)
        pw = np.empty(n)
        pphi = np.empty(n)
        rhs = np.empty(2 * (n - 1))
        q = 0.25 * dt * dt
        tip[0] = w[n - 1]
        e0 = energy(w, phi, vw, vphi, mass, h, S, B, rhoA, rhoI)
        ener[0, 0] = e0[0]
        ener[0, 1] = e0[1]
        ener[0, 2] = e0[2]
        r = 1
        for step in range(1, steps + 1):
            for i in range(n):
                pw[i] = w[i] + dt * vw[i] + q * aw[i]
                pphi[i] = phi[i] + dt * vphi[i] + q * aphi[i]
            forces(pw, pphi, h, S, B, fw, fphi)
            for i in range(1, n):
                rhs[2 * (i - 1)] = -fw[i]
                rhs[2 * (i - 1) + 1] = -fphi[i]
            sol = cho_solve(cb, rhs)
            for i in range(1, n):
                anw = sol[2 * (i - 1)]
                anp = sol[2 * (i - 1) + 1]
                w[i] = pw[i] + q * anw
                phi[i] = pphi[i] + q * anp
                vw[i] += 0.5 * dt * (aw[i] + anw)
                vphi[i] += 0.5 * dt * (aphi[i] + anp)
                aw[i] = anw
                aphi[i] = anp
            if step % every == 0:
                tip[r] = w[n - 1]
                e = energy(w, phi, vw, vphi, mass, h, S, B, rhoA, rhoI)
                ener[r, 0] = e[0]
                ener[r, 1] = e[1]
                ener[r, 2] = e[2]
                r += 1
        return tip, ener

    return run


def _newmark_numpy(w, phi, vw, vphi, aw, aphi, mass, cb, h, S, B, rhoA, rhoI, dt, steps, every):
    n = w.shape[0]
    q = 0.25 * dt * dt
    fw = np.empty(n)
    fphi = np.empty(n)
    tip = [w[-1]]
    ener = [_timo_energy_numpy(w, phi, vw, vphi, mass, h, S, B, rhoA, rhoI)]
    rhs = np.empty(2 * (n - 1))
    for step in range(1, steps + 1):
        pw = w + dt * vw + q * aw
        pphi = phi + dt * vphi + q * aphi
        _timo_forces_numpy(pw, pphi, h, S, B, fw, fphi)
        rhs[0::2] = -fw[1:]
        rhs[1::2] = -fphi[1:]
        sol = scipy.linalg.cho_solve_banded((cb, True), rhs, check_finite=False)
        anw = sol[0::2]
        anp = sol[1::2]
        w[1:] = pw[1:] + q * anw
        phi[1:] = pphi[1:] + q * anp
        vw[1:] += 0.5 * dt * (aw[1:] + anw)
        vphi[1:] += 0.5 * dt * (aphi[1:] + anp)
        aw[1:] = anw
        aphi[1:] = anp
        if step % every == 0:
            tip.append(w[-1])
            ener.append(_timo_energy_numpy(w, phi, vw, vphi, mass, h, S, B, rhoA, rhoI))
    return np.array(tip), np.array(ener)


NUMPY = SimpleNamespace(
    name="numpy",
    thomas=_thomas_numpy,
    band_cholesky=_band_cholesky_numpy,
    band_cho_solve=_band_cho_solve_numpy,
    timo_forces=_timo_forces_numpy,
    timo_energy=_timo_energy_numpy,
    newmark=_newmark_numpy,
)

if NUMBA_AVAILABLE:
    _jit = numba.njit(cache=True)
    _forces_jit = _jit(_timo_forces_loop)
    _energy_jit = _jit(_timo_energy_loop)
    _solve_jit = _jit(_band_cho_solve_loop)
    JIT = SimpleNamespace(
        name="numba",
        thomas=_jit(_thomas_loop),
        band_cholesky=_jit(_band_cholesky_loop),
        band_cho_solve=_solve_jit,
        timo_forces=_forces_jit,
        timo_energy=_energy_jit,
        newmark=_jit(_make_newmark(_forces_jit, _energy_jit, _solve_jit)),
    )
else:  # pragma: no cover
    JIT = None

ACTIVE = JIT if USE_NUMBA else NUMPY
