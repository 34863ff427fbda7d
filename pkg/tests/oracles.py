"""Slow reference implementations used as test oracles."""
import math

import mpmath
import numpy as np


def brute_separation(z):
    z = list(z)
    best = math.inf
    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            best = min(best, abs(z[i] - z[j]))
    return best


def brute_relative_separation(z, tol=1e-12):
    z = [complex(v) for v in z]
    centers = list(z)
    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            d = abs(z[j] - z[i])
            if d <= 2:
                mid = (z[i] + z[j]) / 2
                h = math.sqrt(max(1 - d * d / 4, 0.0))
                u = 1j * (z[j] - z[i]) / d
                centers += [mid + h * u, mid - h * u]
    return max((sum(abs(c - p) <= 1 + tol for p in z) for c in centers), default=0)


def brute_sliding(z, R, closed=True):
    """Max count over all anchors (x_i, y_j) drawn from the point coordinates: an O(n^3) enumeration."""
    z = np.asarray(z, dtype=complex)
    if len(z) == 0:
        return 0
    xs, ys = z.real, z.imag
    if closed:
        inx = (xs[None, :] >= xs[:, None]) & (xs[None, :] <= xs[:, None] + R)
        iny = (ys[None, :] >= ys[:, None]) & (ys[None, :] <= ys[:, None] + R)
    else:
        inx = (xs[None, :] >= xs[:, None]) & (xs[None, :] < xs[:, None] + R)
        iny = (ys[None, :] >= ys[:, None]) & (ys[None, :] < ys[:, None] + R)
    return int((inx.astype(np.int64) @ iny.T.astype(np.int64)).max())


def quad_inner(f, g, t0=-8.0, t1=8.0, dt=1e-3):
    t = np.arange(round((t1 - t0) / dt) + 1) * dt + t0
    w = np.full(t.size, dt)
    w[[0, -1]] /= 2
    return complex(np.sum(w * f(t) * np.conj(g(t))))


def phi(t):
    return 2 ** 0.25 * np.exp(-np.pi * t ** 2)


def shifted_phi(tau, nu):
    return lambda t: np.exp(2j * np.pi * nu * t) * phi(t - tau)


def quad_ambiguity(tau, nu):
    """<phi, pi(tau, nu) phi> by trapezoid quadrature."""
    return quad_inner(phi, shifted_phi(tau, nu))


def theta_sigma(gamma, z, dps=30):
    """Weierstrass sigma of gamma(Z + iZ) through the Jacobi theta function."""
    with mpmath.workdps(dps):
        q = mpmath.exp(-mpmath.pi)
        v = mpmath.pi * mpmath.mpc(z) / gamma
        th = mpmath.jtheta(1, v, q)
        d = mpmath.jtheta(1, 0, q, 1)
        val = gamma / mpmath.pi * mpmath.exp(mpmath.pi * mpmath.mpc(z) ** 2 / (2 * gamma ** 2)) * th / d
        return complex(val)


def disc_count_lattice(gamma, box):
    a, b, c, d = box
    nm = math.floor(b / gamma) - math.ceil(a / gamma) + 1
    nn = math.floor(d / gamma) - math.ceil(c / gamma) + 1
    return max(nm, 0) * max(nn, 0)


def random_separated(rng, n, sep, box):
    pts = []
    while len(pts) < n:
        c = complex(rng.uniform(0, box), rng.uniform(0, box))
        if all(abs(c - p) >= sep for p in pts):
            pts.append(c)
    return np.array(pts)


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


__all__ = [n for n in dir() if not n.startswith("_") and n not in ("math", "mpmath", "np")]
