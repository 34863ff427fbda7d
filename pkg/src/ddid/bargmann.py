"""Bargmann transform, Fock norms and lattice-based entire functions.

Entire functions here are evaluated through complex logarithms: ``log_eval``
returns log|F| + 1j*arg F (arg only modulo 2 pi), so Gaussian-size
magnitudes never overflow.  ``log_abs_arg`` splits such a value into the
(log-magnitude, phase) pair used in exports.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .density import SquareLattice, sliding_count, uniformly_close_enumeration
from .measures import as_points, mutual_separation, separation
from .timefreq import GaborExpansion, GridTooSmall, RING_TOL, SampledSignal, check_support


def log_abs_arg(logval):
    logval = np.asarray(logval, dtype=complex)
    return logval.real, np.angle(np.exp(1j * logval.imag))


def _logsumexp(terms, axis=0):
    terms = np.asarray(terms, dtype=complex)
    m = np.max(terms.real, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        s = np.sum(np.exp(terms - m), axis=axis, keepdims=True)
        return np.squeeze(np.log(s) + m, axis=axis)


class FockFunction:
    def __init__(self, log_evaluator, description):
        self._log = log_evaluator
        self.description = description

    def log_eval(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._log(z)

    def __call__(self, z):
        return np.exp(self.log_eval(z))

    def __repr__(self):
        return f"FockFunction({self.description})"


def bargmann(x):
    """Bargmann transform of a signal.

    Gabor terms map to exponentials: B(pi(mu) phi)(z) = exp(pi mu z - pi |mu|^2 / 2 + i pi tau nu).
    Sampled signals use trapezoid quadrature of the defining integral.
    """
    if isinstance(x, GaborExpansion):
        c, mu = x.coeffs, x.locs

        def log_eval(z):
            if len(c) == 0:
                return np.full(z.shape, -np.inf + 0j)
            terms = (np.log(c.astype(complex))[:, None] + np.pi * mu[:, None] * z.ravel()[None, :]
                     - np.pi * np.abs(mu[:, None]) ** 2 / 2 + 1j * np.pi * mu.real[:, None] * mu.imag[:, None])
            return _logsumexp(terms).reshape(z.shape)

        return FockFunction(log_eval, "bargmann-of-signal")
    if not isinstance(x, SampledSignal):
        raise TypeError("bargmann expects a GaborExpansion or SampledSignal")
    check_support(x)
    t, w = x.t, x.weights * x.samples

    def log_eval_sampled(z):
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for i in range(0, len(flat), 128):
            zz = flat[i:i + 128, None]
            # exponent written as -pi (t - z)^2 + pi z^2 / 2 to keep the integrand bounded
            k = np.exp(-np.pi * (t[None, :] - zz) ** 2) @ w
            out[i:i + 128] = np.log(2 ** 0.25 * k) + np.pi * flat[i:i + 128] ** 2 / 2
        return out.reshape(z.shape)

    return FockFunction(log_eval_sampled, "bargmann-of-signal")


def fock_norm(F, p, grid):
    """Trapezoid approximation of the F^p norm over ``grid`` (p = inf gives the grid sup)."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    z = grid.nodes
    lw = F.log_eval(z).real - np.pi * np.abs(z) ** 2 / 2
    if math.isinf(p):
        return float(np.exp(lw.max()))
    mass = np.exp(p * lw) * grid.weights
    total = mass.sum()
    ring = mass[0].sum() + mass[-1].sum() + mass[1:-1, 0].sum() + mass[1:-1, -1].sum()
    if total > 0 and ring > RING_TOL * total:
        raise GridTooSmall(f"grid too small: {ring / total:.2e} of the Fock mass sits on the boundary ring")
    return float(total ** (1 / p))


def _logsin(x):
    # principal-branch-free log sin for large |Im x|
    up = x.imag > 0
    xu = np.where(up, x, 0)
    xd = np.where(up, 0, x)
    a = -1j * xu + np.log1p(-np.exp(2j * xu)) - np.log(-2j)
    b = 1j * xd + np.log1p(-np.exp(-2j * xd)) - np.log(2j)
    return np.where(up, a, b)


def default_truncation(gamma, zmax):
    return max(3 * max(zmax, gamma), zmax + 6 * gamma)


def log_sigma_over_z(gamma, z, truncation_radius=None):
    """log(sigma_gamma(z) / z).

    Each lattice row {gamma (m + i n) : m in Z} is multiplied out exactly with
    the sine product, cotangent and cosecant series; rows with |gamma n| above
    the truncation radius are dropped.  Their contribution decays like
    exp(-2 pi (|n| - |Im z| / gamma)).
    """
    z = np.asarray(z, dtype=complex)
    zmax = float(np.abs(z).max()) if z.size else 0.0
    R = default_truncation(gamma, zmax) if truncation_radius is None else float(truncation_radius)
    if R < 3 * max(zmax, gamma) * (1 - 1e-12):
        raise ValueError(f"truncation radius {R} below 3*max(|z|, gamma) = {3 * max(zmax, gamma)}")
    w = z / gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        row0 = np.where(w == 0, 0j, _logsin(np.pi * w) - np.log(np.pi * np.where(w == 0, 1, w)))
        out = row0 + (np.pi * w) ** 2 / 6
        for n in range(1, int(math.floor(R / gamma + 1e-12)) + 1):
            sh = math.sinh(math.pi * n)
            coth = math.cosh(math.pi * n) / sh
            for c in (1j * n, -1j * n):
                # sin(pi c) = i sinh(pi n) sign(n); cot(pi c) = -i coth(pi n) sign(n)
                sgn = 1 if c.imag > 0 else -1
                out = out + (_logsin(np.pi * (c - w)) - np.log(1j * sgn * sh)
                             - 1j * sgn * np.pi * coth * w - (np.pi * w) ** 2 / (2 * sh * sh))
    # exact zeros on the lattice
    r = np.round(w)
    hit = (np.abs(w - r) <= 1e-12 * np.maximum(1, np.abs(w))) & (r != 0) & (np.abs(r.imag) * gamma <= R)
    return np.where(hit, -np.inf + 0j, out)


def sigma(lat, z, truncation_radius=None, log=False):
    """Weierstrass sigma function of the square lattice gamma (Z + iZ)."""
    gamma = lat.gamma if isinstance(lat, SquareLattice) else float(lat)
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore"):
        L = log_sigma_over_z(gamma, z, truncation_radius) + np.log(z)
    return L if log else np.exp(L)


def sigma_disc_product(gamma, z, radius):
    """Literal product over lattice points with |omega| <= radius (slowly convergent)."""
    N = int(radius / gamma) + 1
    m = np.arange(-N, N + 1)
    om = gamma * (m[:, None] + 1j * m[None, :]).ravel()
    om = om[(np.abs(om) <= radius) & (om != 0)]
    z = np.asarray(z, dtype=complex)
    u = z[..., None] / om
    with np.errstate(divide="ignore"):
        return z * np.exp(np.sum(np.log1p(-u) + u + u * u / 2, axis=-1))


class HypothesisError(ValueError):
    def __init__(self, clause, message):
        super().__init__(f"hypothesis {clause} fails: {message}")
        self.clause = clause


def rayleigh_ladder(z, R, theta, ratio=math.sqrt(2)):
    """Window sizes R' >= R at which the open-square Rayleigh bound is checked.

    Beyond sqrt(#points / theta) the bound holds for every window, so the ladder stops there.
    """
    top = max(R, math.sqrt(max(len(z), 1) / theta))
    out = [R]
    while out[-1] < top:
        out.append(min(out[-1] * ratio, top))
    return out


@dataclass
class EntireProductModel:
    """Zero set lambda_{m,n} = zeros[k] paired with lattice index indices[k]."""

    zeros: np.ndarray
    indices: np.ndarray
    lattice: SquareLattice
    s: float
    theta: float
    R: float
    rho: float
    truncation_radius: float = None
    special: np.ndarray = field(init=False)
    ladder: list = field(init=False)

    def __post_init__(self):
        self.zeros = as_points(self.zeros)
        self.indices = np.asarray(self.indices, dtype=int).reshape(-1, 2)
        if len(self.zeros) != len(self.indices):
            raise ValueError("zeros and indices differ in length")
        if len(np.unique(self.zeros)) != len(self.zeros):
            raise HypothesisError("zeros", "repeated zero")
        if len({tuple(r) for r in self.indices}) != len(self.indices):
            raise HypothesisError("indices", "lattice index used twice")
        if self.truncation_radius is not None and not self.truncation_radius > 0:
            raise ValueError("truncation radius must be positive")
        origin = np.flatnonzero((self.indices == 0).all(axis=1))
        if len(origin) != 1 or self.zeros[origin[0]] != 0:
            raise HypothesisError("normalization", "index (0,0) must carry the zero at the origin")
        self.special = np.flatnonzero(np.abs(self.zeros) <= self.s / 2)
        self.check()

    @property
    def omegas(self):
        return self.lattice.gamma * (self.indices[:, 0] + 1j * self.indices[:, 1])

    def check(self):
        sp = self.special
        if len(sp) > 2:
            raise HypothesisError("(i)", f"{len(sp)} zeros within s/2 of the origin")
        others = self.zeros[sp][self.zeros[sp] != 0]
        if others.size and np.abs(others).min() < self.rho:
            raise HypothesisError("(i)", f"exceptional zero at distance {np.abs(others).min()} < rho={self.rho}")
        self.ladder = rayleigh_ladder(self.zeros, self.R, self.theta)
        for r in self.ladder:
            k = sliding_count(self.zeros, r, "open")
            if k > self.theta * r * r:
                raise HypothesisError("(ii)", f"{k} zeros in an open square of side {r} (limit {self.theta * r * r})")
        off = np.abs(self.zeros - self.omegas)
        if off.size and off.max() > self.R:
            raise HypothesisError("(iii)", f"lattice offset {off.max()} exceeds R={self.R}")


def _log_gtilde_raw(model, z):
    g = model.lattice.gamma
    nz = (model.indices != 0).any(axis=1)
    lam, om = model.zeros[nz], model.omegas[nz]
    sp = np.zeros(len(model.zeros), dtype=bool)
    sp[model.special] = True
    sp = sp[nz]
    out = log_sigma_over_z(g, z, model.truncation_radius)
    for a, w, special in zip(lam, om, sp):
        u, v = z / a, z / w
        out = out + np.log1p(-u) + u - np.log1p(-v) - v
        if special:
            out = out + v - u
    return out


def log_gtilde(model, z, guard=1e-4, radius=1e-2, nodes=32):
    """log of the divided-out product with unit value at the origin.

    sigma(z)/z carries the full lattice; the finite set of indices in the model
    swaps each lattice zero omega for the prescribed zero lambda, and the
    exceptional zeros near the origin get their linear exponential corrected.
    Near a swapped-out lattice point the quotient is 0/0 numerically, so the
    value there is taken as the mean over a small circle (exact for entire
    functions up to aliasing of order radius^nodes).
    """
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        out = _log_gtilde_raw(model, flat)
        om = model.omegas[(model.indices != 0).any(axis=1)]
        if om.size:
            near = np.abs(flat[:, None] - om[None, :]).min(axis=1) < guard * model.lattice.gamma
            for i in np.flatnonzero(near):
                ring = flat[i] + radius * model.lattice.gamma * np.exp(2j * np.pi * (np.arange(nodes) + 0.5) / nodes)
                vals = _log_gtilde_raw(model, ring)
                out[i] = _logsumexp(vals) - math.log(nodes)
        out = np.where(flat == 0, 0j, out)
        lam = model.zeros[(model.indices != 0).any(axis=1)]
        if lam.size:
            out = np.where(np.isin(flat, lam), -np.inf + 0j, out)
    return out.reshape(z.shape)


def gtilde(model, z, log=False):
    L = log_gtilde(model, z)
    return L if log else np.exp(L)


def growth_certificate(model, grid):
    """Fit constants (c, C) with |g~(z)| exp(-pi |z|^2 / (2 gamma^2)) (rho ^ 1) <= C exp(c |z| log|z|) on grid.

    Among all admissible pairs the one minimizing the bound at the grid's
    largest radius is returned.
    """
    z = grid.nodes.ravel()
    L = (log_gtilde(model, z).real - np.pi * np.abs(z) ** 2 / (2 * model.lattice.gamma ** 2)
         + math.log(min(model.rho, 1.0)))
    keep = np.isfinite(L)
    L, r = L[keep], np.abs(z[keep])
    t = np.where(r > 1, r * np.log(np.maximum(r, 1)), 0.0)
    # variables (c, logC): minimize logC + c*max(t) s.t. L <= logC + c t, c >= 0
    res = linprog([t.max(), 1.0], A_ub=np.stack([-t, -np.ones_like(t)], axis=1), b_ub=-L,
                  bounds=[(0, None), (None, None)], method="highs")
    c, logC = res.x
    return float(c), float(math.exp(logC))


@dataclass
class Interpolant:
    function: FockFunction
    nodes: np.ndarray
    beta: np.ndarray
    gamma: float
    theta: float
    s: float
    rho: float
    models: list

    def __call__(self, z):
        return self.function(z)

    def log_eval(self, z):
        return self.function.log_eval(z)


def rayleigh_radius(sets, theta, R_min=None):
    """Smallest ladder radius R0 from which every set obeys n+(open) <= theta R^2 on the whole ladder."""
    zs = [as_points(s) for s in sets]
    n = max((len(z) for z in zs), default=1)
    R = R_min or 0.25
    top = math.sqrt(max(n, 1) / theta)
    ladder = []
    while R < top:
        ladder.append(R)
        R *= math.sqrt(2)
    ladder.append(top)
    good = [all(sliding_count(z, r, "open") <= theta * r * r for z in zs if len(z)) for r in ladder]
    k = len(good)
    while k > 0 and good[k - 1]:
        k -= 1
    return ladder[k] if k < len(ladder) else top


def recenter(z, lam):
    """The set {conj(l) - conj(lam)}, which has a point at the origin."""
    return np.conj(z) - np.conj(lam)


def model_from_points(points, gamma, theta, R, s=None, rho=None, truncation_radius=None):
    """Enumerate ``points`` (which must contain 0) against Omega_gamma and build the product model.

    The lattice pairing comes from uniformly_close_enumeration; the point at
    the origin is then moved to index (0, 0), swapping with whatever point held
    that index.  The model's offset radius is R v 2R'.
    """
    z = as_points(points)
    if not np.any(z == 0):
        raise HypothesisError("normalization", "the zero set must contain the origin")
    if s is None:
        s = separation(z)
        if math.isinf(s):
            s = 1.0
    if rho is None:
        near = np.abs(z[(z != 0) & (np.abs(z) <= s / 2)])
        rho = min(s / 2, near.min()) if near.size else s / 2
    enum = uniformly_close_enumeration(z, gamma, theta, R)
    idx = enum.indices.copy()
    k0 = int(np.flatnonzero(z == 0)[0])
    at_origin = np.flatnonzero((idx == 0).all(axis=1))
    if len(at_origin):
        idx[at_origin[0]] = idx[k0]
    idx[k0] = 0
    return EntireProductModel(z, idx, SquareLattice(gamma), s, theta, max(R, 2 * enum.Rprime), rho,
                              truncation_radius)


def interpolant(L1, L2, beta, gamma=None, theta=None, s=None, density=0.0):
    """Entire function F with F(conj(lambda)) = exp(pi |lambda|^2 / 2) beta_lambda on L1 u L2.

    ``beta`` is indexed like the sorted union of the two supports
    (``SupportSet(L1).union(L2).z``).  ``density`` is the class density
    estimate; the window 2 density <= 2 theta < gamma^-2 < 1 is enforced.
    """
    a, b = as_points(L1), as_points(L2)
    lam_all = np.unique(np.concatenate([a, b]))
    beta = np.asarray(beta, dtype=complex).ravel()
    if len(beta) != len(lam_all):
        raise ValueError(f"{len(beta)} weights for {len(lam_all)} interpolation nodes")
    if s is None:
        s = min(separation(a), separation(b))
        if math.isinf(s):
            ms = mutual_separation(a, b)
            s = ms if math.isfinite(ms) else 1.0
    rho = min(mutual_separation(a, b), s / 2)
    if not rho > 0:
        raise ValueError("rho = 0: the supports are not separated")
    if theta is None:
        theta = (density + 0.5) / 2
    if gamma is None:
        gamma = math.sqrt((1 + 1 / (2 * theta)) / 2)
    if not (2 * density <= 2 * theta < gamma ** -2 < 1):
        raise ValueError(f"parameter window 2*density <= 2 theta < gamma^-2 < 1 violated "
                         f"(density={density}, theta={theta}, gamma^-2={gamma ** -2})")
    R0 = rayleigh_radius([a, b], theta)
    models, logs = [], []
    for lam, bl in zip(lam_all, beta):
        model = model_from_points(recenter(lam_all, lam), gamma, 2 * theta, R0, s, rho)
        models.append(model)
        logs.append((lam, bl, model))

    def log_eval(z):
        flat = z.ravel()
        terms = []
        for lam, bl, model in logs:
            with np.errstate(divide="ignore"):
                lb = np.log(complex(bl)) if bl != 0 else -np.inf + 0j
            terms.append(lb + np.pi * lam * flat - np.pi * abs(lam) ** 2 / 2
                         + log_gtilde(model, flat - np.conj(lam)))
        return _logsumexp(np.array(terms)).reshape(z.shape)

    F = FockFunction(log_eval, "interpolant")
    return Interpolant(F, lam_all, beta, gamma, theta, s, rho, models)
