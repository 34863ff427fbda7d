"""Time-frequency shifts, the Gaussian STFT and the measurement operator.

Signals come in two kinds.  A GaborExpansion is a finite sum of shifted
Gaussians and is evaluated in closed form; a SampledSignal carries samples
on a uniform time grid and is handled by quadrature.
"""
import math
from dataclasses import dataclass

import numpy as np

from .measures import Point, as_points

RING_TOL = 1e-6


class GridTooSmall(ValueError):
    pass


def gaussian(t):
    return 2 ** 0.25 * np.exp(-np.pi * np.asarray(t, dtype=float) ** 2)


def gaussian_ambiguity(tau, nu):
    """(V_phi phi)(tau, nu) = <phi, pi(tau, nu) phi>."""
    tau, nu = np.asarray(tau, dtype=float), np.asarray(nu, dtype=float)
    return np.exp(-np.pi * (tau ** 2 + nu ** 2) / 2 - 1j * np.pi * tau * nu)


def _cross(mu, lam):
    # <pi(mu) phi, pi(lam) phi>, broadcasting over complex point arrays
    d = mu - lam
    return np.exp(-np.pi * (d.real ** 2 + d.imag ** 2) / 2
                  + 1j * np.pi * d.imag * (mu.real + lam.real))


class GaborExpansion:
    """x = sum_k c_k pi(lambda_k) phi."""

    __slots__ = ("coeffs", "locs")

    def __init__(self, coeffs=(), locs=()):
        c = np.asarray(coeffs, dtype=complex).ravel().copy()
        z = as_points(locs).copy()
        if len(c) != len(z):
            raise ValueError("coefficient and location counts differ")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(z))):
            raise ValueError("Gabor expansion has non-finite entries")
        c.setflags(write=False)
        z.setflags(write=False)
        self.coeffs, self.locs = c, z

    @classmethod
    def gaussian(cls):
        return cls([1.0], [0j])

    def __len__(self):
        return len(self.coeffs)

    def __repr__(self):
        return f"GaborExpansion({len(self)} terms)"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for c, z in zip(self.coeffs, self.locs):
            out += c * np.exp(2j * np.pi * z.imag * t) * gaussian(t - z.real)
        return out

    def __add__(self, other):
        return GaborExpansion(np.concatenate([self.coeffs, other.coeffs]),
                              np.concatenate([self.locs, other.locs]))

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, c):
        return GaborExpansion(complex(c) * self.coeffs, self.locs)

    __rmul__ = __mul__

    def simplify(self, tol=0.0):
        """Merge terms at identical locations and drop terms with |c| <= tol."""
        if len(self) == 0:
            return self
        uz, inv = np.unique(self.locs, return_inverse=True)
        uc = np.zeros(len(uz), dtype=complex)
        np.add.at(uc, inv, self.coeffs)
        keep = np.abs(uc) > tol
        return GaborExpansion(uc[keep], uz[keep])

    def sample(self, t0=-8.0, dt=1e-3, n=None):
        if n is None:
            n = int(round(-2 * t0 / dt)) + 1
        return SampledSignal(t0, dt, self(t0 + dt * np.arange(n)))


class SampledSignal:
    __slots__ = ("t0", "dt", "samples")

    def __init__(self, t0, dt, samples):
        if not dt > 0:
            raise ValueError("dt must be positive")
        x = np.asarray(samples, dtype=complex).ravel().copy()
        if not (math.isfinite(t0) and np.all(np.isfinite(x))):
            raise ValueError("sampled signal has non-finite entries")
        x.setflags(write=False)
        self.t0, self.dt, self.samples = float(t0), float(dt), x

    @property
    def t(self):
        return self.t0 + self.dt * np.arange(len(self.samples))

    @property
    def weights(self):
        w = np.full(len(self.samples), self.dt)
        w[[0, -1]] *= 0.5
        return w

    def __len__(self):
        return len(self.samples)

    def __repr__(self):
        return f"SampledSignal(t0={self.t0}, dt={self.dt}, n={len(self)})"

    def _same_grid(self, other):
        if not (len(self) == len(other) and self.t0 == other.t0 and self.dt == other.dt):
            raise ValueError("sampled signals live on different grids")

    def __add__(self, other):
        self._same_grid(other)
        return SampledSignal(self.t0, self.dt, self.samples + other.samples)

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, c):
        return SampledSignal(self.t0, self.dt, complex(c) * self.samples)

    __rmul__ = __mul__


def zero_like(x):
    if isinstance(x, SampledSignal):
        return SampledSignal(x.t0, x.dt, np.zeros(len(x)))
    return GaborExpansion()


def check_support(x, frac=0.01, tol=RING_TOL):
    """Energy in the outer ``frac`` of the samples at each end must be below tol of the total."""
    e = np.abs(x.samples) ** 2
    total = e.sum()
    if total == 0:
        return
    k = max(1, int(len(e) * frac))
    if (e[:k].sum() + e[-k:].sum()) > tol * total:
        raise GridTooSmall("sampled signal has too much energy near the ends of its time grid")


@dataclass(frozen=True)
class TFGrid:
    tau_range: tuple
    nu_range: tuple
    tau_step: float
    nu_step: float

    def __post_init__(self):
        if not (self.tau_step > 0 and self.nu_step > 0):
            raise ValueError("grid steps must be positive")
        if self.tau_range[1] < self.tau_range[0] or self.nu_range[1] < self.nu_range[0]:
            raise ValueError("empty grid range")

    @classmethod
    def square(cls, half_width, step, center=0j):
        c = complex(center)
        return cls((c.real - half_width, c.real + half_width), (c.imag - half_width, c.imag + half_width),
                   step, step)

    @staticmethod
    def _axis(rng, step):
        n = int(math.floor((rng[1] - rng[0]) / step + 1e-9)) + 1
        return rng[0] + step * np.arange(n)

    @property
    def taus(self):
        return self._axis(self.tau_range, self.tau_step)

    @property
    def nus(self):
        return self._axis(self.nu_range, self.nu_step)

    @property
    def shape(self):
        return len(self.taus), len(self.nus)

    @property
    def nodes(self):
        """Complex node array, shape (n_tau, n_nu)."""
        return self.taus[:, None] + 1j * self.nus[None, :]

    @property
    def weights(self):
        wt = np.full(len(self.taus), self.tau_step)
        wn = np.full(len(self.nus), self.nu_step)
        wt[[0, -1]] *= 0.5
        wn[[0, -1]] *= 0.5
        return wt[:, None] * wn[None, :]

    def shifted(self, z):
        z = complex(z)
        return TFGrid((self.tau_range[0] + z.real, self.tau_range[1] + z.real),
                      (self.nu_range[0] + z.imag, self.nu_range[1] + z.imag), self.tau_step, self.nu_step)


@dataclass(frozen=True)
class STFTField:
    grid: TFGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError("field shape does not match its grid")


def auto_grid(x, step=0.1, margin=6.0):
    """Grid covering the effective time-frequency support of x plus a margin."""
    if isinstance(x, GaborExpansion):
        z = x.locs if len(x) else np.zeros(1, dtype=complex)
        t_lo, t_hi, f_lo, f_hi = z.real.min(), z.real.max(), z.imag.min(), z.imag.max()
    else:
        e = np.abs(x.samples) ** 2
        c = np.cumsum(e) / max(e.sum(), 1e-300)
        t = x.t
        t_lo, t_hi = t[np.searchsorted(c, 1e-12)], t[min(np.searchsorted(c, 1 - 1e-12), len(t) - 1)]
        spectrum = np.abs(np.fft.fftshift(np.fft.fft(x.samples))) ** 2
        f = np.fft.fftshift(np.fft.fftfreq(len(x), x.dt))
        cs = np.cumsum(spectrum) / max(spectrum.sum(), 1e-300)
        f_lo, f_hi = f[np.searchsorted(cs, 1e-12)], f[min(np.searchsorted(cs, 1 - 1e-12), len(f) - 1)]
    lo_t = step * math.floor((t_lo - margin) / step)
    lo_f = step * math.floor((f_lo - margin) / step)
    nt = math.ceil((t_hi + margin - lo_t) / step)
    nf = math.ceil((f_hi + margin - lo_f) / step)
    return TFGrid((lo_t, lo_t + nt * step), (lo_f, lo_f + nf * step), step, step)


def tf_shift(x, lam):
    """pi(lambda) x = M_nu T_tau x."""
    lam = lam.z if isinstance(lam, Point) else complex(lam)
    tau, nu = lam.real, lam.imag
    if isinstance(x, GaborExpansion):
        # pi(lambda) pi(mu) = exp(-2 pi i tau_lambda nu_mu) pi(lambda + mu)
        return GaborExpansion(x.coeffs * np.exp(-2j * np.pi * tau * x.locs.imag), x.locs + lam)
    y = x.samples
    if tau != 0:
        y = _translate_samples(x, tau)
    if nu != 0:
        y = y * np.exp(2j * np.pi * nu * x.t)
    return SampledSignal(x.t0, x.dt, y)


def _translate_samples(x, tau, tol=1e-10):
    n = len(x)
    extent = n * x.dt
    if abs(tau) >= extent:
        raise GridTooSmall(f"shift {tau} exceeds the sampled extent {extent}")
    e = np.abs(x.samples) ** 2
    k = int(math.ceil(abs(tau) / x.dt))
    lost = e[n - k:].sum() if tau > 0 else e[:k].sum()
    if k and lost > tol * e.sum():
        raise GridTooSmall(f"shift {tau} moves signal energy off the sampled grid")
    # band-limited interpolation: phase ramp on a zero-padded spectrum
    m = 2 * n
    spectrum = np.fft.fft(x.samples, m)
    f = np.fft.fftfreq(m, x.dt)
    ramp = np.exp(-2j * np.pi * f * tau)
    if m % 2 == 0:
        ramp[m // 2] = np.cos(np.pi * tau / x.dt)
    return np.fft.ifft(spectrum * ramp)[:n]


def inner(x, y):
    """L^2 inner product <x, y>, linear in x."""
    if isinstance(x, GaborExpansion) and isinstance(y, GaborExpansion):
        if len(x) == 0 or len(y) == 0:
            return 0j
        g = _cross(x.locs[:, None], y.locs[None, :])
        return complex(np.sum(x.coeffs[:, None] * np.conj(y.coeffs)[None, :] * g))
    if isinstance(x, GaborExpansion):
        return np.conj(inner(y, x))
    if isinstance(y, GaborExpansion):
        ys = y(x.t)
    else:
        x._same_grid(y)
        ys = y.samples
    return complex(np.sum(x.weights * x.samples * np.conj(ys)))


def l2_norm(x):
    return math.sqrt(max(inner(x, x).real, 0.0))


def stft_at(x, nodes):
    """V_phi x at arbitrary complex nodes (any shape)."""
    nodes = np.asarray(nodes, dtype=complex)
    if isinstance(x, GaborExpansion):
        out = np.zeros(nodes.shape, dtype=complex)
        for c, mu in zip(x.coeffs, x.locs):
            out += c * _cross(mu, nodes)
        return out
    flat = nodes.ravel()
    t, w = x.t, x.weights * x.samples
    out = np.empty(flat.shape, dtype=complex)
    for i in range(0, len(flat), 256):
        zz = flat[i:i + 256, None]
        out[i:i + 256] = (gaussian(t[None, :] - zz.real) * np.exp(-2j * np.pi * zz.imag * t[None, :])) @ w
    return out.reshape(nodes.shape)


def stft(x, grid):
    if isinstance(x, GaborExpansion):
        return STFTField(grid, stft_at(x, grid.nodes))
    # separable kernel: gaussian window in tau times Fourier factor in nu
    t, w = x.t, x.weights * x.samples
    win = gaussian(t[None, :] - grid.taus[:, None]) * w[None, :]
    four = np.exp(-2j * np.pi * t[:, None] * grid.nus[None, :])
    return STFTField(grid, win @ four)


def _ring_check(mass):
    total = mass.sum()
    ring = mass[0].sum() + mass[-1].sum() + mass[1:-1, 0].sum() + mass[1:-1, -1].sum()
    if total > 0 and ring > RING_TOL * total:
        raise GridTooSmall(f"grid too small: {ring / total:.2e} of the mass sits on the boundary ring")
    return total


def mp_norm(x, p=2.0, grid=None, weighted=False):
    """Trapezoid approximation of the M^p norm (optionally weighted by 1+|z|)."""
    if not 1 <= p < math.inf:
        raise ValueError("p must lie in [1, inf)")
    grid = grid or auto_grid(x)
    v = np.abs(stft(x, grid).values)
    if weighted:
        v = v * (1 + np.abs(grid.nodes))
    total = _ring_check(v ** p * grid.weights)
    return float(total ** (1 / p))


def synthesize(S, alpha, x):
    """H_S(alpha, x) = sum_lambda alpha_lambda pi(lambda) x."""
    z = as_points(S)
    a = np.asarray(alpha, dtype=complex).ravel()
    if len(a) != len(z):
        raise ValueError(f"{len(a)} weights for {len(z)} support points")
    if isinstance(x, GaborExpansion):
        if len(z) == 0 or len(x) == 0:
            return GaborExpansion()
        ph = np.exp(-2j * np.pi * z.real[:, None] * x.locs.imag[None, :])
        return GaborExpansion((a[:, None] * x.coeffs[None, :] * ph).ravel(),
                              (z[:, None] + x.locs[None, :]).ravel())
    y = zero_like(x)
    for lam, c in zip(z, a):
        y = y + c * tf_shift(x, lam)
    return y


def apply_measure(mu, x):
    """H_mu x for a DiscreteMeasure mu."""
    return synthesize(mu.locations, mu.weights, x)


def analyze(y, S, x, grid=None):
    """The sequence <y, pi(lambda) x> over lambda in S.

    Closed form when y and x are both Gabor expansions and no grid is given;
    otherwise the pairing of the two STFTs over ``grid``.
    """
    z = as_points(S)
    if grid is None and isinstance(y, GaborExpansion) and isinstance(x, GaborExpansion):
        out = np.zeros(len(z), dtype=complex)
        for d, mu in zip(x.coeffs, x.locs):
            # pi(lambda) pi(mu) phi = exp(-2 pi i tau nu_mu) pi(lambda + mu) phi
            out += np.conj(d * np.exp(-2j * np.pi * z.real * mu.imag)) * stft_at(y, z + mu)
        return out
    grid = grid or auto_grid(y)
    vy = stft(y, grid).values
    _ring_check(np.abs(vy) * grid.weights)
    w = grid.weights
    out = np.empty(len(z), dtype=complex)
    nodes = grid.nodes
    for i, lam in enumerate(z):
        # V(pi(lam) x)(w) = exp(2 pi i tau (nu - nu_w)) V x(w - lam)
        vx = stft(x, grid.shifted(-lam)).values * np.exp(2j * np.pi * lam.real * (lam.imag - nodes.imag))
        out[i] = np.sum(vy * np.conj(vx) * w)
    return out


def weight_extract(y, lam, eps_list=(0.4, 0.2, 0.1), step=0.25, cutoff=40.0):
    """Estimate mu({lambda}) from y = H_mu phi by Gaussian averaging over probe pairs.

    For each eps the average over (a, b) of
        eps exp(-pi eps (a^2+b^2)) exp(2 pi i ab) <H(M_{-w-b} T_a phi), T_{x+a} M_{-b} phi>
    is computed by quadrature, with H read off the terms of y.  The target atom
    contributes alpha exp(2 pi i x w) for every eps, other atoms are damped by
    exp(-pi d^2 / eps).  The two smallest eps are combined by Richardson
    extrapolation.
    """
    eps = [float(e) for e in eps_list]
    if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps_list must be positive and strictly decreasing")
    if not isinstance(y, GaborExpansion):
        raise TypeError("weight_extract needs the measurement as a GaborExpansion")
    lam = lam.z if isinstance(lam, Point) else complex(lam)
    x, w = lam.real, lam.imag
    vals = []
    for e in eps:
        half = math.sqrt(cutoff / (math.pi * e))
        s = step * np.arange(-math.ceil(half / step), math.ceil(half / step) + 1)
        a, b = s[:, None], s[None, :]
        total = np.zeros(np.broadcast(a, b).shape, dtype=complex)
        for c, mu in zip(y.coeffs, y.locs):
            # pi(mu) pi(a, -w-b) phi and the conjugated phase of T_{x+a} M_{-b}
            left = c * np.exp(-2j * np.pi * mu.real * (-w - b))
            g = _cross((mu.real + a) + 1j * (mu.imag - w - b), (x + a) + 1j * (-b + 0 * a))
            total += left * g
        total *= np.exp(-2j * np.pi * b * (x + a)) * np.exp(2j * np.pi * a * b)
        integrand = e * np.exp(-np.pi * e * (a ** 2 + b ** 2)) * total
        vals.append(complex(integrand.sum() * step * step) * np.exp(-2j * np.pi * x * w))
    if len(vals) == 1:
        return vals[0]
    e1, e2 = eps[-2], eps[-1]
    return (e1 * vals[-1] - e2 * vals[-2]) / (e1 - e2)


def wiener_amalgam_norm(values, grid):
    """Discrete W(L^inf, L^1) norm: sum over unit cells of the cellwise sup of |f|."""
    nodes = grid.nodes
    cells = np.floor(nodes.real).astype(int) * 100003 + np.floor(nodes.imag).astype(int)
    sup = {}
    for k, v in zip(cells.ravel(), np.abs(values).ravel()):
        if v > sup.get(k, -1.0):
            sup[k] = v
    return float(sum(sup.values()))


def shifted_measure_difference(S, alpha, eps):
    """sum alpha pi(lambda) phi - sum alpha pi(lambda) pi(eps_lambda) phi.

    The moved atoms are exp(-2 pi i Re(lambda) Im(eps)) pi(lambda + eps) phi under pi = M_nu T_tau.
    """
    z = as_points(S)
    a = np.asarray(alpha, dtype=complex)
    e = np.asarray(eps, dtype=complex)
    moved = a * np.exp(-2j * np.pi * z.real * e.imag)
    return GaborExpansion(np.concatenate([a, -moved]), np.concatenate([z, z + e])).simplify()
