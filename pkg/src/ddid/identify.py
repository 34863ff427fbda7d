"""Gram matrices, Riesz bounds and empirical identifiability constants."""
import math
from dataclasses import dataclass

import numpy as np

from .measures import DiscreteMeasure, SupportSet, as_points, lp_norm, mutual_separation
from .timefreq import GaborExpansion, _cross, apply_measure, inner, l2_norm, mp_norm, synthesize, tf_shift


@dataclass(frozen=True)
class GramMatrix:
    support: SupportSet
    entries: np.ndarray
    window: object

    def __post_init__(self):
        if np.abs(self.entries - self.entries.conj().T).max(initial=0) > 1e-12:
            raise ValueError("Gram matrix is not Hermitian")


@dataclass(frozen=True)
class RieszBounds:
    lower: float
    upper: float
    support_size: int


@dataclass(frozen=True)
class IdentifiabilityConstants:
    C1: float
    C2: float
    trials: int
    p: float
    argmin: int
    argmax: int


def gram_matrix(S, x=None):
    """G[i, j] = <pi(lambda_j) x, pi(lambda_i) x>, so that ||sum a_j pi(lambda_j) x||^2 = a^H G a."""
    S = S if isinstance(S, SupportSet) else SupportSet(S)
    x = GaborExpansion.gaussian() if x is None else x
    z = S.z
    if isinstance(x, GaborExpansion):
        G = np.zeros((len(z), len(z)), dtype=complex)
        for c1, m1 in zip(x.coeffs, x.locs):
            for c2, m2 in zip(x.coeffs, x.locs):
                # pi(l) pi(m) = exp(-2 pi i Re(l) Im(m)) pi(l + m)
                pj = c1 * np.exp(-2j * np.pi * z.real * m1.imag)
                pi_ = c2 * np.exp(-2j * np.pi * z.real * m2.imag)
                G += np.conj(pi_)[:, None] * pj[None, :] * _cross((z + m1)[None, :], (z + m2)[:, None])
    else:
        shifted = [tf_shift(x, lam) for lam in z]
        G = np.array([[inner(shifted[j], shifted[i]) for j in range(len(z))] for i in range(len(z))])
    G = (G + G.conj().T) / 2
    return GramMatrix(S, G, x)


def riesz_bounds(S, x=None):
    G = gram_matrix(S, x).entries
    if G.size == 0:
        return RieszBounds(0.0, 0.0, 0)
    ev = np.linalg.eigvalsh(G)
    return RieszBounds(float(max(ev[0], 0.0)), float(ev[-1]), len(G))


def riesz_ratio_interval(S, x, p, n_samples=1000, seed=0, grid=None):
    """Range of ||H_S(a, x)||_{M^p} / ||a||_p over random a on the l^p sphere (a diagnostic, not a bound)."""
    z = as_points(S)
    rng = np.random.default_rng(seed)
    r = []
    for _ in range(n_samples):
        a = rng.normal(size=len(z)) + 1j * rng.normal(size=len(z))
        a /= lp_norm(a, p)
        r.append(mp_norm(synthesize(z, a, x), p, grid))
    return float(min(r)), float(max(r))


def response_difference_norm(mu1, mu2, x, p=2.0, grid=None):
    d = apply_measure(mu1 - mu2, x)
    if p == 2 and isinstance(d, GaborExpansion):
        return l2_norm(d)
    return mp_norm(d, p, grid)


def identifiability_constants(pairs, x=None, p=2.0, grid=None):
    """Empirical C1, C2 over a family of measure pairs.

    C1 is the least value of ||H mu1 x - H mu2 x|| / ((ms ^ 1) ||mu1 - mu2||_p),
    C2 the largest value of ||H mu1 x - H mu2 x|| / ||mu1 - mu2||_p.  The M^p
    norm is exact for p = 2 with Gabor probes and grid-based otherwise.
    """
    x = GaborExpansion.gaussian() if x is None else x
    lo, hi = [], []
    for mu1, mu2 in pairs:
        diff = mu1 - mu2
        if len(diff) == 0:
            raise ValueError("pair with identical measures")
        num = response_difference_norm(mu1, mu2, x, p, grid)
        den = lp_norm(diff, p)
        ms = mutual_separation(mu1.locations, mu2.locations)
        lo.append(num / (min(ms, 1.0) * den))
        hi.append(num / den)
    if not lo:
        raise ValueError("no pairs given")
    i, j = int(np.argmin(lo)), int(np.argmax(hi))
    return IdentifiabilityConstants(float(lo[i]), float(hi[j]), len(lo), float(p), i, j)


def lattice_truncation(gamma, k):
    """k x k block of gamma (Z + iZ), centred at the origin."""
    m = np.arange(k) - (k - 1) / 2
    return SupportSet((gamma * (m[:, None] + 1j * m[None, :])).ravel())


def riesz_ladder(gamma, sizes=(3, 5, 7, 9, 11), x=None):
    """Riesz bounds along growing square truncations of the lattice."""
    return [riesz_bounds(lattice_truncation(gamma, k), x) for k in sizes]


def random_separated_measure(rng, n_atoms, sep, box, wmin=0.5, wmax=2.0, max_tries=10000):
    """Rejection-sampled measure with minimum separation ``sep`` and weight moduli in [wmin, wmax]."""
    pts = []
    for _ in range(max_tries):
        if len(pts) == n_atoms:
            break
        c = complex(rng.uniform(-box, box), rng.uniform(-box, box))
        if all(abs(c - q) >= sep for q in pts):
            pts.append(c)
    if len(pts) < n_atoms:
        raise RuntimeError("could not place separated atoms; enlarge the box")
    mod = rng.uniform(wmin, wmax, n_atoms)
    ph = rng.uniform(0, 2 * math.pi, n_atoms)
    return DiscreteMeasure(pts, mod * np.exp(1j * ph))
