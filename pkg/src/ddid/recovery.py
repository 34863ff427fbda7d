"""Forward channel simulation, off-grid support recovery and matched/spurious reports."""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter

from .identify import gram_matrix
from .measures import Atom, DiscreteMeasure, Point, SupportSet, as_points, lp_norm
from .timefreq import (GaborExpansion, SampledSignal, analyze, apply_measure, auto_grid, inner, l2_norm, stft,
                       synthesize, tf_shift)


class IllConditioned(RuntimeError):
    pass


@dataclass(frozen=True)
class ChannelMeasurement:
    signal: object
    noise_level: float
    seed: int


def _signal(y):
    return y.signal if isinstance(y, ChannelMeasurement) else y


def gabor_noise(center_box, level, rng, n_side=8, jitter=0.25):
    """Gaussian atoms with i.i.d. complex normal weights on a jittered grid, scaled to M^2 norm ``level``."""
    t0, t1, f0, f1 = center_box
    tt = np.linspace(t0, t1, n_side)
    ff = np.linspace(f0, f1, n_side)
    step = max((t1 - t0), (f1 - f0)) / max(n_side - 1, 1)
    z = (tt[:, None] + 1j * ff[None, :]).ravel()
    z = z + jitter * step * (rng.uniform(-1, 1, z.size) + 1j * rng.uniform(-1, 1, z.size))
    c = rng.normal(size=z.size) + 1j * rng.normal(size=z.size)
    noise = GaborExpansion(c, z)
    return noise * (level / l2_norm(noise))


def simulate_measurement(mu, x, noise_level, seed, margin=2.0):
    if noise_level < 0:
        raise ValueError("noise level must be >= 0")
    y = apply_measure(mu, x)
    rng = np.random.default_rng(seed)
    if noise_level > 0:
        if isinstance(y, GaborExpansion):
            z = mu.locations if len(mu) else np.zeros(1, dtype=complex)
            box = (z.real.min() - margin, z.real.max() + margin, z.imag.min() - margin, z.imag.max() + margin)
            y = y + gabor_noise(box, noise_level, rng)
        else:
            w = rng.normal(size=len(y)) + 1j * rng.normal(size=len(y))
            e = SampledSignal(y.t0, y.dt, w)
            y = y + e * (noise_level / l2_norm(e))
    return ChannelMeasurement(y, float(noise_level), int(seed))


def correlation(y, lams, x):
    """<y, pi(lambda) x> for each lambda."""
    lams = np.asarray(lams, dtype=complex)
    if isinstance(y, GaborExpansion) and isinstance(x, GaborExpansion):
        return analyze(y, lams.ravel(), x).reshape(lams.shape)
    if isinstance(y, GaborExpansion):
        y = y.sample(x.t0, x.dt, len(x))
    if isinstance(x, GaborExpansion):
        x = x.sample(y.t0, y.dt, len(y))
    out = np.array([inner(y, tf_shift(x, lam)) for lam in lams.ravel()])
    return out.reshape(lams.shape)


def correlation_field(y, x, grid):
    y = _signal(y)
    if isinstance(x, GaborExpansion) and len(x) == 1 and x.coeffs[0] == 1 and x.locs[0] == 0:
        if isinstance(y, SampledSignal) or len(y) > 0:
            return stft(y, grid).values
        return np.zeros(grid.shape, dtype=complex)
    return correlation(y, grid.nodes, x)


def detect_support(y, x, grid, threshold=0.1, separation=2.0):
    """Local maxima of |<y, pi(lambda) x>| above threshold * max, thinned to be separation/2 apart."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    v = np.abs(correlation_field(y, x, grid))
    top = v.max(initial=0.0)
    if top == 0:
        return SupportSet()
    peak = (v == maximum_filter(v, size=3, mode="constant", cval=0.0)) & (v > threshold * top)
    i, j = np.nonzero(peak)
    order = np.argsort(-v[i, j], kind="stable")
    nodes = grid.nodes[i[order], j[order]]
    kept = []
    for z in nodes:
        if all(abs(z - k) > separation / 2 for k in kept):
            kept.append(z)
    return SupportSet(kept)


def _x_norm2(x):
    return inner(x, x).real


def _quadfit_peak(f, z0, h0, tol, max_steps=60):
    """Maximize f near z0 by repeated quadratic fits to log f on a 3x3 stencil."""
    off = np.array([a + 1j * b for a in (-1, 0, 1) for b in (-1, 0, 1)])
    A = np.stack([np.ones(9), off.real, off.imag, off.real ** 2 / 2, off.real * off.imag, off.imag ** 2 / 2], 1)
    z, fz, h = z0, f(np.array([z0]))[0], h0
    for _ in range(max_steps):
        vals = f(z + h * off)
        if np.any(vals <= 0):
            k = int(np.argmax(vals))
            step = off[k]
        else:
            c = np.linalg.lstsq(A, np.log(vals), rcond=None)[0]
            g = c[1:3]
            H = np.array([[c[3], c[4]], [c[4], c[5]]])
            if np.all(np.linalg.eigvalsh(H) < 0):
                s = -np.linalg.solve(H, g)
                step = complex(s[0], s[1])
                if abs(step) > 2:
                    step *= 2 / abs(step)
            else:
                step = off[int(np.argmax(vals))]
        znew = z + h * step
        fnew = f(np.array([znew]))[0]
        if fnew >= fz:
            moved = abs(znew - z)
            z, fz = znew, fnew
            if moved < tol:
                break
            h = min(h0, max(moved, 1e-5))
        else:
            h /= 4
            if h < tol:
                break
    return z


@dataclass
class RefineInfo:
    iterations: int
    residuals: list
    converged: bool
    condition: float


def _solve_weights(lams, y, x):
    G = gram_matrix(SupportSet(lams), x).entries
    cond = np.linalg.cond(G)
    if not cond <= 1e12:
        raise IllConditioned(f"weight solve condition number {cond:.3e} exceeds 1e12")
    b = correlation(y, lams, x)
    return np.linalg.solve(G, b), cond


def _residual(y, lams, alpha, x):
    return y - synthesize(lams, alpha, x)


def refine_and_solve(candidates, y, x, max_iter=50, tol=1e-10, pos_tol=1e-8, h0=0.05, return_info=False):
    """Off-grid refinement of candidate positions with a global least-squares weight solve.

    Each outer iteration moves every atom to the peak of its correlation with
    the residual that excludes it (updating its weight alone), then re-solves
    all weights jointly.  Iteration stops once the residual norm decreases by
    less than ``tol``.
    """
    y = _signal(y)
    lams = as_points(candidates).copy()
    if len(lams) == 0:
        raise ValueError("no candidates")
    xn2 = _x_norm2(x)
    alpha, cond = _solve_weights(lams, y, x)
    res = [l2_norm(_residual(y, lams, alpha, x))]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new_l, new_a = lams.copy(), alpha.copy()
        for k in range(len(new_l)):
            others = np.arange(len(new_l)) != k
            r = _residual(y, new_l[others], new_a[others], x)
            f = lambda zz: np.abs(correlation(r, zz, x)) ** 2
            zk = _quadfit_peak(f, new_l[k], h0, pos_tol)
            if np.any(np.abs(np.delete(new_l, k) - zk) == 0):
                continue
            new_l[k] = zk
            new_a[k] = correlation(r, np.array([zk]), x)[0] / xn2
        try:
            a2, c2 = _solve_weights(new_l, y, x)
        except IllConditioned:
            a2, c2 = new_a, np.inf
        r2 = l2_norm(_residual(y, new_l, a2, x))
        if r2 > res[-1]:
            # keep the better previous iterate; coordinate moves never help further
            converged = True
            break
        lams, alpha, cond = new_l, a2, c2
        if not math.isfinite(cond):
            raise IllConditioned("weight solve became singular during refinement")
        decrease = res[-1] - r2
        res.append(r2)
        if decrease < tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"refinement stopped after {max_iter} iterations without converging", RuntimeWarning)
    mu = DiscreteMeasure(lams, alpha)
    if return_info:
        return mu, RefineInfo(it, res, converged, float(cond))
    return mu


def recover(y, x=None, grid=None, threshold=0.1, separation=2.0, prune=0.05, step=0.1, margin=3.0):
    """Detection, refinement, pruning of weak or merged atoms, and a final refinement."""
    x = GaborExpansion.gaussian() if x is None else x
    sig = _signal(y)
    if grid is None:
        grid = auto_grid(sig, step=step, margin=margin)
    cand = detect_support(sig, x, grid, threshold, separation)
    if len(cand) == 0:
        return DiscreteMeasure()
    mu = refine_and_solve(cand, sig, x)
    w = np.abs(mu.weights)
    order = np.argsort(-w, kind="stable")
    keep = []
    for i in order:
        if w[i] >= prune * w.max() and all(abs(mu.locations[i] - mu.locations[j]) > separation / 2 for j in keep):
            keep.append(i)
    if len(keep) < len(mu):
        mu = refine_and_solve(mu.locations[keep], sig, x)
    return mu


@dataclass(frozen=True)
class MatchedAtom:
    target: Atom
    recovered: Atom
    position_error: float
    weight_error: float
    position_ok: bool
    weight_ok: bool


@dataclass(frozen=True)
class RecoveryReport:
    matched: tuple
    missed: tuple
    spurious: DiscreteMeasure
    epsilon: float
    spurious_norm: float
    bound: float
    p: float = 2.0

    @property
    def bound_ok(self):
        return self.spurious_norm <= self.bound

    @property
    def all_ok(self):
        return (not self.missed and self.bound_ok
                and all(m.position_ok and m.weight_ok for m in self.matched))

    def to_dict(self):
        def atom(a):
            return {"tau": a.location.tau, "nu": a.location.nu, "re": a.weight.real, "im": a.weight.imag}
        return {
            "epsilon": self.epsilon,
            "p": self.p,
            "matched": [{"target": atom(m.target), "recovered": atom(m.recovered),
                         "position_error": m.position_error, "weight_error": m.weight_error,
                         "position_ok": m.position_ok, "weight_ok": m.weight_ok} for m in self.matched],
            "missed": [atom(a) for a in self.missed],
            "spurious": {"atoms": [atom(a) for a in self.spurious.atoms]},
            "spurious_norm": self.spurious_norm,
            "bound": self.bound,
            "bound_ok": self.bound_ok,
            "all_ok": self.all_ok,
        }


def epsilon_section(mu, epsilon, p):
    """Indices of the fewest atoms (largest weights first) whose complement has l^p norm below epsilon."""
    w = np.abs(mu.weights)
    order = np.argsort(-w, kind="stable")
    for k in range(len(w) + 1):
        if lp_norm(w[order[k:]], p) < epsilon:
            return order[:k]
    return order


def greedy_match(tz, rz, radius, rows=None):
    """Nearest-first one-to-one matching of target points (restricted to ``rows``) within ``radius``."""
    rows = range(len(tz)) if rows is None else rows
    pairs = []
    for i in rows:
        d = np.abs(rz - tz[i])
        for j in np.flatnonzero(d <= radius):
            pairs.append((float(d[j]), int(i), int(j)))
    pairs.sort()
    used_t, used_r, out = set(), set(), []
    for d, i, j in pairs:
        if i in used_t or j in used_r:
            continue
        used_t.add(i)
        used_r.add(j)
        out.append((d, i, j))
    return out


def match_report(target, recovered, epsilon, p=2.0, C1=1.0, C2=1.0, s=1.0):
    if not epsilon > 0 or not (C1 > 0 and C2 > 0 and s > 0):
        raise ValueError("epsilon, C1, C2 and s must be positive")
    sec = epsilon_section(target, epsilon, p)
    tz, tw = target.locations, target.weights
    rz, rw = recovered.locations, recovered.weights
    used_t, used_r, matched = set(), set(), []
    for d, i, j in greedy_match(tz, rz, epsilon, sec):
        used_t.add(i)
        used_r.add(j)
        we = abs(rw[j] - tw[i])
        matched.append(MatchedAtom(Atom(Point.from_complex(tz[i]), complex(tw[i])),
                                   Atom(Point.from_complex(rz[j]), complex(rw[j])),
                                   float(d), float(we), bool(d <= epsilon), bool(we <= epsilon)))
    missed = tuple(Atom(Point.from_complex(tz[i]), complex(tw[i])) for i in sec if int(i) not in used_t)
    rest = [j for j in range(len(rz)) if j not in used_r]
    spurious = DiscreteMeasure(rz[rest], rw[rest])
    bound = 4 * C2 / (C1 * min(s, 1.0)) * epsilon
    return RecoveryReport(tuple(matched), missed, spurious, float(epsilon), lp_norm(spurious, p), float(bound), p)


def atom_errors(target, recovered, radius):
    """Greedy nearest matching within ``radius``; returns (max position error, max weight error, unmatched mass)."""
    pairs = greedy_match(target.locations, recovered.locations, radius)
    rest = sorted(set(range(len(recovered))) - {j for _, _, j in pairs})
    spur = lp_norm(recovered.weights[rest], 2)
    if len(pairs) < len(target):
        return math.inf, math.inf, spur
    pe = max((d for d, _, _ in pairs), default=0.0)
    we = max((abs(recovered.weights[j] - target.weights[i]) for _, i, j in pairs), default=0.0)
    return pe, we, spur


def noise_sweep(mu, noise_levels, seeds, x=None, separation=2.0, threshold=0.1):
    """Rows (noise, max position error, max weight error, spurious norm), worst case over seeds."""
    x = GaborExpansion.gaussian() if x is None else x
    rows = []
    for level in noise_levels:
        worst = [0.0, 0.0, 0.0]
        for seed in seeds:
            y = simulate_measurement(mu, x, level, seed)
            rec = recover(y, x, threshold=threshold, separation=separation)
            errs = atom_errors(mu, rec, separation / 2)
            worst = [max(a, b) for a, b in zip(worst, errs)]
        rows.append((float(level), *worst))
    return rows


def loglog_slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
