"""Beurling-type densities, square lattices and the geometric constructions around them."""
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .measures import Point, SupportSet, as_points

CRITICAL_SEPARATION = 2.0 * 3.0 ** -0.25


class PreconditionError(ValueError):
    """Raised when an input violates a construction's hypothesis; ``window`` locates the offending square."""

    def __init__(self, message, window=None):
        super().__init__(message)
        self.window = window


@dataclass(frozen=True)
class SquareLattice:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("lattice mesh gamma must be positive")

    def point(self, m, n):
        return self.gamma * (np.asarray(m) + 1j * np.asarray(n))


@dataclass(frozen=True)
class DensityCurve:
    R: np.ndarray
    count: np.ndarray
    ratio: np.ndarray

    def __len__(self):
        return len(self.R)

    @property
    def tail_window(self):
        """Indices of the top half of the R values."""
        n = len(self.R)
        return slice(n - (n + 1) // 2, n)

    @property
    def tail_max(self):
        return float(self.ratio[self.tail_window].max())


@dataclass(frozen=True)
class NestedSquare:
    corner: Point
    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError("square side must be positive")

    def contains(self, z):
        x0, y0 = self.corner.tau, self.corner.nu
        return (z.real >= x0) & (z.real <= x0 + self.side) & (z.imag >= y0) & (z.imag <= y0 + self.side)

    def corners(self):
        x0, y0, a = self.corner.tau, self.corner.nu, self.side
        return {(x0, y0), (x0 + a, y0), (x0, y0 + a), (x0 + a, y0 + a)}


def _sliding_max(z, R, closed):
    if len(z) == 0:
        return 0, None
    order = np.argsort(z.real, kind="stable")
    x, y = z.real[order], z.imag[order]
    side = "right" if closed else "left"
    hi = np.searchsorted(x, x + R, side=side)
    best, where = 0, None
    for i in range(len(x)):
        lo = np.searchsorted(x, x[i], side="left")
        if hi[i] - lo <= best:
            continue
        ys = np.sort(y[lo:hi[i]])
        counts = np.searchsorted(ys, ys + R, side=side) - np.arange(len(ys))
        k = int(np.argmax(counts))
        if counts[k] > best:
            best, where = int(counts[k]), (float(x[i]), float(ys[k]))
    return best, where


def sliding_count(S, R, boundary="closed"):
    """Largest number of points in a translate of the square [0, R]^2 (or (0, R)^2 if open).

    An optimal square can be slid up and right until its left and bottom edges
    meet points, so only point coordinates need to be tried as anchors.  For
    open squares the anchor square is half-open [x, x+R) x [y, y+R).
    """
    if not R > 0:
        raise ValueError("R must be positive")
    if boundary not in ("closed", "open"):
        raise ValueError("boundary must be 'closed' or 'open'")
    return _sliding_max(as_points(S), R, boundary == "closed")[0]


def density_estimate(sets, R_list):
    """Per-R supremum over ``sets`` of sliding_count/R^2, as a DensityCurve."""
    R = np.asarray(sorted(float(r) for r in R_list))
    if R.size == 0:
        raise ValueError("R_list must be nonempty")
    if np.any(R <= 0) or np.any(np.diff(R) <= 0):
        raise ValueError("R values must be positive and distinct")
    if isinstance(sets, SupportSet):
        sets = [sets]
    zs = [as_points(s) for s in sets]
    count = np.array([max((sliding_count(z, r) for z in zs), default=0) for r in R], dtype=int)
    return DensityCurve(R, count, count / R ** 2)


def lattice_points(lat, box):
    """Points of the lattice inside the closed box (tau_min, tau_max, nu_min, nu_max)."""
    a, b, c, d = map(float, box)
    if a > b or c > d:
        raise ValueError("empty box")
    g = lat.gamma
    m = np.arange(math.floor(a / g) - 1, math.ceil(b / g) + 2)
    n = np.arange(math.floor(c / g) - 1, math.ceil(d / g) + 2)
    xm, yn = g * m, g * n
    xm, yn = xm[(xm >= a) & (xm <= b)], yn[(yn >= c) & (yn <= d)]
    return SupportSet((xm[:, None] + 1j * yn[None, :]).ravel())


def hexagonal_lattice(r, box):
    """Hexagonal lattice with nearest-neighbour distance r, clipped to the closed box."""
    a, b, c, d = map(float, box)
    h = r * math.sqrt(3) / 2
    rows = np.arange(math.floor(c / h) - 1, math.ceil(d / h) + 2)
    cols = np.arange(math.floor(a / r) - 2, math.ceil(b / r) + 3)
    pts = ((cols[None, :] + 0.5 * (rows[:, None] % 2)) * r + 1j * rows[:, None] * h).ravel()
    keep = (pts.real >= a) & (pts.real <= b) & (pts.imag >= c) & (pts.imag <= d)
    return SupportSet(pts[keep])


@dataclass(frozen=True)
class Enumeration:
    """Injective assignment of points to lattice indices with a uniform offset bound."""

    points: np.ndarray
    indices: np.ndarray
    Rprime: float
    q: int
    gamma: float

    @property
    def offsets(self):
        return np.abs(self.points - self.gamma * (self.indices[:, 0] + 1j * self.indices[:, 1]))

    def as_dict(self):
        return {complex(p): (int(m), int(n)) for p, (m, n) in zip(self.points, self.indices)}


def tessellation_factor(gamma, theta, R, q_max=10 ** 6):
    """Smallest integer q >= 1 with (qR/gamma)^2 - 4(qR/gamma + 1) >= ((q+1) R sqrt(theta))^2."""
    for q in range(1, q_max + 1):
        u = q * R / gamma
        if u * u - 4 * (u + 1) >= ((q + 1) * R * math.sqrt(theta)) ** 2:
            return q
    raise PreconditionError(f"no tessellation factor q <= {q_max} for gamma={gamma}, theta={theta}, R={R}")


def uniformly_close_enumeration(S, gamma, theta, R):
    """Pair every point of S with its own lattice point of Omega_gamma, within distance sqrt(2) q R.

    The plane is cut into half-open super-squares of side qR; the Rayleigh
    bound caps how many points fall in one, and each super-square holds at
    least that many lattice points.  Inside a super-square the pairing is a
    minimum-total-distance assignment.
    """
    if not theta < gamma ** -2:
        raise PreconditionError(f"theta={theta} must be below gamma^-2={gamma ** -2}")
    z = as_points(S)
    count, where = _sliding_max(z, R, closed=False)
    if count > theta * R * R:
        raise PreconditionError(
            f"Rayleigh bound fails: {count} points in an open {R}x{R} square, limit {theta * R * R}",
            window=where)
    q = tessellation_factor(gamma, theta, R)
    L = q * R
    idx = np.zeros((len(z), 2), dtype=int)
    cell = np.stack([np.floor(z.real / L), np.floor(z.imag / L)], axis=1).astype(int)
    for key in np.unique(cell, axis=0) if len(z) else []:
        members = np.flatnonzero((cell == key).all(axis=1))
        m = np.arange(math.floor(key[0] * L / gamma) - 1, math.ceil((key[0] + 1) * L / gamma) + 1)
        n = np.arange(math.floor(key[1] * L / gamma) - 1, math.ceil((key[1] + 1) * L / gamma) + 1)
        m = m[np.floor(gamma * m / L) == key[0]]
        n = n[np.floor(gamma * n / L) == key[1]]
        mm, nn = np.meshgrid(m, n, indexing="ij")
        mm, nn = mm.ravel(), nn.ravel()
        if len(mm) < len(members):
            raise PreconditionError("super-square holds fewer lattice points than data points",
                                    window=(key[0] * L, key[1] * L))
        cost = np.abs(z[members, None] - gamma * (mm[None, :] + 1j * nn[None, :]))
        rows, cols = linear_sum_assignment(cost)
        idx[members[rows], 0] = mm[cols]
        idx[members[rows], 1] = nn[cols]
    out = Enumeration(z.copy(), idx, math.sqrt(2) * L, q, float(gamma))
    if len({tuple(r) for r in idx}) != len(idx) or np.any(out.offsets > out.Rprime * (1 + 1e-12)):
        raise AssertionError("enumeration failed post-verification")
    return out


def nested_squares(K, Y, n):
    """Chain K_0 in K_1 in ... in K_n = K of squares sharing a corner with heavy point counts.

    K must have side sqrt(2)(2^n + 1) and contain at least 4^n + 1 points of Y.
    Each step quarters K_j, keeps the fullest quarter and grows it to side
    sqrt(2)(2^(j-1) + 1) from the shared outer corner.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be >= 0")
    if not math.isclose(K.side, math.sqrt(2) * (2 ** n + 1), rel_tol=1e-12):
        raise ValueError(f"K must have side sqrt(2)(2^{n}+1)")
    y = as_points(Y)
    if int(K.contains(y).sum()) < 4 ** n + 1:
        raise PreconditionError(f"K contains fewer than 4^{n}+1 points of Y")
    chain = [K]
    cur = K
    for j in range(n, 0, -1):
        x0, y0, a = cur.corner.tau, cur.corner.nu, cur.side
        h = a / 2
        inside = y[cur.contains(y)]
        right = inside.real >= x0 + h
        top = inside.imag >= y0 + h
        counts = {(qx, qy): int(np.sum((right == qx) & (top == qy))) for qx in (0, 1) for qy in (0, 1)}
        qx, qy = max(counts, key=lambda k: (counts[k], -k[0], -k[1]))
        side = math.sqrt(2) * (2 ** (j - 1) + 1)
        corner = Point(x0 + a - side if qx else x0, y0 + a - side if qy else y0)
        cur = NestedSquare(corner, side)
        chain.append(cur)
    return chain[::-1]


def folkman_graham_bound(area, perimeter, s):
    """Packing bound on the number of s-separated points in a convex region."""
    if not (area > 0 and perimeter > 0 and s > 0):
        raise ValueError("area, perimeter and s must be positive")
    return 2 / math.sqrt(3) * area / s ** 2 + perimeter / (2 * s) + 1


class Verdict(enum.Enum):
    IDENTIFIABLE = "IdentifiableByGaussian"
    NOT_IDENTIFIABLE = "NotIdentifiableByAny"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class ClassDescriptor:
    kind: str
    s: float = None
    N: int = None
    theta: float = None
    R: float = None
    A: tuple = None
    b: tuple = (0.0, 0.0)

    def __post_init__(self):
        k = self.kind
        if k not in ("separated", "finite", "rayleigh", "lattice"):
            raise ValueError(f"unknown class kind {k!r}")
        if k != "lattice" and not (self.s is not None and self.s > 0):
            raise ValueError("s must be positive")
        if k == "finite" and not (self.N is not None and self.N >= 1):
            raise ValueError("N must be >= 1")
        if k == "rayleigh":
            if not (self.theta is not None and self.theta > 0):
                raise ValueError("theta must be positive")
            if not (self.R is not None and self.R > 0):
                raise ValueError("R must be positive")
            if not self.s < self.theta ** -0.5:
                raise ValueError("rayleigh class needs s < theta^(-1/2)")
        if k == "lattice":
            A = np.asarray(self.A, dtype=float)
            if A.shape != (2, 2) or not np.all(np.isfinite(A)):
                raise ValueError("A must be a finite 2x2 matrix")
            if np.asarray(self.b, dtype=float).shape != (2,):
                raise ValueError("b must be a 2-vector")


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    note: str = field(default="")


def classify_class(desc, p=2.0):
    if not 1 < p < math.inf:
        raise ValueError("p must lie in (1, inf)")
    k = desc.kind
    if k == "finite":
        return Classification(Verdict.IDENTIFIABLE)
    if k == "separated":
        if desc.s > CRITICAL_SEPARATION:
            return Classification(Verdict.IDENTIFIABLE)
        return Classification(Verdict.NOT_IDENTIFIABLE)
    if k == "rayleigh":
        if desc.theta < 0.5:
            return Classification(Verdict.IDENTIFIABLE)
        if desc.theta > 0.5:
            return Classification(Verdict.NOT_IDENTIFIABLE, "for sufficiently large R")
        return Classification(Verdict.INDETERMINATE, "theta = 1/2 is the critical value")
    det = abs(float(np.linalg.det(np.asarray(desc.A, dtype=float))))
    if det > 1:
        return Classification(Verdict.IDENTIFIABLE)
    return Classification(Verdict.NOT_IDENTIFIABLE)
