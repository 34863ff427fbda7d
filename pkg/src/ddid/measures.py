"""Finite point sets and discrete complex measures in the delay-Doppler plane.

A point (tau, nu) is stored as the complex number tau + 1j*nu throughout.
"""
import math
from dataclasses import dataclass

import numpy as np

INF = math.inf


@dataclass(frozen=True)
class Point:
    tau: float
    nu: float

    def __post_init__(self):
        if not (math.isfinite(self.tau) and math.isfinite(self.nu)):
            raise ValueError(f"non-finite point coordinates ({self.tau}, {self.nu})")

    @property
    def z(self):
        return complex(self.tau, self.nu)

    @classmethod
    def from_complex(cls, z):
        return cls(float(np.real(z)), float(np.imag(z)))


@dataclass(frozen=True)
class Atom:
    location: Point
    weight: complex


def as_points(points):
    """Coerce Points, complex numbers, (tau, nu) pairs or a complex array to a 1-D complex array."""
    if isinstance(points, SupportSet):
        return points.z
    if isinstance(points, np.ndarray) and np.iscomplexobj(points):
        return np.asarray(points, dtype=complex).ravel()
    out = []
    for p in points:
        if isinstance(p, Point):
            out.append(p.z)
        elif isinstance(p, (tuple, list)) and len(p) == 2:
            out.append(complex(float(p[0]), float(p[1])))
        else:
            out.append(complex(p))
    return np.asarray(out, dtype=complex)


def _check_finite(z, what):
    if not np.all(np.isfinite(z)):
        raise ValueError(f"{what} contains NaN or infinite values")


def _check_distinct(z, what):
    if len(np.unique(z)) != len(z):
        raise ValueError(f"{what} has repeated locations")


class SupportSet:
    """Finite set of pairwise distinct points of the plane."""

    __slots__ = ("_z",)

    def __init__(self, points=()):
        z = as_points(points).copy()
        _check_finite(z, "support set")
        _check_distinct(z, "support set")
        z.setflags(write=False)
        self._z = z

    @property
    def z(self):
        return self._z

    @property
    def tau(self):
        return self._z.real

    @property
    def nu(self):
        return self._z.imag

    @property
    def points(self):
        return tuple(Point.from_complex(v) for v in self._z)

    def __len__(self):
        return len(self._z)

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other):
        if not isinstance(other, SupportSet):
            return NotImplemented
        return len(self) == len(other) and np.array_equal(np.sort(self._z), np.sort(other._z))

    def __hash__(self):
        return hash(tuple(np.sort(self._z)))

    def __repr__(self):
        return f"SupportSet({len(self)} points)"

    def union(self, other):
        return SupportSet(np.unique(np.concatenate([self._z, as_points(other)])))


class DiscreteMeasure:
    """Finite sum of weighted point masses; zero-weight atoms are dropped."""

    __slots__ = ("_z", "_w")

    def __init__(self, locations=(), weights=()):
        z = as_points(locations).copy()
        w = np.asarray(weights, dtype=complex).ravel().copy()
        if len(z) != len(w):
            raise ValueError(f"{len(z)} locations but {len(w)} weights")
        _check_finite(z, "measure locations")
        _check_finite(w, "measure weights")
        _check_distinct(z, "measure")
        keep = w != 0
        z, w = z[keep], w[keep]
        z.setflags(write=False)
        w.setflags(write=False)
        self._z, self._w = z, w

    @classmethod
    def from_atoms(cls, atoms):
        atoms = list(atoms)
        return cls([a.location for a in atoms], [a.weight for a in atoms])

    @property
    def locations(self):
        return self._z

    @property
    def weights(self):
        return self._w

    @property
    def support(self):
        return SupportSet(self._z)

    @property
    def atoms(self):
        return tuple(Atom(Point.from_complex(z), complex(w)) for z, w in zip(self._z, self._w))

    def __len__(self):
        return len(self._z)

    def __repr__(self):
        return f"DiscreteMeasure({len(self)} atoms)"

    def __mul__(self, c):
        return DiscreteMeasure(self._z, complex(c) * self._w)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __add__(self, other):
        z = np.concatenate([self._z, other._z])
        w = np.concatenate([self._w, other._w])
        uz, inv = np.unique(z, return_inverse=True)
        uw = np.zeros(len(uz), dtype=complex)
        np.add.at(uw, inv, w)
        return DiscreteMeasure(uz, uw)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        a, b = np.argsort(self._z), np.argsort(other._z)
        return (len(self) == len(other) and np.array_equal(self._z[a], other._z[b])
                and np.array_equal(self._w[a], other._w[b]))

    __hash__ = None


def _pairwise(z):
    return np.abs(z[:, None] - z[None, :])


def separation(S):
    """Smallest pairwise distance, or INF for fewer than two points."""
    z = as_points(S)
    if len(z) < 2:
        return INF
    d = _pairwise(z)
    return float(d[np.triu_indices(len(z), 1)].min())


def relative_separation(S, tol=1e-12):
    """Maximum number of points in a closed unit disk.

    Some optimal disk either is centered at a point or has two points on its
    boundary, so it suffices to test those candidate centers.
    """
    z = as_points(S)
    n = len(z)
    if n == 0:
        return 0
    centers = [z]
    i, j = np.triu_indices(n, 1)
    d = np.abs(z[j] - z[i])
    ok = d <= 2.0
    if ok.any():
        a, b, d = z[i[ok]], z[j[ok]], d[ok]
        mid = (a + b) / 2
        h = np.sqrt(np.maximum(1.0 - (d / 2) ** 2, 0.0))
        normal = 1j * (b - a) / d
        centers += [mid + h * normal, mid - h * normal]
    c = np.concatenate(centers)
    best = 0
    for k in range(0, len(c), 2048):
        inside = np.abs(c[k:k + 2048, None] - z[None, :]) <= 1.0 + tol
        best = max(best, int(inside.sum(axis=1).max()))
    return best


def mutual_separation(S1, S2):
    """Smallest distance between distinct points drawn from the two sets; shared points are skipped."""
    a, b = as_points(S1), as_points(S2)
    if len(a) == 0 or len(b) == 0:
        return INF
    d = np.abs(a[:, None] - b[None, :])
    d = d[d > 0]
    return float(d.min()) if d.size else INF


def lp_norm(mu, p):
    """l^p norm of the weights of ``mu`` (a DiscreteMeasure or a weight array), p >= 1."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    w = np.abs(mu.weights if isinstance(mu, DiscreteMeasure) else np.asarray(mu, dtype=complex))
    if w.size == 0:
        return 0.0
    if math.isinf(p):
        return float(w.max())
    m = w.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((w / m) ** p) ** (1.0 / p))


def translate(S, z):
    shift = z.z if isinstance(z, Point) else complex(*z) if isinstance(z, tuple) else complex(z)
    return SupportSet(as_points(S) + shift)
