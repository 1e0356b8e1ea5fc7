"""Convex compact domains with linear minimization oracles.

Every domain supports a membership test and an exact linear minimization
oracle (LMO).  Polytope-like domains attain the minimum at an extreme
point; ties are broken by lowest index so that repeated runs are
deterministic.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Domain",
    "Simplex",
    "Ball",
    "Box",
    "Product",
    "FiniteAtoms",
    "lmo_argmin",
]


class Domain:
    """Base class; concrete domains define dim, contains and lmo."""

    dim: int

    def contains(self, x, tol=1e-10):
        raise NotImplementedError

    def lmo(self, c):
        """Return (point, value) minimizing <c, .> over the domain."""
        raise NotImplementedError

    def enclosing_radius(self):
        """Radius of the smallest origin-centered ball containing the set."""
        raise NotImplementedError

    def _check_query(self, c):
        c = np.asarray(c, dtype=float)
        if c.shape != (self.dim,):
            raise ValueError(
                f"query dimension {c.shape} does not match domain dim {self.dim}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite entries in LMO query")
        return c


class Simplex(Domain):
    """Standard probability simplex in R^n."""

    def __init__(self, n):
        if n < 1:
            raise ValueError("simplex dimension must be >= 1")
        self.n = int(n)
        self.dim = self.n

    def contains(self, x, tol=1e-10):
        x = np.asarray(x, dtype=float)
        return x.shape == (self.n,) and np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol

    def lmo(self, c):
        c = self._check_query(c)
        j = int(np.argmin(c))  # argmin returns the first (lowest-index) minimizer
        point = np.zeros(self.n)
        point[j] = 1.0
        return point, float(c[j])

    def enclosing_radius(self):
        return 1.0

    def __repr__(self):
        return f"Simplex({self.n})"


class Ball(Domain):
    """Euclidean ball {x: ||x - center|| <= radius}."""

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")
        self.dim = self.center.shape[0]

    def contains(self, x, tol=1e-10):
        x = np.asarray(x, dtype=float)
        return x.shape == (self.dim,) and np.linalg.norm(x - self.center) <= self.radius + tol

    def lmo(self, c):
        c = self._check_query(c)
        nc = np.linalg.norm(c)
        if nc == 0.0:
            return self.center.copy(), float(c @ self.center)
        point = self.center - self.radius * c / nc
        return point, float(c @ self.center) - self.radius * nc

    def enclosing_radius(self):
        return float(np.linalg.norm(self.center)) + self.radius

    def __repr__(self):
        return f"Ball(dim={self.dim}, radius={self.radius})"


class Box(Domain):
    """Axis-aligned box {x: lo <= x <= hi}."""

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if self.lo.shape != self.hi.shape:
            raise ValueError("box bounds must have equal shapes")
        if np.any(self.lo > self.hi):
            raise ValueError("box requires lo <= hi componentwise")
        self.dim = self.lo.shape[0]

    def contains(self, x, tol=1e-10):
        x = np.asarray(x, dtype=float)
        return (
            x.shape == (self.dim,)
            and np.all(x >= self.lo - tol)
            and np.all(x <= self.hi + tol)
        )

    def lmo(self, c):
        c = self._check_query(c)
        # c > 0 -> lo, c < 0 -> hi, ties (c == 0) -> lo
        point = np.where(c > 0, self.lo, np.where(c < 0, self.hi, self.lo))
        return point, float(c @ point)

    def enclosing_radius(self):
        return float(np.linalg.norm(np.maximum(np.abs(self.lo), np.abs(self.hi))))

    def __repr__(self):
        return f"Box(dim={self.dim})"


class Product(Domain):
    """Direct product of domains; LMO and membership work blockwise."""

    def __init__(self, factors):
        self.factors = list(factors)
        if not self.factors:
            raise ValueError("product of zero domains")
        self.dim = sum(f.dim for f in self.factors)
        self.offsets = np.cumsum([0] + [f.dim for f in self.factors])

    def blocks(self, x):
        x = np.asarray(x, dtype=float)
        return [x[self.offsets[i]:self.offsets[i + 1]] for i in range(len(self.factors))]

    def contains(self, x, tol=1e-10):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            return False
        return all(f.contains(b, tol) for f, b in zip(self.factors, self.blocks(x)))

    def lmo(self, c):
        c = self._check_query(c)
        points, value = [], 0.0
        for f, b in zip(self.factors, self.blocks(c)):
            p, v = f.lmo(b)
            points.append(p)
            value += v
        return np.concatenate(points), value

    def enclosing_radius(self):
        return float(np.sqrt(sum(f.enclosing_radius() ** 2 for f in self.factors)))

    def __repr__(self):
        return f"Product({self.factors!r})"


class FiniteAtoms(Domain):
    """Convex hull of a finite list of points; LMO scans the atoms."""

    def __init__(self, atoms):
        self.atoms = np.asarray(atoms, dtype=float)
        if self.atoms.ndim != 2 or self.atoms.shape[0] == 0:
            raise ValueError("atoms must be a nonempty 2-d array")
        self.dim = self.atoms.shape[1]

    def contains(self, x, tol=1e-10):
        # membership in the hull is not decided here; accept points close
        # to an atom (sufficient for the vertex-valued oracles we use)
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            return False
        d = np.linalg.norm(self.atoms - x[None, :], axis=1)
        return bool(d.min() <= tol)

    def lmo(self, c):
        c = self._check_query(c)
        vals = self.atoms @ c
        j = int(np.argmin(vals))
        return self.atoms[j].copy(), float(vals[j])

    def enclosing_radius(self):
        return float(np.linalg.norm(self.atoms, axis=1).max())

    def __repr__(self):
        return f"FiniteAtoms(n={self.atoms.shape[0]}, dim={self.dim})"


def lmo_argmin(domain, c):
    """Minimize the linear form <c, .> over `domain`.

    Returns (point, value) with a deterministic lowest-index tie-break.
    """
    return domain.lmo(c)
