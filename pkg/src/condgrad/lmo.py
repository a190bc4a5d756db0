"""Nonsmooth terms ``g`` and their linear minimization oracles.

Every term is proper, closed, convex and supercoercive, so
``argmin_v <c, v> + g(v)`` always exists. Ties are broken deterministically:
lowest index for the vertex oracles, the lower bound for zero box costs,
and ``+r e_1`` for a zero cost on the balls.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike

from .core import Vector, check_dim
from .errors import DimensionMismatch, NonFiniteInput, NotSupercoercive

#: Absolute slack for indicator feasibility; iterates are convex combinations
#: of feasible points and pick up rounding error.
FEAS_TOL = 1e-9


class NonsmoothTerm:
    dim: int

    def value(self, x: Vector) -> float:
        """``g(x)``; indicators return ``math.inf`` off the set."""
        check_dim(x, self.dim)
        return self._value(np.asarray(x, dtype=np.float64))

    def lmo(self, c: Vector) -> tuple[Vector, float]:
        """Return ``(v, g(v))`` with ``v`` minimizing ``<c, v> + g(v)``."""
        c = np.asarray(c, dtype=np.float64)
        check_dim(c, self.dim, "c")
        if not np.all(np.isfinite(c)):
            raise NonFiniteInput("LMO cost vector has non-finite entries")
        v = self._lmo(c)
        return v, self._value(v)

    def vertices(self) -> np.ndarray | None:
        """Extreme points as rows, for polytopes only."""
        return None

    def _value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def _lmo(self, c: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _radius(r: float) -> float:
    r = float(r)
    if not (r > 0.0 and math.isfinite(r)):
        raise ValueError(f"radius must be positive and finite, got {r}")
    return r


def _dim(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"dim must be a positive integer, got {n}")
    return int(n)


class SimplexIndicator(NonsmoothTerm):
    """Indicator of ``{v >= 0, Σ v_i = r}``."""

    def __init__(self, dim: int, radius: float = 1.0):
        self.dim = _dim(dim)
        self.radius = _radius(radius)

    def _value(self, x):
        if np.all(x >= -FEAS_TOL) and abs(np.sum(x) - self.radius) <= FEAS_TOL:
            return 0.0
        return math.inf

    def _lmo(self, c):
        v = np.zeros(self.dim)
        v[int(np.argmin(c))] = self.radius
        return v

    def vertices(self):
        return self.radius * np.eye(self.dim)


class L1BallIndicator(NonsmoothTerm):
    """Indicator of ``{‖v‖₁ <= r}``."""

    def __init__(self, dim: int, radius: float = 1.0):
        self.dim = _dim(dim)
        self.radius = _radius(radius)

    def _value(self, x):
        return 0.0 if np.sum(np.abs(x)) <= self.radius + FEAS_TOL else math.inf

    def _lmo(self, c):
        v = np.zeros(self.dim)
        j = int(np.argmax(np.abs(c)))
        v[j] = -self.radius if c[j] > 0 else self.radius
        return v

    def vertices(self):
        eye = self.radius * np.eye(self.dim)
        return np.vstack([eye, -eye])


class L2BallIndicator(NonsmoothTerm):
    """Indicator of ``{‖v‖₂ <= r}``."""

    def __init__(self, dim: int, radius: float = 1.0):
        self.dim = _dim(dim)
        self.radius = _radius(radius)

    def _value(self, x):
        return 0.0 if math.sqrt(np.dot(x, x)) <= self.radius + FEAS_TOL else math.inf

    def _lmo(self, c):
        cn = math.sqrt(np.dot(c, c))
        if cn == 0.0:
            v = np.zeros(self.dim)
            v[0] = self.radius
            return v
        return -self.radius * (c / cn)


class BoxIndicator(NonsmoothTerm):
    """Indicator of ``{l <= v <= u}`` with finite bounds."""

    def __init__(self, lower: ArrayLike, upper: ArrayLike):
        lo = np.array(lower, dtype=np.float64).reshape(-1)
        hi = np.array(upper, dtype=np.float64).reshape(-1)
        if lo.shape != hi.shape or lo.size == 0:
            raise DimensionMismatch("box bounds must be non-empty vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("box requires lower <= upper componentwise")
        lo.flags.writeable = False
        hi.flags.writeable = False
        self.lower, self.upper = lo, hi
        self.dim = lo.size

    def _value(self, x):
        if np.all(x >= self.lower - FEAS_TOL) and np.all(x <= self.upper + FEAS_TOL):
            return 0.0
        return math.inf

    def _lmo(self, c):
        return np.where(c < 0.0, self.upper, self.lower)

    def vertices(self):
        n = self.dim
        bits = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
        return np.where(bits == 1, self.upper, self.lower)


class ElasticNet(NonsmoothTerm):
    """``g(v) = λ1 ‖v‖₁ + (λ2/2) ‖v‖²`` with ``λ2 > 0``."""

    def __init__(self, dim: int, l1: float, l2: float):
        self.dim = _dim(dim)
        if not (l1 >= 0.0 and math.isfinite(l1)):
            raise ValueError(f"l1 weight must be nonnegative, got {l1}")
        if l2 == 0.0:
            raise NotSupercoercive(
                "elastic net needs l2 > 0: the l1 norm alone is not supercoercive, "
                "so the linear subproblem can be unbounded"
            )
        if not (l2 > 0.0 and math.isfinite(l2)):
            raise ValueError(f"l2 weight must be positive, got {l2}")
        self.l1 = float(l1)
        self.l2 = float(l2)

    def _value(self, x):
        return float(self.l1 * np.sum(np.abs(x)) + 0.5 * self.l2 * np.dot(x, x))

    def _lmo(self, c):
        return -np.sign(c) * np.maximum(np.abs(c) - self.l1, 0.0) / self.l2
