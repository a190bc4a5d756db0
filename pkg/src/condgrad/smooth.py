"""Smooth terms ``f`` with exact values and gradients.

The variants cover three gradient regimes: Lipschitz (``Quadratic``,
``Logistic``), Hölder with exponent ``pexp - 1`` (``PPowerResidual``) and
continuous but not Hölder at the origin (``NonHolderWell``).
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from .core import Vector, check_dim
from .errors import DimensionMismatch, NonFiniteValue


def _matrix(a: ArrayLike, name: str) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


def _vector(a: ArrayLike, name: str) -> np.ndarray:
    arr = np.array(a, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


class SmoothOracle:
    """Base class. Subclasses implement ``_value`` and ``_grad``."""

    dim: int
    #: Hölder exponent of the gradient, ``None`` when no exponent applies.
    nu: Optional[float] = None

    def value(self, x: Vector) -> float:
        check_dim(x, self.dim)
        # overflow is reported as NonFiniteValue below, not as a warning
        with np.errstate(over="ignore", invalid="ignore"):
            val = float(self._value(x))
        if not math.isfinite(val):
            raise NonFiniteValue(f"{type(self).__name__}.value is not finite")
        return val

    def grad(self, x: Vector) -> Vector:
        check_dim(x, self.dim)
        with np.errstate(over="ignore", invalid="ignore"):
            g = np.asarray(self._grad(x), dtype=np.float64)
        if not np.all(np.isfinite(g)):
            raise NonFiniteValue(f"{type(self).__name__}.grad is not finite")
        return g

    def _value(self, x: Vector) -> float:
        raise NotImplementedError

    def _grad(self, x: Vector) -> Vector:
        raise NotImplementedError


class Quadratic(SmoothOracle):
    """``f(x) = ½ xᵀQx + qᵀx`` with symmetric ``Q`` (not necessarily PSD)."""

    nu = 1.0

    def __init__(self, Q: ArrayLike, q: ArrayLike):
        self.Q = _matrix(Q, "Q")
        self.q = _vector(q, "q")
        n = self.Q.shape[0]
        if self.Q.shape != (n, n):
            raise DimensionMismatch(f"Q must be square, got shape {self.Q.shape}")
        if self.q.shape != (n,):
            raise DimensionMismatch(f"q has length {self.q.size}, expected {n}")
        if np.max(np.abs(self.Q - self.Q.T)) > 1e-12:
            raise ValueError("Q must be symmetric to 1e-12")
        self.dim = n

    def is_convex(self) -> bool:
        return bool(np.min(np.linalg.eigvalsh(self.Q)) >= -1e-12)

    def _value(self, x):
        return 0.5 * np.dot(x, self.Q @ x) + np.dot(self.q, x)

    def _grad(self, x):
        return self.Q @ x + self.q


class PPowerResidual(SmoothOracle):
    """``f(x) = (1/pexp) Σ |(Ax - b)_i|^pexp`` for ``1 < pexp <= 2``.

    The gradient is Hölder continuous with exponent ``pexp - 1``; with
    ``pexp = 2`` the function is exactly half the squared residual.
    """

    def __init__(self, A: ArrayLike, b: ArrayLike, pexp: float):
        if not 1.0 < pexp <= 2.0:
            raise ValueError(f"pexp must lie in (1, 2], got {pexp}")
        self.A = _matrix(A, "A")
        self.b = _vector(b, "b")
        if self.b.shape != (self.A.shape[0],):
            raise DimensionMismatch(f"b has length {self.b.size}, expected {self.A.shape[0]}")
        self.pexp = float(pexp)
        self.nu = self.pexp - 1.0
        self.dim = self.A.shape[1]

    def residual(self, x: Vector) -> Vector:
        return self.A @ x - self.b

    def _value(self, x):
        r = self.residual(x)
        return np.sum(np.abs(r) ** self.pexp) / self.pexp

    def _grad(self, x):
        r = self.residual(x)
        return self.A.T @ (np.sign(r) * np.abs(r) ** (self.pexp - 1.0))


class Logistic(SmoothOracle):
    """``f(x) = Σ log(1 + exp(-y_i (Ax)_i))`` with labels ``y_i = ±1``."""

    nu = 1.0

    def __init__(self, A: ArrayLike, y: ArrayLike):
        self.A = _matrix(A, "A")
        self.y = _vector(y, "y")
        if self.y.shape != (self.A.shape[0],):
            raise DimensionMismatch(f"y has length {self.y.size}, expected {self.A.shape[0]}")
        if not np.all(np.abs(self.y) == 1.0):
            raise ValueError("labels y must be +1 or -1")
        self.dim = self.A.shape[1]

    def _value(self, x):
        margins = self.y * (self.A @ x)
        return np.sum(np.logaddexp(0.0, -margins))

    def _grad(self, x):
        margins = self.y * (self.A @ x)
        # 1 / (1 + exp(m)) without overflow
        weights = np.exp(-np.logaddexp(0.0, margins))
        return -(self.A.T @ (self.y * weights))


class NonHolderWell(SmoothOracle):
    """Separable ``f(x) = Σ φ(x_j)`` whose gradient is continuous but not Hölder at 0.

    ``φ(t) = t / ln(1/t)`` on ``(0, a]``, ``φ(0) = 0``, extended past the
    knot ``a`` by the quadratic with matching value and slope plus curvature
    ``m``, and evenly to negative ``t``. ``φ'`` behaves like ``1/ln(1/t)``
    near the origin, which beats every power ``t^ν``.
    """

    nu = None

    def __init__(self, dim: int, a: float = math.exp(-2.0), m: float = 1.0):
        if not 0.0 < a <= math.exp(-2.0):
            raise ValueError(f"knot a must lie in (0, e^-2], got {a}")
        if not m > 0.0:
            raise ValueError(f"curvature m must be positive, got {m}")
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = int(dim)
        self.a = float(a)
        self.m = float(m)
        log_a = -math.log(self.a)
        self._phi_a = self.a / log_a
        self._dphi_a = 1.0 / log_a + 1.0 / log_a**2

    def _log_inv(self, s: np.ndarray) -> np.ndarray:
        """``ln(1/s)`` on ``(0, a]``, 1 elsewhere (placeholder for masked lanes)."""
        mask = (s > 0.0) & (s <= self.a)
        # -log(s) rather than log(1/s): 1/s overflows for subnormal s
        return np.where(mask, -np.log(np.where(mask, s, 1.0)), 1.0)

    def phi(self, t: ArrayLike) -> np.ndarray:
        s = np.abs(np.asarray(t, dtype=np.float64))
        inner_part = s <= self.a
        log_inv = self._log_inv(s)
        near = np.where(s > 0.0, s / log_inv, 0.0)
        far = self._phi_a + self._dphi_a * (s - self.a) + 0.5 * self.m * (s - self.a) ** 2
        return np.where(inner_part, near, far)

    def dphi(self, t: ArrayLike) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        s = np.abs(t)
        inner_part = s <= self.a
        log_inv = self._log_inv(s)
        near = np.where(s > 0.0, 1.0 / log_inv + 1.0 / log_inv**2, 0.0)
        far = self._dphi_a + self.m * (s - self.a)
        return np.sign(t) * np.where(inner_part, near, far)

    def _value(self, x):
        return np.sum(self.phi(x))

    def _grad(self, x):
        return self.dphi(x)
