"""Vectors, problem bundling, solver configuration and trace records."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionMismatch, NonFiniteValue

if TYPE_CHECKING:
    from .lmo import NonsmoothTerm
    from .smooth import SmoothOracle

Vector = NDArray[np.float64]


def as_vector(x: ArrayLike, name: str = "x") -> Vector:
    """Copy ``x`` into a read-only, finite, 1-D float64 array."""
    arr = np.array(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatch(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{name} has non-finite coordinates")
    arr.flags.writeable = False
    return arr


def check_dim(x: Vector, dim: int, name: str = "x") -> None:
    if x.shape != (dim,):
        raise DimensionMismatch(f"{name} has shape {x.shape}, expected ({dim},)")


def inner(a: Vector, b: Vector) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"inner: shapes {a.shape} and {b.shape} differ")
    return float(np.dot(a, b))


def norm(a: Vector) -> float:
    # hypot scales internally, so tiny nonzero vectors do not underflow to 0
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1:
        raise DimensionMismatch(f"norm expects a 1-D vector, got shape {a.shape}")
    return math.hypot(*a.tolist())


@dataclass(frozen=True)
class Problem:
    """Composite objective ``F = f + g``."""

    smooth: "SmoothOracle"
    nonsmooth: "NonsmoothTerm"

    def __post_init__(self):
        if self.smooth.dim != self.nonsmooth.dim:
            raise DimensionMismatch(
                f"smooth term has dim {self.smooth.dim}, nonsmooth term has dim {self.nonsmooth.dim}"
            )

    @property
    def dim(self) -> int:
        return self.smooth.dim

    def split_value(self, x: Vector) -> tuple[float, float]:
        """Return ``(f(x), g(x))``; ``g`` may be ``+inf``."""
        gx = self.nonsmooth.value(x)
        fx = self.smooth.value(x)
        return fx, gx

    def value(self, x: Vector) -> float:
        fx, gx = self.split_value(x)
        return fx + gx


class TerminationStatus(enum.Enum):
    GAP_BELOW_TOL = "GapBelowTol"
    MAX_ITERS = "MaxIters"
    STATIONARY_STEP = "StationaryStep"
    LINESEARCH_STALLED = "LinesearchStalled"

    def __str__(self) -> str:
        return self.value


# p_{k+1} schedules for the nonmonotone reference value.


@dataclass(frozen=True)
class ConstantP:
    value: float

    def __call__(self, k: int, p_min: float) -> float:
        return self.value


@dataclass(frozen=True)
class HarmonicToOne:
    """``p_{k+1} = max(p, 1/(k+2))``; weights the newest value less over time."""

    def __call__(self, k: int, p_min: float) -> float:
        return max(p_min, 1.0 / (k + 2))


PkSchedule = Union[ConstantP, HarmonicToOne, Callable[[int, float], float]]


@dataclass(frozen=True)
class NmConfig:
    """Parameters of the nonmonotone Armijo method.

    ``pk_schedule`` defaults to the constant ``p``.
    """

    beta: float = 0.5
    sigma: float = 0.1
    p: float = 0.5
    pk_schedule: Optional[PkSchedule] = None
    gap_tol: float = 1e-6
    max_iters: int = 100_000
    max_backtracks: int = 60

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError(f"sigma must lie in (0, 1), got {self.sigma}")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if isinstance(self.pk_schedule, ConstantP) and not self.p <= self.pk_schedule.value <= 1.0:
            raise ValueError(f"constant p_k = {self.pk_schedule.value} is outside [p, 1] = [{self.p}, 1]")
        _check_common(self.gap_tol, self.max_iters, self.max_backtracks)

    def next_p(self, k: int) -> float:
        """``p_{k+1}`` chosen after iteration ``k``."""
        if self.pk_schedule is None:
            return self.p
        pk = float(self.pk_schedule(k, self.p))
        if not self.p <= pk <= 1.0:
            raise ValueError(f"pk_schedule emitted {pk} outside [{self.p}, 1] at k={k}")
        return pk


@dataclass(frozen=True)
class PfConfig:
    """Parameters of the parameter-free method; ``l_init`` is the initial curvature guess."""

    l_init: float = 1.0
    gap_tol: float = 1e-6
    max_iters: int = 100_000
    max_backtracks: int = 80

    def __post_init__(self):
        if not (self.l_init > 0.0 and math.isfinite(self.l_init)):
            raise ValueError(f"l_init must be positive and finite, got {self.l_init}")
        _check_common(self.gap_tol, self.max_iters, self.max_backtracks)


def _check_common(gap_tol, max_iters, max_backtracks):
    if not gap_tol >= 0.0:
        raise ValueError(f"gap_tol must be nonnegative, got {gap_tol}")
    # max_iters = 0 is a legitimate "evaluate the start point only" budget
    if max_iters < 0:
        raise ValueError(f"max_iters must be nonnegative, got {max_iters}")
    if max_backtracks < 1:
        raise ValueError(f"max_backtracks must be positive, got {max_backtracks}")


@dataclass(frozen=True)
class IterateRecord:
    """One trace row: the iterate ``x^k`` and the step taken from it.

    The last row of a trace carries no step (``step=0``, ``backtracks=0``,
    ``l_k=None``). ``dnorm2`` is kept in memory only; trace files do not
    store it.
    """

    k: int
    f_x: float
    f_ref: float
    gap: float
    step: float
    backtracks: int
    l_k: Optional[float]
    elapsed_ns: int
    dnorm2: Optional[float] = field(default=None, compare=False)
