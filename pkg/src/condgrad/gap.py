"""Frank–Wolfe gap and search direction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Problem, Vector, check_dim
from .errors import InfeasibleQueryPoint, NegativeGap

#: Computed gaps in ``[-GAP_CLAMP, 0)`` are rounding noise and become 0.
GAP_CLAMP = 1e-12


@dataclass(frozen=True)
class GapResult:
    gap: float
    v: Vector
    d: Vector
    gv: float
    grad: Vector

    @property
    def dnorm2(self) -> float:
        return float(np.dot(self.d, self.d))


def frank_wolfe_gap(prob: Problem, x: Vector, gx: float) -> GapResult:
    """Gap ``G(x) = <∇f(x), x - v> + g(x) - g(v)`` at the LMO answer ``v``.

    ``gx`` must be ``g(x)`` as already evaluated by the caller; it is not
    recomputed so feasibility decisions stay consistent within an iteration.

    Raises
    ------
    InfeasibleQueryPoint
        If ``gx`` is infinite.
    NegativeGap
        If the computed gap is below ``-1e-12``.
    """
    check_dim(x, prob.dim)
    if not math.isfinite(gx):
        raise InfeasibleQueryPoint("frank_wolfe_gap needs x in dom g")
    c = prob.smooth.grad(x)
    v, gv = prob.nonsmooth.lmo(c)
    d = v - x
    gap = float(-np.dot(c, d)) + gx - gv
    if gap < 0.0:
        if gap < -GAP_CLAMP:
            raise NegativeGap(f"gap {gap:.3e} is negative beyond rounding")
        gap = 0.0
    return GapResult(gap=gap, v=v, d=d, gv=gv, grad=c)
