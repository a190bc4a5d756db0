"""Projection-free composite optimization with linesearch-based conditional gradient methods.

Minimizes ``F(x) = f(x) + g(x)`` with ``f`` continuously differentiable and
``g`` proper, closed, convex and supercoercive, using only gradients of ``f``
and linear minimization oracles of ``g``. Two solvers are provided:

* :func:`nm_run` -- nonmonotone Armijo backtracking on ``beta**i`` steps;
* :func:`pf_run` -- parameter-free steps from a backtracked curvature estimate.

Neither needs a Lipschitz or Hölder constant for the gradient.
"""

from .core import (
    ConstantP,
    HarmonicToOne,
    IterateRecord,
    NmConfig,
    PfConfig,
    Problem,
    TerminationStatus,
    as_vector,
    inner,
    norm,
)
from .gap import GapResult, frank_wolfe_gap
from .lmo import BoxIndicator, ElasticNet, L1BallIndicator, L2BallIndicator, SimplexIndicator
from .nonmonotone import nm_run
from .paramfree import pf_run
from .smooth import Logistic, NonHolderWell, PPowerResidual, Quadratic

__all__ = [
    "BoxIndicator",
    "ConstantP",
    "ElasticNet",
    "GapResult",
    "HarmonicToOne",
    "IterateRecord",
    "L1BallIndicator",
    "L2BallIndicator",
    "Logistic",
    "NmConfig",
    "NonHolderWell",
    "PPowerResidual",
    "PfConfig",
    "Problem",
    "Quadratic",
    "SimplexIndicator",
    "TerminationStatus",
    "as_vector",
    "frank_wolfe_gap",
    "inner",
    "nm_run",
    "norm",
    "pf_run",
]

__version__ = "0.1.0"
