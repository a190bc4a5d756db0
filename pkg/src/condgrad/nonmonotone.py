"""Generalized conditional gradient with average-type nonmonotone Armijo backtracking.

Each iteration moves from ``x`` toward the LMO answer ``v`` with step
``beta**i`` for the smallest ``i`` such that

    F(x + beta**i d) <= F_ref - sigma * beta**i * G(x),

then updates the reference ``F_ref <- p F(x_new) + (1 - p) F_ref`` with
``p = p_{k+1}`` from the configured schedule. With ``p = 1`` throughout the
method is monotone.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

from .core import IterateRecord, NmConfig, Problem, TerminationStatus, Vector, as_vector
from .errors import InvariantViolation, LinesearchStalled, StartPointInfeasible
from .gap import GapResult, frank_wolfe_gap

#: Directions shorter than this mean the iterate already is the LMO answer.
D_NORM_TOL = 1e-14
#: Relative slack for the post-step descent assertions.
ASSERT_RTOL = 1e-10


@dataclass
class NmState:
    k: int
    x: Vector
    fx: float
    gx: float
    f_ref: float
    trace: list[IterateRecord] = field(default_factory=list)
    t0_ns: int = 0

    @property
    def F(self) -> float:
        return self.fx + self.gx


class NmLinesearchResult(NamedTuple):
    i: int
    x: Vector
    F: float
    fx: float
    gx: float


def nm_init(prob: Problem, x0) -> NmState:
    """Validate ``x0 ∈ dom g`` and build the iteration-0 state (``F_0 = F(x0)``)."""
    x0 = as_vector(x0, "x0")
    if x0.shape != (prob.dim,):
        raise StartPointInfeasible(f"x0 has dimension {x0.size}, problem has {prob.dim}")
    fx, gx = prob.split_value(x0)
    if not math.isfinite(gx):
        raise StartPointInfeasible("x0 is not in dom g")
    return NmState(k=0, x=x0, fx=fx, gx=gx, f_ref=fx + gx, t0_ns=time.perf_counter_ns())


def nm_linesearch(prob: Problem, st: NmState, cfg: NmConfig, gr: GapResult) -> NmLinesearchResult:
    """Smallest ``i <= max_backtracks`` passing the nonmonotone Armijo test."""
    for i in range(cfg.max_backtracks + 1):
        t = cfg.beta**i
        x_trial = st.x + t * gr.d
        gx = prob.nonsmooth.value(x_trial)
        if not math.isfinite(gx):
            continue
        fx = prob.smooth.value(x_trial)
        F_trial = fx + gx
        if F_trial <= st.f_ref - cfg.sigma * t * gr.gap:
            return NmLinesearchResult(i, x_trial, F_trial, fx, gx)
    raise LinesearchStalled(
        f"no step among beta^0..beta^{cfg.max_backtracks} satisfied the Armijo test at k={st.k} "
        f"(gap={gr.gap:.3e}, F_ref={st.f_ref:.17g})"
    )


def _record(st: NmState, gr_gap: float, step: float, backtracks: int, dnorm2: Optional[float]) -> IterateRecord:
    return IterateRecord(
        k=st.k,
        f_x=st.F,
        f_ref=st.f_ref,
        gap=gr_gap,
        step=step,
        backtracks=backtracks,
        l_k=None,
        elapsed_ns=time.perf_counter_ns() - st.t0_ns,
        dnorm2=dnorm2,
    )


def nm_step(prob: Problem, st: NmState, cfg: NmConfig) -> tuple[NmState, Optional[TerminationStatus]]:
    """One iteration. Returns the new state and a status when the run ends.

    On termination the final row (no step) is appended to ``st.trace`` and
    the state is returned unchanged otherwise.
    """
    gr = frank_wolfe_gap(prob, st.x, st.gx)
    status = None
    if gr.gap <= cfg.gap_tol:
        status = TerminationStatus.GAP_BELOW_TOL
    elif math.sqrt(gr.dnorm2) <= D_NORM_TOL:
        status = TerminationStatus.STATIONARY_STEP
    elif st.k >= cfg.max_iters:
        status = TerminationStatus.MAX_ITERS
    if status is not None:
        st.trace.append(_record(st, gr.gap, 0.0, 0, gr.dnorm2))
        return st, status

    try:
        ls = nm_linesearch(prob, st, cfg, gr)
    except LinesearchStalled:
        st.trace.append(_record(st, gr.gap, 0.0, 0, gr.dnorm2))
        raise
    step = cfg.beta**ls.i
    st.trace.append(_record(st, gr.gap, step, ls.i, gr.dnorm2))

    p_next = cfg.next_p(st.k)
    f_ref_next = p_next * ls.F + (1.0 - p_next) * st.f_ref

    slack = ASSERT_RTOL * max(1.0, abs(st.f_ref))
    bound = st.f_ref - cfg.p * cfg.sigma * step * gr.gap
    if f_ref_next > bound + slack:
        raise InvariantViolation(f"reference value rose above its decrement bound at k={st.k}")
    if ls.F > f_ref_next + slack:
        raise InvariantViolation(f"F(x^{st.k + 1}) exceeds the reference value")

    new = replace(st, k=st.k + 1, x=ls.x, fx=ls.fx, gx=ls.gx, f_ref=f_ref_next)
    return new, None


def nm_run(prob: Problem, x0, cfg: NmConfig) -> tuple[list[IterateRecord], TerminationStatus]:
    """Iterate :func:`nm_step` until termination.

    Raises
    ------
    StartPointInfeasible
        If ``x0`` is outside ``dom g``.
    LinesearchStalled
        With ``.trace`` holding the partial trace.
    """
    st = nm_init(prob, x0)
    try:
        while True:
            st, status = nm_step(prob, st, cfg)
            if status is not None:
                return st.trace, status
    except LinesearchStalled as exc:
        exc.trace = st.trace
        raise
