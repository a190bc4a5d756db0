"""Parameter-free generalized conditional gradient with a backtracked curvature estimate.

Each iteration starts from half the previous estimate, ``L = L_prev / 2``,
takes the clamped step ``tau = min(1, G / (2 L ‖d‖²))`` and doubles ``L``
until

    F(x + tau d) <= F(x) - tau G / 2 + L tau² ‖d‖² / 2.

No Hölder exponent or smoothness constant is needed as input.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

from .core import IterateRecord, PfConfig, Problem, TerminationStatus, Vector, as_vector
from .errors import DegenerateDirection, InvariantViolation, LinesearchStalled, StartPointInfeasible
from .gap import GapResult, frank_wolfe_gap

#: ‖d‖² at or below this makes the step denominator meaningless.
DNORM2_TOL = 1e-28
ASSERT_RTOL = 1e-10


@dataclass
class PfState:
    k: int
    x: Vector
    fx: float
    gx: float
    l_prev: float
    trace: list[IterateRecord] = field(default_factory=list)
    t0_ns: int = 0

    @property
    def F(self) -> float:
        return self.fx + self.gx


class PfLinesearchResult(NamedTuple):
    i: int
    L: float
    tau: float
    x: Vector
    F: float
    fx: float
    gx: float


def pf_trial(l: float, gap: float, dnorm2: float) -> float:
    """Clamped trial step ``min(1, gap / (2 l dnorm2))``."""
    if dnorm2 <= DNORM2_TOL:
        raise DegenerateDirection(f"‖d‖² = {dnorm2:.3e} is too small for a step")
    if not (l > 0.0 and gap > 0.0):
        raise ValueError(f"pf_trial needs l > 0 and gap > 0, got l={l}, gap={gap}")
    # dividing by l last keeps a huge l from overflowing the denominator
    return min(1.0, gap / (2.0 * dnorm2) / l)


def pf_init(prob: Problem, x0, cfg: PfConfig) -> PfState:
    x0 = as_vector(x0, "x0")
    if x0.shape != (prob.dim,):
        raise StartPointInfeasible(f"x0 has dimension {x0.size}, problem has {prob.dim}")
    fx, gx = prob.split_value(x0)
    if not math.isfinite(gx):
        raise StartPointInfeasible("x0 is not in dom g")
    return PfState(k=0, x=x0, fx=fx, gx=gx, l_prev=cfg.l_init, t0_ns=time.perf_counter_ns())


def pf_linesearch(prob: Problem, st: PfState, cfg: PfConfig, gr: GapResult) -> PfLinesearchResult:
    dnorm2 = gr.dnorm2
    F = st.F
    L = 0.5 * st.l_prev
    for i in range(cfg.max_backtracks + 1):
        if not math.isfinite(L):
            raise LinesearchStalled(
                f"curvature estimate overflowed at k={st.k} after {i} trials (gap={gr.gap:.3e}, ‖d‖²={dnorm2:.3e})"
            )
        tau = pf_trial(L, gr.gap, dnorm2)
        if tau == 0.0:
            # doubling L further only shrinks the step; the gap is below what L can resolve
            raise LinesearchStalled(
                f"step underflowed to zero at k={st.k} (gap={gr.gap:.3e}, L={L:.3e}, ‖d‖²={dnorm2:.3e})"
            )
        x_trial = st.x + tau * gr.d
        gx = prob.nonsmooth.value(x_trial)
        if math.isfinite(gx):
            fx = prob.smooth.value(x_trial)
            F_trial = fx + gx
            if F_trial <= F - 0.5 * tau * gr.gap + 0.5 * L * tau * tau * dnorm2:
                return PfLinesearchResult(i, L, tau, x_trial, F_trial, fx, gx)
        L = 2.0 * L
    raise LinesearchStalled(
        f"no curvature estimate accepted at k={st.k} within {cfg.max_backtracks} doublings "
        f"(gap={gr.gap:.3e}, L={L:.3e})"
    )


def _record(st: PfState, gap: float, step: float, backtracks: int, l_k: Optional[float], dnorm2: float) -> IterateRecord:
    return IterateRecord(
        k=st.k,
        f_x=st.F,
        f_ref=st.F,
        gap=gap,
        step=step,
        backtracks=backtracks,
        l_k=l_k,
        elapsed_ns=time.perf_counter_ns() - st.t0_ns,
        dnorm2=dnorm2,
    )


def pf_step(prob: Problem, st: PfState, cfg: PfConfig) -> tuple[PfState, Optional[TerminationStatus]]:
    gr = frank_wolfe_gap(prob, st.x, st.gx)
    dnorm2 = gr.dnorm2
    status = None
    if gr.gap <= cfg.gap_tol:
        status = TerminationStatus.GAP_BELOW_TOL
    elif dnorm2 <= DNORM2_TOL:
        status = TerminationStatus.STATIONARY_STEP
    elif st.k >= cfg.max_iters:
        status = TerminationStatus.MAX_ITERS
    if status is not None:
        st.trace.append(_record(st, gr.gap, 0.0, 0, None, dnorm2))
        return st, status

    try:
        ls = pf_linesearch(prob, st, cfg, gr)
    except LinesearchStalled:
        st.trace.append(_record(st, gr.gap, 0.0, 0, None, dnorm2))
        raise
    st.trace.append(_record(st, gr.gap, ls.tau, ls.i, ls.L, dnorm2))

    F = st.F
    if ls.F > F - 0.25 * ls.tau * gr.gap + ASSERT_RTOL * max(1.0, abs(F)):
        raise InvariantViolation(f"sufficient decrease F - tau G / 4 violated at k={st.k}")
    if 2.0 * ls.tau * dnorm2 * ls.L > gr.gap + 1e-10 * max(1.0, gr.gap):
        raise InvariantViolation(f"2 L tau ‖d‖² exceeds the gap at k={st.k}")

    new = replace(st, k=st.k + 1, x=ls.x, fx=ls.fx, gx=ls.gx, l_prev=ls.L)
    return new, None


def pf_run(prob: Problem, x0, cfg: PfConfig) -> tuple[list[IterateRecord], TerminationStatus]:
    """Iterate :func:`pf_step` until termination; see :func:`condgrad.nonmonotone.nm_run`."""
    st = pf_init(prob, x0, cfg)
    try:
        while True:
            st, status = pf_step(prob, st, cfg)
            if status is not None:
                return st.trace, status
    except LinesearchStalled as exc:
        exc.trace = st.trace
        raise
