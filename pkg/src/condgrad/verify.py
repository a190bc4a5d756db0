"""Independent ground-truth oracles for desk-scale checks.

Nothing here calls the LMOs or the solvers: finite differences check the
gradients, enumeration checks the gap, a proximal subgradient scheme supplies
reference optima, and :func:`audit_trace` re-derives the per-step descent
guarantees from recorded trace fields alone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence, Union

import numpy as np

from .core import IterateRecord, NmConfig, PfConfig, Problem, Vector
from .errors import DimensionTooLarge, InsufficientTrace, NonConvexFixture
from .lmo import (
    BoxIndicator,
    ElasticNet,
    L1BallIndicator,
    L2BallIndicator,
    NonsmoothTerm,
    SimplexIndicator,
)
from .smooth import Logistic, NonHolderWell, PPowerResidual, Quadratic, SmoothOracle


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    location: Optional[int] = None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst": self.worst,
            "location": self.location,
            "note": self.note,
        }


@dataclass
class AuditReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def n_passed(self) -> int:
        return sum(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> str:
        return f"{self.n_passed}/{len(self.checks)} checks passed"

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "summary": {"passed": self.n_passed, "total": len(self.checks)},
            "checks": [c.to_dict() for c in self.checks],
        }


# ---------------------------------------------------------------------------
# gradient checks
# ---------------------------------------------------------------------------


def central_difference(oracle: SmoothOracle, x: Vector, h: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (oracle.value(x + e) - oracle.value(x - e)) / (2.0 * h)
    return out


def grad_check(
    oracle: SmoothOracle, points: Iterable[Vector], h: float = 1e-6, rtol: float = 1e-4
) -> AuditReport:
    """Compare ``oracle.grad`` with central differences at every point.

    A coordinate passes when ``|fd_i - g_i| <= rtol * max(1, |g_i|)``. Points
    must stay clear of non-smooth spots of the oracle (knots of
    :class:`NonHolderWell`, zero residuals of :class:`PPowerResidual`).
    """
    if not h > 0:
        raise ValueError("h must be positive")
    report = AuditReport()
    for idx, x in enumerate(points):
        x = np.asarray(x, dtype=np.float64)
        g = oracle.grad(x)
        fd = central_difference(oracle, x, h)
        rel = np.abs(fd - g) / np.maximum(1.0, np.abs(g))
        j = int(np.argmax(rel))
        ok = bool(rel[j] <= rtol)
        report.checks.append(
            CheckResult(
                name=f"grad_check[{idx}]",
                passed=ok,
                worst=float(rel[j]),
                location=None if ok else idx,
                note="" if ok else f"coordinate {j}: fd={fd[j]!r} grad={g[j]!r}",
            )
        )
    return report


# ---------------------------------------------------------------------------
# brute-force subproblem and gap
# ---------------------------------------------------------------------------

_DEFAULT_GRID = {
    SimplexIndicator: 60,
    L1BallIndicator: 40,
    BoxIndicator: 40,
    L2BallIndicator: 10_000,
    ElasticNet: 200_001,
}


def _cube_grid(lo: np.ndarray, hi: np.ndarray, points: int) -> np.ndarray:
    axes = [np.linspace(a, b, points) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _simplex_grid(n: int, radius: float, parts: int) -> np.ndarray:
    pts = [
        comp
        for comp in itertools.product(range(parts + 1), repeat=n - 1)
        if sum(comp) <= parts
    ]
    arr = np.array([list(c) + [parts - sum(c)] for c in pts], dtype=np.float64)
    return radius * arr / parts


def _sphere_min(c: np.ndarray, radius: float, points: int) -> float:
    """Minimize ``<c, v>`` over the sphere of ``radius`` in 1, 2 or 3 dims."""
    n = c.size
    if n == 1:
        return -radius * abs(float(c[0]))
    if n == 2:
        ang = 2.0 * np.pi * np.arange(points) / points
        vals = radius * (c[0] * np.cos(ang) + c[1] * np.sin(ang))
        return float(vals.min())
    # n == 3: square (polar, azimuth) grid, then repeated zoom around the best cell
    side = max(2, int(round(math.sqrt(points))))
    th_lo, th_hi, ph_lo, ph_hi = 0.0, np.pi, 0.0, 2.0 * np.pi
    best = math.inf
    for _ in range(8):
        th = np.linspace(th_lo, th_hi, side)
        ph = np.linspace(ph_lo, ph_hi, side)
        T, P = np.meshgrid(th, ph, indexing="ij")
        vals = radius * (
            c[0] * np.sin(T) * np.cos(P) + c[1] * np.sin(T) * np.sin(P) + c[2] * np.cos(T)
        )
        k = int(np.argmin(vals))
        best = min(best, float(vals.flat[k]))
        t0, p0 = T.flat[k], P.flat[k]
        dt = 2.0 * (th_hi - th_lo) / (side - 1)
        dp = 2.0 * (ph_hi - ph_lo) / (side - 1)
        th_lo, th_hi = max(0.0, t0 - dt), min(np.pi, t0 + dt)
        ph_lo, ph_hi = p0 - dp, p0 + dp
    return best


def brute_subproblem_min(term: NonsmoothTerm, c: Vector, grid: Optional[int] = None) -> float:
    """``min_v <c, v> + g(v)`` by enumeration (dim <= 3)."""
    c = np.asarray(c, dtype=np.float64)
    n = term.dim
    if n > 3:
        raise DimensionTooLarge(f"brute-force enumeration supports dim <= 3, got {n}")
    grid = grid or _DEFAULT_GRID[type(term)]
    if isinstance(term, ElasticNet):
        # separable: minimize each coordinate over a grid of the box that holds the minimizer
        radius = (np.max(np.abs(c)) + term.l1) / term.l2
        t = np.linspace(-radius, radius, grid if grid % 2 else grid + 1)
        per_coord = c[:, None] * t[None, :] + term.l1 * np.abs(t)[None, :] + 0.5 * term.l2 * t[None, :] ** 2
        return float(np.sum(per_coord.min(axis=1)))
    if isinstance(term, L2BallIndicator):
        return _sphere_min(c, term.radius, grid)
    if isinstance(term, SimplexIndicator):
        cand = _simplex_grid(n, term.radius, grid)
    elif isinstance(term, L1BallIndicator):
        r = term.radius
        cube = _cube_grid(np.full(n, -r), np.full(n, r), grid + 1)
        cand = cube[np.sum(np.abs(cube), axis=1) <= r]
    elif isinstance(term, BoxIndicator):
        cand = _cube_grid(term.lower, term.upper, grid + 1)
    else:
        raise TypeError(f"no enumeration for {type(term).__name__}")
    cand = np.vstack([term.vertices(), cand])
    return float(np.min(cand @ c))


def brute_gap(prob: Problem, x: Vector, grid: Optional[int] = None) -> float:
    """Gap at ``x`` with the subproblem solved by enumeration instead of the LMO."""
    if prob.dim > 3:
        raise DimensionTooLarge(f"brute_gap supports dim <= 3, got {prob.dim}")
    x = np.asarray(x, dtype=np.float64)
    gx = prob.nonsmooth.value(x)
    if not math.isfinite(gx):
        raise ValueError("brute_gap needs x in dom g")
    c = prob.smooth.grad(x)
    return float(np.dot(c, x)) + gx - brute_subproblem_min(prob.nonsmooth, c, grid)


# ---------------------------------------------------------------------------
# reference minimizer
# ---------------------------------------------------------------------------


def project_simplex(z: np.ndarray, radius: float) -> np.ndarray:
    u = np.sort(z)[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, z.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(z - theta, 0.0)


def prox(term: NonsmoothTerm, z: np.ndarray, alpha: float) -> np.ndarray:
    """``argmin_v g(v) + ‖v - z‖² / (2 alpha)``."""
    if isinstance(term, SimplexIndicator):
        return project_simplex(z, term.radius)
    if isinstance(term, L1BallIndicator):
        if np.sum(np.abs(z)) <= term.radius:
            return z
        return np.sign(z) * project_simplex(np.abs(z), term.radius)
    if isinstance(term, L2BallIndicator):
        nz = math.sqrt(np.dot(z, z))
        return z if nz <= term.radius else z * (term.radius / nz)
    if isinstance(term, BoxIndicator):
        return np.clip(z, term.lower, term.upper)
    if isinstance(term, ElasticNet):
        return np.sign(z) * np.maximum(np.abs(z) - alpha * term.l1, 0.0) / (1.0 + alpha * term.l2)
    raise TypeError(f"no prox for {type(term).__name__}")


def reference_minimum(
    prob: Problem,
    x0: Vector,
    max_iters: int = 1_000_000,
    tol: float = 1e-12,
    c: float = 1.0,
) -> tuple[float, Vector]:
    """Best ``F`` found by proximal gradient with steps ``c / sqrt(k + 1)``.

    Stops after ``max_iters`` steps or once successive iterates move by at
    most ``tol``. Only convex smooth terms are accepted.
    """
    f = prob.smooth
    if isinstance(f, NonHolderWell) or (isinstance(f, Quadratic) and not f.is_convex()):
        raise NonConvexFixture(f"reference_minimum needs a convex fixture, got {type(f).__name__}")
    if not isinstance(f, (Quadratic, PPowerResidual, Logistic)):
        raise NonConvexFixture(f"convexity of {type(f).__name__} is unknown")
    g = prob.nonsmooth
    x = prox(g, np.asarray(x0, dtype=np.float64), c)
    best_F, best_x = prob.value(x), x
    # the loop runs up to 1e6 times, so it calls the unchecked evaluators and
    # validates the result once at the end
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(max_iters):
            alpha = c / math.sqrt(k + 1.0)
            x_new = prox(g, x - alpha * f._grad(x), alpha)
            F = float(f._value(x_new)) + g._value(x_new)
            if F < best_F:
                best_F, best_x = F, x_new
            step = x_new - x
            if math.sqrt(np.dot(step, step)) <= tol:
                break
            x = x_new
    return prob.value(best_x), best_x


# ---------------------------------------------------------------------------
# trace audit
# ---------------------------------------------------------------------------


def _excess_check(name: str, excess: Sequence[float], rows: Sequence[int], note: str = "") -> CheckResult:
    """``excess`` is lhs - rhs - slack; positive entries are violations."""
    if len(excess) == 0:
        return CheckResult(name, True, 0.0, None, note or "no rows to check")
    excess = np.asarray(excess, dtype=np.float64)
    excess = np.where(np.isnan(excess), np.inf, excess)  # NaN means the check could not hold
    worst = float(np.max(excess))
    ok = bool(worst <= 0.0)
    # later rows can inherit a violation, so point at the first one
    first = None if ok else int(rows[int(np.argmax(excess > 0.0))])
    return CheckResult(name, ok, worst, first, note)


def audit_trace(
    trace: Sequence[IterateRecord],
    algorithm: str,
    cfg: Union[NmConfig, PfConfig],
    tol: float = 1e-10,
) -> AuditReport:
    """Re-verify the per-step guarantees of a trace from its recorded fields.

    ``algorithm`` is ``"nm"`` or ``"pf"``. Every row but the last records a
    step; slack on value inequalities is ``tol * max(1, |F|)``. A failed check
    reports the row index holding the offending value.
    """
    if len(trace) == 0:
        raise ValueError("audit_trace needs a nonempty trace")
    algorithm = algorithm.lower()
    if algorithm not in ("nm", "pf"):
        raise ValueError(f"algorithm must be 'nm' or 'pf', got {algorithm!r}")

    k = np.array([r.k for r in trace])
    f_x = np.array([r.f_x for r in trace], dtype=np.float64)
    f_ref = np.array([r.f_ref for r in trace], dtype=np.float64)
    gap = np.array([r.gap for r in trace], dtype=np.float64)
    step = np.array([r.step for r in trace], dtype=np.float64)
    bt = np.array([r.backtracks for r in trace])
    n = len(trace)
    rows = np.arange(n)
    steps = rows[:-1]  # rows that carry a step
    nxt = rows[1:]

    report = AuditReport()
    add = report.checks.append
    add(_excess_check("row_index", np.abs(k - rows).astype(float), rows))
    add(_excess_check("gap_nonnegative", -gap, rows))
    add(_excess_check("step_in_unit_interval", np.maximum(-step, step - 1.0), rows))
    add(_excess_check("step_positive", -step[steps] if len(steps) else [], steps))
    level_slack = tol * max(1.0, abs(f_x[0]))
    add(_excess_check("level_set", f_x - f_x[0] - level_slack, rows))

    if algorithm == "nm":
        add(_excess_check("reference_start", [abs(f_ref[0] - f_x[0])], [0]))
        add(_excess_check("reference_domination", f_x - f_ref - tol * np.maximum(1.0, np.abs(f_ref)), rows))
        bound = f_ref[:-1] - cfg.p * cfg.sigma * step[:-1] * gap[:-1]
        add(
            _excess_check(
                "reference_decrement",
                f_ref[1:] - bound - tol * np.maximum(1.0, np.abs(f_ref[:-1])),
                nxt,
            )
        )
        expected = np.array([cfg.beta ** int(i) for i in bt[:-1]])
        add(_excess_check("armijo_step_shape", np.abs(step[:-1] - expected) - 1e-12 * expected, steps))
        add(_excess_check("no_curvature_column", [float(r.l_k is not None) for r in trace], rows))
        return report

    add(_excess_check("reference_equals_value", np.abs(f_ref - f_x), rows))
    slack = tol * np.maximum(1.0, np.abs(f_x[:-1]))
    add(_excess_check("sufficient_decrease", f_x[1:] - (f_x[:-1] - 0.25 * step[:-1] * gap[:-1]) - slack, nxt))
    add(_excess_check("monotone", f_x[1:] - f_x[:-1] - slack, nxt))

    l_prev = cfg.l_init
    sched, clamp, prod = [], [], []
    for r in trace[:-1]:
        if r.l_k is None:
            sched.append(math.inf)
            clamp.append(math.inf)
            prod.append(math.inf)
            continue
        want = l_prev * 2.0 ** (r.backtracks - 1)
        sched.append(abs(r.l_k - want) - 1e-12 * want)
        if r.dnorm2 is not None:
            tau = min(1.0, r.gap / (2.0 * r.dnorm2) / r.l_k)
            clamp.append(abs(r.step - tau) - 1e-12 * tau)
            prod.append(2.0 * r.step * r.dnorm2 * r.l_k - r.gap - 1e-10 * max(1.0, r.gap))
        l_prev = r.l_k
    add(_excess_check("curvature_schedule", sched, steps))
    if len(steps) and all(r.dnorm2 is not None for r in trace[:-1]):
        add(_excess_check("step_clamp", clamp, steps))
        add(_excess_check("clamp_product", prod, steps))
    else:
        add(CheckResult("step_clamp", True, 0.0, None, "skipped: ‖d‖² not recorded"))
    add(_excess_check("final_row_without_step", [float(trace[-1].l_k is not None)], [n - 1]))
    return report


# ---------------------------------------------------------------------------
# empirical rates
# ---------------------------------------------------------------------------


class RateSlope(NamedTuple):
    slope: float
    theoretical: Optional[float]
    window: tuple[int, int]
    points: int


def min_gap_curve(trace: Sequence[IterateRecord]) -> np.ndarray:
    return np.minimum.accumulate(np.array([r.gap for r in trace], dtype=np.float64))


def rate_slope(curve: Sequence[float], nu: Optional[float] = None, min_length: int = 1000) -> RateSlope:
    """Least-squares slope of ``log(min gap)`` against ``log k`` over the last decade.

    ``theoretical`` is ``-nu / (1 + nu)``, the exponent implied by an
    ``O(eps^(-1 - 1/nu))`` iteration bound; it is an annotation, not a target.
    """
    curve = np.asarray(curve, dtype=np.float64)
    if curve.size < min_length:
        raise InsufficientTrace(f"rate_slope needs at least {min_length} points, got {curve.size}")
    last = curve.size - 1
    lo = max(1, last // 10)
    ks = np.arange(lo, last + 1)
    vals = curve[lo:]
    keep = vals > 0
    if np.count_nonzero(keep) < 2:
        raise InsufficientTrace("fewer than two positive gaps in the final decade")
    slope = float(np.polyfit(np.log(ks[keep]), np.log(vals[keep]), 1)[0])
    theo = None if nu is None else -nu / (1.0 + nu)
    return RateSlope(slope, theo, (int(lo), int(last)), int(np.count_nonzero(keep)))


def rate_report(curves: Mapping[str, tuple[Sequence[float], Optional[float]]]) -> dict:
    """Slopes for several ``name -> (min-gap curve, nu)`` entries; failures are recorded, not raised."""
    out = {}
    for name, (curve, nu) in curves.items():
        try:
            rs = rate_slope(curve, nu)
        except InsufficientTrace as exc:
            out[name] = {"error": str(exc), "nu": nu}
            continue
        out[name] = {
            "slope": rs.slope,
            "theoretical": rs.theoretical,
            "nu": nu,
            "window": list(rs.window),
            "points": rs.points,
        }
    return out
