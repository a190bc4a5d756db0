"""Experiment configuration files.

Configs are YAML documents; see the README for the full grammar. Every random
array is drawn from its own PCG64 stream seeded with ``(seed, crc32(path))``,
where ``path`` is the dotted location of the array in the config (for example
``problem.smooth.A``). Streams therefore do not depend on the order in which
fields are processed.
"""

from __future__ import annotations

import csv
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import yaml

from .core import ConstantP, HarmonicToOne, NmConfig, PfConfig, Problem
from .errors import ConfigError, CondGradError
from .lmo import BoxIndicator, ElasticNet, L1BallIndicator, L2BallIndicator, NonsmoothTerm, SimplexIndicator
from .smooth import Logistic, NonHolderWell, PPowerResidual, Quadratic, SmoothOracle

ALGORITHMS = ("nm", "pf")
X0_PRESETS = ("ones", "zeros", "vertex", "center")


@dataclass
class ExperimentConfig:
    name: str
    seed: int
    algorithm: str
    problem: Problem
    x0: np.ndarray
    solver: Union[NmConfig, PfConfig]
    output: str
    f_star: Optional[float] = None
    timing: bool = False
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def nu(self) -> Optional[float]:
        return self.problem.smooth.nu


def read_yaml(path: Union[str, Path]) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"{path}: YAML syntax error at {where}: {exc.problem}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: YAML error: {exc}") from exc


def load_config(
    path: Union[str, Path],
    seed: Optional[int] = None,
    max_iters: Optional[int] = None,
) -> ExperimentConfig:
    """Read and build an experiment; ``seed``/``max_iters`` override the file."""
    path = Path(path)
    raw = read_yaml(path)
    return build_experiment(raw, base_dir=path.parent, seed=seed, max_iters=max_iters, source=str(path))


def build_experiment(
    raw: Any,
    base_dir: Union[str, Path] = ".",
    seed: Optional[int] = None,
    max_iters: Optional[int] = None,
    source: str = "<config>",
) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    b = _Builder(raw, Path(base_dir), source, seed)
    try:
        return b.build(max_iters)
    except ConfigError:
        raise
    except (CondGradError, ValueError, TypeError) as exc:
        # constructor validation failures, tagged with the field being built
        raise ConfigError(f"{source}: {b.where}: {exc}") from exc


class _Builder:
    def __init__(self, raw: dict, base_dir: Path, source: str, seed: Optional[int]):
        self.raw = raw
        self.base_dir = base_dir
        self.source = source
        self.where = "<top>"
        file_seed = raw.get("seed", 0)
        self.seed = int(file_seed if seed is None else seed)
        if self.seed < 0 or self.seed >= 2**64:
            self.fail("seed", "must be an unsigned 64-bit integer")

    def fail(self, path: str, msg: str):
        raise ConfigError(f"{self.source}: {path}: {msg}")

    def require(self, mapping: dict, key: str, path: str):
        if not isinstance(mapping, dict) or key not in mapping:
            self.fail(f"{path}.{key}" if path else key, "missing required field")
        return mapping[key]

    # -- arrays -------------------------------------------------------------

    def rng(self, path: str) -> np.random.Generator:
        ss = np.random.SeedSequence([self.seed, zlib.crc32(path.encode())])
        return np.random.Generator(np.random.PCG64(ss))

    def array(self, spec: Any, path: str, ndim: Optional[int] = None, context: Optional[dict] = None) -> np.ndarray:
        self.where = path
        if isinstance(spec, dict):
            if "csv" in spec:
                arr = self._csv(spec["csv"], path)
            elif "random" in spec:
                arr = self._random(spec["random"], path)
            elif "planted" in spec:
                arr = self._planted(spec["planted"], path, context or {})
            else:
                self.fail(path, f"unknown array form {sorted(spec)}; expected a list, csv, random or planted")
        else:
            try:
                arr = np.array(spec, dtype=np.float64)
            except (TypeError, ValueError):
                self.fail(path, "expected a number, list or nested list of numbers")
        if ndim == 1 and arr.ndim == 0:
            arr = arr.reshape(1)
        if ndim is not None and arr.ndim != ndim:
            self.fail(path, f"expected a {ndim}-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            self.fail(path, "entries must be finite")
        return arr

    def _csv(self, name: Any, path: str) -> np.ndarray:
        file = self.base_dir / str(name)
        try:
            with open(file, newline="") as fh:
                rows = [row for row in csv.reader(fh) if row and not row[0].lstrip().startswith("#")]
            return np.array([[float(v) for v in row] for row in rows], dtype=np.float64).squeeze()
        except OSError as exc:
            self.fail(path, f"cannot read CSV {file} ({exc.strerror})")
        except ValueError as exc:
            self.fail(path, f"malformed CSV {file}: {exc}")

    def _random(self, spec: Any, path: str) -> np.ndarray:
        if not isinstance(spec, dict):
            self.fail(path, "random needs a mapping with 'dist'")
        dist = spec.get("dist", "normal")
        rng = self.rng(path)
        if dist == "spd":
            n = int(self.require(spec, "dim", f"{path}.random"))
            lo, hi = float(spec.get("min_eig", 1.0)), float(spec.get("max_eig", 1.0))
            if not 0 <= lo <= hi:
                self.fail(path, "spd needs 0 <= min_eig <= max_eig")
            rank = int(spec.get("rank", n))
            if not 0 <= rank <= n:
                self.fail(f"{path}.random.rank", f"must lie in [0, {n}]")
            U, _ = np.linalg.qr(rng.standard_normal((n, n)))
            eig = np.zeros(n)
            eig[:rank] = np.linspace(lo, hi, rank)
            Q = (U * eig) @ U.T
            return 0.5 * (Q + Q.T)
        shape = spec.get("shape")
        if shape is None:
            self.fail(f"{path}.random.shape", "missing required field")
        shape = tuple(int(s) for s in (shape if isinstance(shape, list) else [shape]))
        if dist == "normal":
            return float(spec.get("loc", 0.0)) + float(spec.get("scale", 1.0)) * rng.standard_normal(shape)
        if dist == "uniform":
            return rng.uniform(float(spec.get("low", 0.0)), float(spec.get("high", 1.0)), shape)
        if dist == "signs":
            return np.where(rng.random(shape) < 0.5, -1.0, 1.0)
        self.fail(f"{path}.random.dist", f"unknown distribution {dist!r} (normal, uniform, signs, spd)")

    def _planted(self, spec: Any, path: str, context: dict) -> np.ndarray:
        if "A" not in context:
            self.fail(path, "planted vectors need a matrix A in the same smooth term")
        x = self.array(spec, f"{path}.planted", ndim=1)
        A = context["A"]
        if x.size != A.shape[1]:
            self.fail(path, f"planted vector has length {x.size}, A has {A.shape[1]} columns")
        z = A @ x
        if context.get("kind") == "logistic":
            return np.where(z >= 0.0, 1.0, -1.0)
        return z

    # -- terms --------------------------------------------------------------

    def smooth(self, spec: Any, dim_hint: Optional[int]) -> SmoothOracle:
        path = "problem.smooth"
        kind = self.require(spec, "kind", path)
        self.where = path
        if kind == "quadratic":
            Q = self.array(self.require(spec, "Q", path), f"{path}.Q", ndim=2)
            q = self.array(spec.get("q", [0.0] * Q.shape[0]), f"{path}.q", ndim=1)
            self.where = path
            return Quadratic(Q, q)
        if kind in ("ppower", "logistic"):
            A = self.array(self.require(spec, "A", path), f"{path}.A", ndim=2)
            ctx = {"A": A, "kind": kind}
            if kind == "ppower":
                b = self.array(self.require(spec, "b", path), f"{path}.b", ndim=1, context=ctx)
                self.where = path
                return PPowerResidual(A, b, float(spec.get("pexp", 2.0)))
            y = self.array(self.require(spec, "y", path), f"{path}.y", ndim=1, context=ctx)
            self.where = path
            return Logistic(A, y)
        if kind == "nonholder":
            if dim_hint is None:
                self.fail("problem.dim", "required for the nonholder smooth term")
            return NonHolderWell(dim_hint, a=float(spec.get("a", math.exp(-2.0))), m=float(spec.get("m", 1.0)))
        self.fail(f"{path}.kind", f"unknown smooth kind {kind!r} (quadratic, ppower, logistic, nonholder)")

    def nonsmooth(self, spec: Any, dim: int) -> NonsmoothTerm:
        path = "problem.nonsmooth"
        kind = self.require(spec, "kind", path)
        self.where = path
        if kind in ("simplex", "l1ball", "l2ball"):
            cls = {"simplex": SimplexIndicator, "l1ball": L1BallIndicator, "l2ball": L2BallIndicator}[kind]
            return cls(dim, float(spec.get("radius", 1.0)))
        if kind == "box":
            lo = self.array(self.require(spec, "lower", path), f"{path}.lower", ndim=1)
            hi = self.array(self.require(spec, "upper", path), f"{path}.upper", ndim=1)
            if lo.size == 1 and dim > 1:
                lo = np.full(dim, lo[0])
            if hi.size == 1 and dim > 1:
                hi = np.full(dim, hi[0])
            self.where = path
            return BoxIndicator(lo, hi)
        if kind == "elasticnet":
            return ElasticNet(dim, float(spec.get("l1", 0.0)), float(self.require(spec, "l2", path)))
        self.fail(f"{path}.kind", f"unknown nonsmooth kind {kind!r} (simplex, l1ball, l2ball, box, elasticnet)")

    def x0(self, spec: Any, g: NonsmoothTerm) -> np.ndarray:
        n = g.dim
        if isinstance(spec, str):
            if spec == "ones":
                return np.ones(n)
            if spec == "zeros":
                return np.zeros(n)
            if spec == "vertex":
                if isinstance(g, BoxIndicator):
                    return g.lower.copy()
                if isinstance(g, ElasticNet):
                    return np.zeros(n)
                v = np.zeros(n)
                v[0] = g.radius
                return v
            if spec == "center":
                if isinstance(g, SimplexIndicator):
                    return np.full(n, g.radius / n)
                if isinstance(g, BoxIndicator):
                    return 0.5 * (g.lower + g.upper)
                return np.zeros(n)
            self.fail("x0", f"unknown preset {spec!r} ({', '.join(X0_PRESETS)})")
        x0 = self.array(spec, "x0", ndim=1)
        if x0.size != n:
            self.fail("x0", f"has length {x0.size}, problem dimension is {n}")
        return x0

    def solver(self, algorithm: str, params: Any, max_iters: Optional[int]):
        path = "params"
        if params is None:
            params = {}
        if not isinstance(params, dict):
            self.fail(path, "must be a mapping")
        params = dict(params)
        if max_iters is not None:
            params["max_iters"] = max_iters
        allowed = (
            {"beta", "sigma", "p", "pk_schedule", "gap_tol", "max_iters", "max_backtracks"}
            if algorithm == "nm"
            else {"l_init", "gap_tol", "max_iters", "max_backtracks"}
        )
        unknown = sorted(set(params) - allowed)
        if unknown:
            self.fail(f"{path}.{unknown[0]}", f"not a parameter of algorithm {algorithm!r}")
        self.where = path
        kwargs: dict[str, Any] = {}
        for key, value in params.items():
            if key == "pk_schedule":
                kwargs[key] = self.schedule(value)
            elif key in ("max_iters", "max_backtracks"):
                # PyYAML reads 1e5 as a string, so go through float
                try:
                    num = float(value)
                except (TypeError, ValueError):
                    num = math.nan
                if isinstance(value, bool) or not num.is_integer():
                    self.fail(f"{path}.{key}", f"must be an integer, got {value!r}")
                kwargs[key] = int(num)
            else:
                try:
                    kwargs[key] = float(value)
                except (TypeError, ValueError):
                    self.fail(f"{path}.{key}", f"expected a number, got {value!r}")
        return NmConfig(**kwargs) if algorithm == "nm" else PfConfig(**kwargs)

    def schedule(self, spec: Any):
        path = "params.pk_schedule"
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            return ConstantP(float(spec))
        kind = self.require(spec, "kind", path)
        if kind == "constant":
            return ConstantP(float(self.require(spec, "value", path)))
        if kind == "harmonic":
            return HarmonicToOne()
        self.fail(f"{path}.kind", f"unknown schedule {kind!r} (constant, harmonic)")

    def build(self, max_iters: Optional[int]) -> ExperimentConfig:
        raw = self.raw
        name = str(self.require(raw, "name", ""))
        algorithm = self.require(raw, "algorithm", "")
        if algorithm not in ALGORITHMS:
            self.fail("algorithm", f"must be one of {ALGORITHMS}, got {algorithm!r}")
        pspec = self.require(raw, "problem", "")
        dim = pspec.get("dim") if isinstance(pspec, dict) else None
        if dim is not None and (isinstance(dim, bool) or int(dim) != dim or dim < 1):
            self.fail("problem.dim", "must be a positive integer")
        f = self.smooth(self.require(pspec, "smooth", "problem"), None if dim is None else int(dim))
        if dim is not None and int(dim) != f.dim:
            self.fail("problem.dim", f"is {dim} but the smooth term has dimension {f.dim}")
        g = self.nonsmooth(self.require(pspec, "nonsmooth", "problem"), f.dim)
        self.where = "problem"
        problem = Problem(f, g)
        x0 = self.x0(self.require(raw, "x0", ""), g)
        solver = self.solver(algorithm, raw.get("params"), max_iters)
        f_star = raw.get("f_star")
        return ExperimentConfig(
            name=name,
            seed=self.seed,
            algorithm=algorithm,
            problem=problem,
            x0=x0,
            solver=solver,
            output=str(raw.get("output", name)),
            f_star=None if f_star is None else float(f_star),
            timing=bool(raw.get("timing", False)),
            raw=raw,
        )
