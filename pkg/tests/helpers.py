"""Shared fixtures: random feasible probes and term factories."""

import numpy as np

from condgrad.lmo import BoxIndicator, ElasticNet, L1BallIndicator, L2BallIndicator, SimplexIndicator


def make_terms(n, r):
    lo = -r.uniform(0.5, 2.0, n)
    return [
        SimplexIndicator(n, 1.5),
        L1BallIndicator(n, 2.0),
        L2BallIndicator(n, 0.7),
        BoxIndicator(lo, lo + r.uniform(0.1, 3.0, n)),
        ElasticNet(n, 0.3, 1.7),
    ]


def feasible_probe(term, r):
    n = term.dim
    if isinstance(term, SimplexIndicator):
        return term.radius * r.dirichlet(np.ones(n))
    if isinstance(term, L1BallIndicator):
        w = r.dirichlet(np.ones(n)) * r.uniform(0, 1)
        return term.radius * w * np.where(r.random(n) < 0.5, -1, 1)
    if isinstance(term, L2BallIndicator):
        z = r.standard_normal(n)
        return term.radius * r.uniform(0, 1) * z / np.linalg.norm(z)
    if isinstance(term, BoxIndicator):
        return r.uniform(term.lower, term.upper)
    return r.standard_normal(n) * 3.0
