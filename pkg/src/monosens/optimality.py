"""Empirical check that proportional covariation minimises the CD distance."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .covariation import Linear, Proportional, Target, Uniform, apply_scheme, others
from .divergence import check_cor4_condition
from .model import MonomialModel
from .oracle import oracle_batch, oracle_varied_distribution

__all__ = ["OptimalityVerdict", "check_cor4_condition", "oracle_varied_distribution",
           "search_schemes", "cd_batch"]

#: a sampled scheme must undercut proportional by more than this to count
BEAT_TOL = 1e-12


@dataclass(frozen=True)
class OptimalityVerdict:
    condition_holds: bool
    violating_atoms: tuple[int, ...]
    proportional_cd: float
    uniform_cd: float
    best_found_cd: float
    best_scheme: str
    best_index: int
    samples_tested: int
    seed: int
    param: int
    value: float

    @property
    def proportional_beaten(self) -> bool:
        return self.best_found_cd < self.proportional_cd - BEAT_TOL

    def to_dict(self) -> dict:
        d = asdict(self)
        d["violating_atoms"] = [y + 1 for y in self.violating_atoms]
        d["param"] = self.param + 1
        d["proportional_beaten"] = self.proportional_beaten
        return d


def cd_batch(model: MonomialModel, thetas: np.ndarray) -> np.ndarray:
    """CD distance from ``model`` to each row of ``thetas``, from full distributions."""
    p = oracle_varied_distribution(model, model.theta)
    ratios = oracle_batch(model, thetas) / p[None, :]
    with np.errstate(divide="ignore"):
        return np.log(ratios.max(axis=1)) - np.log(ratios.min(axis=1))


def search_schemes(model: MonomialModel, target: Target, n_samples: int,
                   seed: int) -> OptimalityVerdict:
    """Compare proportional covariation with uniform and ``n_samples`` random schemes.

    Random schemes hand out the residual mass ``1 - new`` in Dirichlet(1)
    proportions, which covers every way of covarying the block at a fixed
    new value. The minimiser is chosen by value, ties going to the earliest
    candidate (proportional, uniform, then samples in draw order).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    rest = others(model, target)
    t = target.value
    props = rng.dirichlet(np.ones(len(rest)), size=n_samples)
    thetas = np.tile(np.asarray(model.theta, dtype=float), (n_samples + 2, 1))
    thetas[0] = apply_scheme(model, target, Proportional())
    thetas[1] = apply_scheme(model, target, Uniform())
    thetas[2:, target.param] = t
    thetas[2:, rest] = props * (1.0 - t)
    cds = cd_batch(model, thetas)
    best = int(np.argmin(cds))
    if best == 0:
        name = "proportional"
    elif best == 1:
        name = "uniform"
    else:
        name = str(Linear.from_proportions(props[best - 2] / props[best - 2].sum()))
    holds, bad = check_cor4_condition(model, target.block)
    return OptimalityVerdict(
        condition_holds=holds, violating_atoms=bad,
        proportional_cd=float(cds[0]), uniform_cd=float(cds[1]),
        best_found_cd=float(cds[best]), best_scheme=name, best_index=best,
        samples_tested=n_samples, seed=seed, param=target.param, value=t)
