"""CD distance and phi-divergences between an original and a covaried model.

All logarithms are natural. Every measure has a full route, summing or
maximising over all atoms of brute-force distributions, and a block route
that only looks at atoms touching the varied block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .covariation import (
    InfeasibleVariation,
    Linear,
    Proportional,
    Scheme,
    Target,
    Uniform,
    apply_scheme,
    make_target,
    others,
)
from .model import MonomialModel, support_split
from .oracle import oracle_varied_distribution


class ConditionError(ValueError):
    """The exponent condition for the single-block CD closed form fails."""

    def __init__(self, message, atoms=()):
        super().__init__(message)
        self.atoms = tuple(atoms)


@dataclass(frozen=True)
class PhiFunction:
    """Convex ``phi`` with ``phi(1) == 0``; ``limit`` is ``lim phi(x)/x`` as x grows."""

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    limit: float

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def term(self, p: np.ndarray, p_tilde: np.ndarray) -> np.ndarray:
        """Elementwise ``p * phi(p_tilde / p)`` with the zero-mass conventions."""
        p = np.asarray(p, dtype=float)
        p_tilde = np.asarray(p_tilde, dtype=float)
        out = np.zeros(np.broadcast(p, p_tilde).shape)
        pos = p > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            out[pos] = p[pos] * self(p_tilde[pos] / p[pos])
        lone = ~pos & (p_tilde > 0)
        out[lone] = p_tilde[lone] * self.limit
        return out

    @classmethod
    def custom(cls, name: str, func, limit: float, grid=None, tol: float = 1e-9) -> "PhiFunction":
        """Wrap a user map after spot-checking ``phi(1) == 0`` and convexity on a grid."""
        phi = cls(name, func, float(limit))
        if abs(float(phi(1.0))) > 1e-12:
            raise ValueError(f"{name}: phi(1) = {float(phi(1.0))!r}, expected 0")
        xs = np.linspace(0.01, 10.0, 1000) if grid is None else np.asarray(grid, dtype=float)
        v = phi(xs)
        # convexity on an equispaced grid: nonnegative second differences
        d2 = v[2:] - 2 * v[1:-1] + v[:-2]
        if (d2 < -tol * np.maximum(1.0, np.abs(v[1:-1]))).any():
            raise ValueError(f"{name}: not convex on the check grid")
        return phi


def _xlogx(x):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def _neglog(x):
    with np.errstate(divide="ignore"):
        return -np.log(x)


KL = PhiFunction("kl", _xlogx, np.inf)
INVERSE_KL = PhiFunction("inv-kl", _neglog, 0.0)
TOTAL_VARIATION = PhiFunction("tv", lambda x: np.abs(x - 1.0) / 2.0, 0.5)
CHI2 = PhiFunction("chi2", lambda x: (x - 1.0) ** 2, np.inf)

PHI = {phi.name: phi for phi in (KL, INVERSE_KL, TOTAL_VARIATION, CHI2)}
MEASURES = ("cd",) + tuple(PHI)


class DivergenceReport(NamedTuple):
    value: float
    argmax: int | None = None
    argmin: int | None = None
    path: str = "brute-force"


def _check_shape(model: MonomialModel, theta_varied) -> np.ndarray:
    theta = np.asarray(theta_varied, dtype=float)
    if theta.shape != model.theta.shape:
        raise ValueError(f"varied theta has shape {theta.shape}, model has {model.theta.shape}")
    return theta


def cd_from_ratios(ratios: np.ndarray) -> DivergenceReport:
    hi, lo = int(np.argmax(ratios)), int(np.argmin(ratios))
    return DivergenceReport(float(np.log(ratios[hi]) - np.log(ratios[lo])), hi, lo)


def cd_distance_full(model: MonomialModel, theta_varied: Sequence[float]) -> DivergenceReport:
    """CD distance over all atoms from brute-force distributions."""
    theta = _check_shape(model, theta_varied)
    p = oracle_varied_distribution(model, model.theta)
    p_tilde = oracle_varied_distribution(model, theta)
    return cd_from_ratios(p_tilde / p)


def block_log_ratios(model: MonomialModel, target: Target, scheme: Scheme) -> tuple[np.ndarray, tuple[int, ...]]:
    """Log of varied/original probability for each atom touching the target block.

    Uses the scheme-specific per-atom forms, so only the block's parameters,
    the new value and the scheme coefficients enter.
    """
    _, affected = support_split(model, target.block)
    A = model.exponents[list(affected)]
    theta = model.theta
    i = target.param
    t = target.value
    rest = others(model, target)
    a_i = A[:, i].astype(float)
    a_rest = A[:, rest].astype(float)
    if isinstance(scheme, Proportional):
        out = a_i * np.log(t / theta[i]) + a_rest.sum(axis=1) * np.log((1 - t) / (1 - theta[i]))
    elif isinstance(scheme, Uniform):
        share = (1 - t) / len(rest)
        out = (a_i * (np.log(t) - np.log(theta[i]))
               + a_rest @ (np.log(share) - np.log(theta[rest])))
    elif isinstance(scheme, Linear):
        vals = np.asarray(scheme.gamma) * t + np.asarray(scheme.delta)
        if len(vals) != len(rest) or (vals <= 0).any() or (vals >= 1).any():
            raise InfeasibleVariation(f"{scheme} infeasible at {t!r}")
        out = a_i * np.log(t / theta[i]) + a_rest @ (np.log(vals) - np.log(theta[rest]))
    else:
        raise TypeError(f"unsupported scheme {scheme!r}")
    return out, affected


def cd_distance_block(model: MonomialModel, target: Target, scheme: Scheme) -> DivergenceReport:
    """CD distance using only the atoms and parameters of the varied block."""
    apply_scheme(model, target, scheme)  # feasibility
    logs, affected = block_log_ratios(model, target, scheme)
    hi, lo = int(np.argmax(logs)), int(np.argmin(logs))
    return DivergenceReport(float(logs[hi] - logs[lo]), affected[hi], affected[lo], "closed-form")


def check_cor4_condition(model: MonomialModel, block: int) -> tuple[bool, tuple[int, ...]]:
    """Whether every atom touching ``block`` has block exponent sum exactly one.

    Returns the verdict and the atoms that violate it.
    """
    _, affected = support_split(model, block)
    sums = model.exponents[list(affected)][:, list(model.partition[block])].sum(axis=1)
    bad = tuple(y for y, s in zip(affected, sums) if s > 1)
    return not bad, bad


def cd_corollary4(model: MonomialModel, target: Target, scheme: Scheme) -> DivergenceReport:
    """Single-block closed form of the CD distance.

    Valid only when every atom involving the varied block uses exactly one
    of its parameters once; then the distance equals the CD distance
    between the block's own distributions.
    """
    ok, bad = check_cor4_condition(model, target.block)
    if not ok:
        y = bad[0]
        raise ConditionError(
            f"atom {y + 1} ({model.labels[y]}) has block exponent sum "
            f"{int(model.exponents[y, list(model.partition[target.block])].sum())} > 1", bad)
    theta_t = apply_scheme(model, target, scheme)
    theta = model.theta
    i, t = target.param, target.value
    rest = others(model, target)
    r_i = t / theta[i]
    if isinstance(scheme, Proportional):
        value = abs(np.log(r_i) - np.log((1 - t) / (1 - theta[i])))
    elif isinstance(scheme, Uniform):
        m = len(rest)
        th = theta[rest]
        value = (np.log(max(r_i, (1 - t) / (m * th.min())))
                 - np.log(min(r_i, (1 - t) / (m * th.max()))))
    elif isinstance(scheme, Linear) and scheme.is_mass_proportion:
        scaled = theta[rest] / np.asarray(scheme.delta)
        value = (np.log(max(r_i, (1 - t) / scaled.min()))
                 - np.log(min(r_i, (1 - t) / scaled.max())))
    else:
        block = list(model.partition[target.block])
        r = theta_t[block] / theta[block]
        value = np.log(r.max()) - np.log(r.min())
    # report extremal atoms via the block parameter achieving each extreme
    block = list(model.partition[target.block])
    r = theta_t[block] / theta[block]
    atoms = []
    for k in (block[int(np.argmax(r))], block[int(np.argmin(r))]):
        atoms.append(int(np.flatnonzero(model.exponents[:, k])[0]))
    return DivergenceReport(float(value), atoms[0], atoms[1], "closed-form")


def phi_divergence_full(model: MonomialModel, theta_varied: Sequence[float],
                        phi: PhiFunction) -> DivergenceReport:
    """``sum_y P(y) phi(P~(y)/P(y))`` over all atoms."""
    theta = _check_shape(model, theta_varied)
    p = oracle_varied_distribution(model, model.theta)
    p_tilde = oracle_varied_distribution(model, theta)
    return DivergenceReport(float(phi.term(p, p_tilde).sum()))


def phi_divergence_block(model: MonomialModel, target: Target, scheme: Scheme,
                         phi: PhiFunction) -> DivergenceReport:
    """phi-divergence summed only over atoms touching the varied block."""
    apply_scheme(model, target, scheme)
    logs, affected = block_log_ratios(model, target, scheme)
    p = model.probabilities()[list(affected)]
    return DivergenceReport(float((p * phi(np.exp(logs))).sum()), path="closed-form")


def measure_value(model: MonomialModel, target: Target, scheme: Scheme, measure: str) -> float:
    if measure == "cd":
        return cd_distance_block(model, target, scheme).value
    try:
        phi = PHI[measure]
    except KeyError:
        raise ValueError(f"unknown measure {measure!r}; choose from {', '.join(MEASURES)}") from None
    return phi_divergence_block(model, target, scheme, phi).value


class DivergenceRow(NamedTuple):
    theta_tilde: float
    scheme: str
    measure: str
    value: float | None


def divergence_sweep(model: MonomialModel, param: int, schemes: Iterable[Scheme],
                     measures: Iterable[str], grid: Sequence[float]) -> list[DivergenceRow]:
    """Rows ordered by scheme, then measure, then grid point; infeasible points give ``None``."""
    grid = list(grid)
    if not grid:
        raise ValueError("empty grid")
    measures = list(measures)
    for m in measures:
        if m not in MEASURES:
            raise ValueError(f"unknown measure {m!r}; choose from {', '.join(MEASURES)}")
    rows = []
    for scheme in schemes:
        for m in measures:
            for t in grid:
                try:
                    value = measure_value(model, make_target(model, param, t), scheme, m)
                except InfeasibleVariation:
                    value = None
                rows.append(DivergenceRow(float(t), str(scheme), m, value))
    return rows
