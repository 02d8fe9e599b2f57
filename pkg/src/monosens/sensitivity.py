"""Sensitivity functions: event probabilities as polynomials in the varied parameter."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .covariation import (
    InfeasibleVariation,
    Linear,
    Proportional,
    Scheme,
    Target,
    Uniform,
    apply_scheme,
    feasible_interval,
    make_target,
    others,
)
from .model import MonomialModel, block_exponent_sum, check_event, event_probability

#: coefficients below this fraction of the largest one do not count towards the degree
DEGREE_RTOL = 1e-12


def affine_power(gamma: float, delta: float, m: int) -> np.ndarray:
    """Coefficients (ascending powers) of ``(gamma*t + delta)**m``."""
    return np.array([comb(m, r) * gamma ** r * delta ** (m - r) for r in range(m + 1)])


@dataclass(frozen=True)
class SensitivityPolynomial:
    """Univariate polynomial in the new value of the varied parameter.

    ``coef[r]`` multiplies ``t**r``. Evaluation is restricted to the open
    feasibility interval of the scheme that produced it.
    """

    coef: np.ndarray
    interval: tuple[float, float] = (0.0, 1.0)
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def degree(self) -> int:
        c = np.abs(self.coef)
        if not c.size or c.max() == 0:
            return 0
        nz = np.flatnonzero(c > DEGREE_RTOL * c.max())
        return int(nz[-1])

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        lo, hi = self.interval
        if ((t_arr <= lo) | (t_arr >= hi)).any():
            raise InfeasibleVariation(f"{t!r} outside feasible interval ({lo!r}, {hi!r})")
        return np.polynomial.polynomial.polyval(t_arr, self.coef)


@dataclass(frozen=True)
class RationalSensitivity:
    numerator: SensitivityPolynomial
    denominator: SensitivityPolynomial

    @property
    def interval(self):
        return self.numerator.interval

    def __call__(self, t):
        return self.numerator(t) / self.denominator(t)


def sensitivity_value(model: MonomialModel, event: Iterable[int], target: Target,
                      scheme: Scheme) -> float:
    """Probability of ``event`` after covarying with ``scheme`` at ``target``."""
    varied = model.with_theta(apply_scheme(model, target, scheme))
    return event_probability(varied, event)


def _atom_polynomial(model: MonomialModel, y: int, target: Target, scheme: Scheme) -> np.ndarray:
    row = model.exponents[y]
    theta = model.theta
    block = model.partition[target.block]
    rest = others(model, target)
    const = 1.0
    for i in np.flatnonzero(row):
        if i not in block:
            const *= theta[i] ** int(row[i])
    poly = np.zeros(int(row[target.param]) + 1)
    poly[-1] = const
    m = int(row[rest].sum())
    if isinstance(scheme, Proportional):
        scale = 1.0
        for k in rest:
            scale *= theta[k] ** int(row[k])
        scale /= (1.0 - theta[target.param]) ** m
        poly = np.convolve(poly, scale * affine_power(-1.0, 1.0, m))
    elif isinstance(scheme, Uniform):
        share = 1.0 / len(rest)
        poly = np.convolve(poly, affine_power(-share, share, m))
    elif isinstance(scheme, Linear):
        if len(scheme.gamma) != len(rest):
            raise InfeasibleVariation(
                f"linear scheme has {len(scheme.gamma)} coefficients, block needs {len(rest)}")
        for k, g, d in zip(rest, scheme.gamma, scheme.delta):
            if row[k]:
                poly = np.convolve(poly, affine_power(g, d, int(row[k])))
    else:
        raise TypeError(f"no closed form for scheme {scheme!r}")
    return poly


def sensitivity_polynomial(model: MonomialModel, event: Iterable[int], target: Target,
                           scheme: Scheme, allow_empty: bool = False) -> SensitivityPolynomial:
    """Expand the sensitivity function of ``event`` into explicit coefficients."""
    ev = check_event(model, event, allow_empty=allow_empty)
    coef = np.zeros(1)
    for y in ev:
        term = _atom_polynomial(model, y, target, scheme)
        if term.size > coef.size:
            coef = np.pad(coef, (0, term.size - coef.size))
        coef[: term.size] += term
    return SensitivityPolynomial(
        coef, feasible_interval(model, target, scheme),
        {"event": ev, "param": target.param, "scheme": str(scheme)})


def degree_bound(model: MonomialModel, event: Iterable[int], block: int) -> int:
    """Largest block exponent sum over the atoms of ``event``."""
    return max(block_exponent_sum(model, y, block) for y in check_event(model, event))


def conditional_sensitivity(model: MonomialModel, event: Iterable[int], given: Iterable[int],
                            target: Target, scheme: Scheme) -> RationalSensitivity:
    """Sensitivity of P(event | given) as a ratio of two polynomials."""
    given = check_event(model, given)
    joint = set(check_event(model, event, allow_empty=True)) & set(given)
    return RationalSensitivity(
        sensitivity_polynomial(model, joint, target, scheme, allow_empty=True),
        sensitivity_polynomial(model, given, target, scheme))


def default_grid(n: int = 199) -> np.ndarray:
    """``n`` equispaced interior points of (0, 1)."""
    if n < 1:
        raise ValueError("grid needs at least one point")
    return np.arange(1, n + 1) / (n + 1)


class SweepRow(NamedTuple):
    theta_tilde: float
    value: float | None


def sweep(model: MonomialModel, event: Iterable[int], param: int, scheme: Scheme,
          grid: Sequence[float], given: Iterable[int] | None = None) -> list[SweepRow]:
    """Evaluate the sensitivity function along ``grid``; infeasible points give ``None``."""
    grid = list(grid)
    if not grid:
        raise ValueError("empty grid")
    ev = check_event(model, event, allow_empty=given is not None)
    cond = None if given is None else check_event(model, given)
    rows = []
    for t in grid:
        try:
            target = make_target(model, param, t)
            if cond is None:
                value = sensitivity_value(model, ev, target, scheme)
            else:
                joint = set(ev) & set(cond)
                num = sensitivity_value(model, joint, target, scheme) if joint else 0.0
                value = num / sensitivity_value(model, cond, target, scheme)
        except InfeasibleVariation:
            value = None
        rows.append(SweepRow(float(t), value))
    return rows
