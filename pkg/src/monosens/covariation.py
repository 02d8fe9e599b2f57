"""Covariation schemes: fix one parameter, redistribute the rest of its block."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .model import EPS, SUM_TOL, MonomialModel, check_theta


class InfeasibleVariation(ValueError):
    """A scheme would push some parameter outside (0, 1) or break sum-to-one."""


class Target(NamedTuple):
    """Parameter ``param`` (0-based) of block ``block`` moved to ``value``."""

    param: int
    block: int
    value: float


def make_target(model: MonomialModel, param: int, value: float) -> Target:
    if not 0 <= param < model.k:
        raise IndexError(f"parameter index {param} out of range 0..{model.k - 1}")
    value = float(value)
    if not EPS < value < 1 - EPS:
        raise InfeasibleVariation(f"new value {value!r} is not in (0, 1)")
    return Target(param, model.block_of(param), value)


@dataclass(frozen=True)
class Proportional:
    name = "proportional"

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Uniform:
    name = "uniform"

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Linear:
    """``theta_k <- gamma_k * new + delta_k`` for the other parameters of the block.

    ``gamma`` and ``delta`` are ordered like the block's remaining indices
    in ascending order.
    """

    gamma: tuple[float, ...]
    delta: tuple[float, ...]

    name = "linear"

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        object.__setattr__(self, "delta", tuple(float(d) for d in self.delta))
        if len(self.gamma) != len(self.delta):
            raise ValueError("gamma and delta must have equal length")

    @classmethod
    def from_proportions(cls, delta: Sequence[float]) -> "Linear":
        """Scheme giving share ``delta_k`` of the residual mass to each parameter."""
        delta = tuple(float(d) for d in delta)
        if abs(sum(delta) - 1.0) > SUM_TOL:
            raise ValueError(f"proportions sum to {sum(delta)!r}, not 1")
        if any(d <= 0 for d in delta):
            raise ValueError("proportions must be positive")
        return cls(tuple(-d for d in delta), delta)

    @property
    def is_mass_proportion(self) -> bool:
        return all(g == -d for g, d in zip(self.gamma, self.delta))

    def __str__(self):
        if self.is_mass_proportion:
            return "linear:" + ",".join(f"{d:.12g}" for d in self.delta)
        return ("linear-full:" + ",".join(f"{g:.12g}" for g in self.gamma)
                + ";" + ",".join(f"{d:.12g}" for d in self.delta))


Scheme = Union[Proportional, Uniform, Linear]


def parse_scheme(text: str) -> Scheme:
    """``proportional``, ``uniform``, ``linear:d1,d2,..`` or ``linear-full:g..;d..``."""
    text = text.strip()
    if text == "proportional":
        return Proportional()
    if text == "uniform":
        return Uniform()
    if text.startswith("linear:"):
        return Linear.from_proportions([float(x) for x in text[7:].split(",")])
    if text.startswith("linear-full:"):
        try:
            g, d = text[12:].split(";")
        except ValueError:
            raise ValueError(f"expected 'linear-full:g1,..;d1,..', got {text!r}") from None
        return Linear([float(x) for x in g.split(",")], [float(x) for x in d.split(",")])
    raise ValueError(f"unknown scheme {text!r}")


def others(model: MonomialModel, target: Target) -> list[int]:
    """Indices of the block that covary with the target parameter."""
    return [k for k in model.partition[target.block] if k != target.param]


def scheme_as_linear(model: MonomialModel, target: Target, scheme: Scheme,
                     theta: Sequence[float] | None = None) -> Linear:
    """Express a proportional or uniform scheme as linear coefficients."""
    theta = model.theta if theta is None else theta
    rest = others(model, target)
    if isinstance(scheme, Linear):
        return scheme
    if isinstance(scheme, Proportional):
        denom = 1.0 - theta[target.param]
        ratios = [theta[k] / denom for k in rest]
        return Linear([-r for r in ratios], ratios)
    share = 1.0 / len(rest)
    return Linear([-share] * len(rest), [share] * len(rest))


class LinearCheck(NamedTuple):
    valid: bool
    violations: list[str]


def validate_linear(gamma: Sequence[float], delta: Sequence[float],
                    new_value: float | None = None) -> LinearCheck:
    """Check that an affine scheme keeps the block summing to one for every new value.

    The identity ``new + sum(gamma*new + delta) == 1`` holds for all ``new``
    iff ``sum(gamma) == -1`` and ``sum(delta) == 1``. If ``new_value`` is
    given, the covaried values are also checked to lie in (0, 1).
    """
    bad = []
    if len(gamma) != len(delta):
        bad.append(f"gamma has {len(gamma)} entries, delta has {len(delta)}")
        return LinearCheck(False, bad)
    if abs(sum(gamma) + 1.0) > SUM_TOL:
        bad.append(f"sum(gamma) = {sum(gamma)!r}, expected -1")
    if abs(sum(delta) - 1.0) > SUM_TOL:
        bad.append(f"sum(delta) = {sum(delta)!r}, expected 1")
    if new_value is not None:
        for n, (g, d) in enumerate(zip(gamma, delta)):
            v = g * new_value + d
            if not EPS < v < 1 - EPS:
                bad.append(f"coefficient pair {n + 1} gives {v!r} outside (0, 1) at {new_value!r}")
    return LinearCheck(not bad, bad)


def feasible_interval(model: MonomialModel, target: Target, scheme: Scheme) -> tuple[float, float]:
    """Open interval of new values for which the scheme stays inside (0, 1)."""
    if not isinstance(scheme, Linear):
        return (0.0, 1.0)
    lo, hi = 0.0, 1.0
    for g, d in zip(scheme.gamma, scheme.delta):
        # need 0 < g*t + d < 1
        if g > 0:
            lo, hi = max(lo, -d / g), min(hi, (1 - d) / g)
        elif g < 0:
            lo, hi = max(lo, (1 - d) / g), min(hi, -d / g)
        elif not 0 < d < 1:
            return (0.0, 0.0)
    return (lo, hi) if lo < hi else (0.0, 0.0)


def apply_scheme(model: MonomialModel, target: Target, scheme: Scheme,
                 theta: Sequence[float] | None = None) -> np.ndarray:
    """Covaried parameter vector; parameters outside the target block are untouched.

    Raises
    ------
    InfeasibleVariation
        If any covaried value falls outside (0, 1) or the block no longer sums to one.
    """
    base = np.array(model.theta if theta is None else theta, dtype=float)
    rest = others(model, target)
    t = target.value
    new = base.copy()
    new[target.param] = t
    if isinstance(scheme, Proportional):
        new[rest] = base[rest] * ((1.0 - t) / (1.0 - base[target.param]))
    elif isinstance(scheme, Uniform):
        new[rest] = (1.0 - t) / len(rest)
    elif isinstance(scheme, Linear):
        if len(scheme.gamma) != len(rest):
            raise InfeasibleVariation(
                f"linear scheme has {len(scheme.gamma)} coefficients, block needs {len(rest)}")
        new[rest] = np.asarray(scheme.gamma) * t + np.asarray(scheme.delta)
    else:
        raise TypeError(f"unsupported scheme {scheme!r}")
    for k in rest:
        if not EPS < new[k] < 1 - EPS:
            raise InfeasibleVariation(
                f"{scheme} at {t!r} sets parameter {k + 1} to {new[k]!r}")
    s = float(new[list(model.partition[target.block])].sum())
    if abs(s - 1.0) > SUM_TOL:
        raise InfeasibleVariation(f"{scheme} at {t!r} leaves the block summing to {s!r}")
    return check_theta(new, model.partition)
