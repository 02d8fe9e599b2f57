"""Brute-force atomic probabilities used as the reference for every closed form.

Deliberately shares nothing with the model's own evaluator or with the
log-domain block formulas: each atom is the plain product of its powered
parameters.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .model import MonomialModel


def oracle_varied_distribution(model: MonomialModel, theta_varied: Sequence[float]) -> np.ndarray:
    """Atomic probabilities of ``model``'s structure evaluated at ``theta_varied``."""
    theta = np.asarray(theta_varied, dtype=float)
    if theta.shape != (model.k,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({model.k},)")
    return np.prod(np.power(theta[None, :], model.exponents), axis=1)


def oracle_batch(model: MonomialModel, thetas: np.ndarray) -> np.ndarray:
    """Row ``s`` holds the atomic probabilities at ``thetas[s]``."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 2 or thetas.shape[1] != model.k:
        raise ValueError(f"thetas has shape {thetas.shape}, expected (n, {model.k})")
    return np.prod(np.power(thetas[:, None, :], model.exponents[None, :, :]), axis=2)
