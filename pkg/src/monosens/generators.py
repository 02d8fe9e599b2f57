"""Seeded random staged trees and variations for property tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .covariation import Linear, Proportional, Target, Uniform, feasible_interval, make_target
from .model import MonomialModel
from .tree import Edge, Stage, StagedTree, compile_to_mm


def _simplex(rng, size, floor=0.02):
    while True:
        p = rng.dirichlet(np.full(size, 2.0))
        if p.min() > floor:
            return p


def random_tree(rng: np.random.Generator, max_depth: int = 4, max_atoms: int = 200,
                max_params: int = 30, single_visit_stage: bool = False) -> StagedTree:
    """Random staged tree with depth at most ``max_depth``.

    Depth bounds every exponent of the compiled model by ``max_depth``.
    With ``single_visit_stage`` the first stage only occurs at one depth,
    so no root-to-leaf path meets it twice.
    """
    while True:
        n_stages = int(rng.integers(2, 7))
        sizes = [int(s) for s in rng.integers(2, 5, size=n_stages)]
        while sum(sizes) > max_params:
            sizes.pop()
        special_depth = int(rng.integers(0, max_depth)) if single_visit_stage else None
        vertices, edges = ["r"], []
        members: dict[int, list[str]] = {s: [] for s in range(len(sizes))}
        frontier = [("r", 0)]
        n_leaves = 0
        while frontier:
            v, depth = frontier.pop(0)
            inner = depth == 0 or (depth < max_depth and rng.random() < 0.55)
            if not inner:
                n_leaves += 1
                continue
            if single_visit_stage:
                if depth == special_depth:
                    s = 0 if rng.random() < 0.8 else int(rng.integers(0, len(sizes)))
                else:
                    s = int(rng.integers(1, len(sizes)))
            else:
                s = int(rng.integers(0, len(sizes)))
            members[s].append(v)
            for pos in range(1, sizes[s] + 1):
                child = f"{v}.{pos}"
                vertices.append(child)
                edges.append(Edge(v, child, "", pos))
                frontier.append((child, depth + 1))
        if n_leaves > max_atoms or (single_visit_stage and not members[0]):
            continue
        stages = tuple(
            Stage(f"S{s + 1}", tuple(members[s]), tuple(_simplex(rng, sizes[s])))
            for s in range(len(sizes)) if members[s])
        return StagedTree(tuple(vertices), "r", tuple(edges), stages)


def random_model(rng: np.random.Generator, **kwargs) -> MonomialModel:
    return compile_to_mm(random_tree(rng, **kwargs))


def random_scheme(rng: np.random.Generator, model: MonomialModel, param: int,
                  kinds=("proportional", "uniform", "linear", "linear-full")):
    """Random scheme and a new value inside its feasible interval."""
    block = model.partition[model.block_of(param)]
    m = len(block) - 1
    kind = kinds[int(rng.integers(0, len(kinds)))]
    if kind == "proportional":
        scheme = Proportional()
    elif kind == "uniform":
        scheme = Uniform()
    elif kind == "linear":
        scheme = Linear.from_proportions(_simplex(rng, m, floor=1e-3))
    else:
        # gamma = -u, delta = w with u, w on the simplex; theta_k = w_k - u_k t
        u, w = _simplex(rng, m, 1e-3), _simplex(rng, m, 1e-3)
        scheme = Linear(tuple(-u), tuple(w))
    lo, hi = feasible_interval(model, Target(param, model.block_of(param), 0.5), scheme)
    if hi - lo < 1e-6:
        scheme, lo, hi = Proportional(), 0.0, 1.0
    span = hi - lo
    t = lo + span * (0.01 + 0.98 * rng.random())
    return make_target(model, param, t), scheme
