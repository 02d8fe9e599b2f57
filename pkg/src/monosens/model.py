"""Monomial models: exponent matrix, parameter vector and simplex partition."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

#: open-interval margin for parameter values
EPS = 1e-12
#: sum-to-one tolerance for blocks and total atomic mass
SUM_TOL = 1e-9


class ModelError(ValueError):
    """Raised when an (A, theta, S) triple does not define a valid model."""


def ipow(base: float, exp: int) -> float:
    """``base ** exp`` for a nonnegative integer exponent by repeated squaring."""
    result = 1.0
    while exp:
        if exp & 1:
            result *= base
        base *= base
        exp >>= 1
    return result


def check_partition(blocks: Iterable[Iterable[int]], k: int) -> tuple[tuple[int, ...], ...]:
    """Validate a 0-based partition of ``range(k)`` and return it as sorted tuples."""
    out = tuple(tuple(sorted(int(i) for i in b)) for b in blocks)
    seen: set[int] = set()
    for j, block in enumerate(out):
        if len(block) < 2:
            raise ModelError(f"block {j + 1} has fewer than two parameters")
        for i in block:
            if not 0 <= i < k:
                raise ModelError(f"block {j + 1} references parameter {i + 1} outside 1..{k}")
            if i in seen:
                raise ModelError(f"parameter {i + 1} appears in more than one block")
            seen.add(i)
    if len(seen) != k:
        missing = sorted(set(range(k)) - seen)
        raise ModelError(f"partition does not cover parameters {[i + 1 for i in missing]}")
    return out


def check_theta(theta: Sequence[float], blocks: Sequence[Sequence[int]]) -> np.ndarray:
    """Validate a parameter vector against a partition; return a read-only copy."""
    arr = np.array(theta, dtype=float)
    if arr.ndim != 1:
        raise ModelError("theta must be one-dimensional")
    bad = np.flatnonzero(~((arr > EPS) & (arr < 1 - EPS)))
    if bad.size:
        i = int(bad[0])
        raise ModelError(f"theta[{i + 1}] = {arr[i]!r} is not in the open interval (0, 1)")
    for j, block in enumerate(blocks):
        s = float(arr[list(block)].sum())
        if abs(s - 1.0) > SUM_TOL:
            raise ModelError(f"block {j + 1} sums to {s!r}, not 1")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class MonomialModel:
    """A discrete distribution whose atomic probabilities are monomials in theta.

    Parameters
    ----------
    exponents : array-like of int, shape (q, k)
        Nonnegative integer exponent matrix, one row per atom.
    theta : array-like of float, shape (k,)
        Parameter values, each strictly inside (0, 1).
    partition : sequence of sequences of int
        0-based parameter indices grouped into simplex blocks.
    labels : sequence of str, optional
        Atom labels. Carried for reporting only.
    """

    exponents: np.ndarray
    theta: np.ndarray
    partition: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        A = np.asarray(self.exponents)
        if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
            raise ModelError("exponent matrix must be a nonempty 2-d array")
        if not np.issubdtype(A.dtype, np.integer):
            if not np.all(np.equal(np.mod(A, 1), 0)):
                raise ModelError("exponents must be integers")
        A = A.astype(np.int64)
        if (A < 0).any():
            y, i = np.argwhere(A < 0)[0]
            raise ModelError(f"negative exponent at atom {y + 1}, parameter {i + 1}")
        q, k = A.shape
        zero_cols = np.flatnonzero(~A.any(axis=0))
        if zero_cols.size:
            raise ModelError(f"parameter {int(zero_cols[0]) + 1} appears in no atom")
        A.flags.writeable = False
        blocks = check_partition(self.partition, k)
        if len(self.theta) != k:
            raise ModelError(f"theta has length {len(self.theta)}, expected {k}")
        theta = check_theta(self.theta, blocks)
        labels = tuple(str(s) for s in self.labels) if len(self.labels) else tuple(
            f"y{y + 1}" for y in range(q))
        if len(labels) != q:
            raise ModelError(f"{len(labels)} labels for {q} atoms")
        object.__setattr__(self, "exponents", A)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "partition", blocks)
        object.__setattr__(self, "labels", labels)
        total = float(self.probabilities().sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ModelError(f"atomic probabilities sum to {total!r}, not 1")

    @property
    def q(self) -> int:
        return self.exponents.shape[0]

    @property
    def k(self) -> int:
        return self.exponents.shape[1]

    def block_of(self, i: int) -> int:
        """Index of the block containing parameter ``i``."""
        for j, block in enumerate(self.partition):
            if i in block:
                return j
        raise IndexError(f"parameter index {i} out of range")

    def with_theta(self, theta: Sequence[float]) -> "MonomialModel":
        """Same structure, different parameter values."""
        return MonomialModel(self.exponents, theta, self.partition, self.labels)

    def probabilities(self) -> np.ndarray:
        """All atomic probabilities in atom order."""
        return np.array([self._monomial(y) for y in range(self.q)])

    def _monomial(self, y: int) -> float:
        p = 1.0
        for i in np.flatnonzero(self.exponents[y]):
            p *= ipow(float(self.theta[i]), int(self.exponents[y, i]))
        return p

    def atom_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(label) from None

    def __repr__(self):
        return f"MonomialModel(q={self.q}, k={self.k}, blocks={len(self.partition)})"


def _check_atom(model: MonomialModel, y: int) -> int:
    if not isinstance(y, (int, np.integer)) or not 0 <= y < model.q:
        raise IndexError(f"atom index {y!r} out of range 0..{model.q - 1}")
    return int(y)


def _check_block(model: MonomialModel, j: int) -> int:
    if not isinstance(j, (int, np.integer)) or not 0 <= j < len(model.partition):
        raise IndexError(f"block index {j!r} out of range 0..{len(model.partition) - 1}")
    return int(j)


def check_event(model: MonomialModel, atoms: Iterable[int], allow_empty: bool = False) -> tuple[int, ...]:
    """Normalise an event to a sorted tuple of distinct, in-range atom indices."""
    ev = tuple(sorted({_check_atom(model, y) for y in atoms}))
    if not ev and not allow_empty:
        raise ValueError("event is empty")
    return ev


def atomic_probability(model: MonomialModel, y: int) -> float:
    return model._monomial(_check_atom(model, y))


def event_probability(model: MonomialModel, atoms: Iterable[int]) -> float:
    return sum(model._monomial(y) for y in check_event(model, atoms))


def is_multilinear(model: MonomialModel) -> bool:
    return bool(model.exponents.max() <= 1)


def support_split(model: MonomialModel, block: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split the atoms into those not involving block ``block`` and those that do.

    Returns ``(unaffected, affected)``; only the affected atoms can change
    probability when parameters in the block are covaried.
    """
    cols = list(model.partition[_check_block(model, block)])
    touched = model.exponents[:, cols].any(axis=1)
    return tuple(np.flatnonzero(~touched).tolist()), tuple(np.flatnonzero(touched).tolist())


def block_exponent_sum(model: MonomialModel, y: int, block: int) -> int:
    cols = list(model.partition[_check_block(model, block)])
    return int(model.exponents[_check_atom(model, y), cols].sum())


# -- file format -------------------------------------------------------------

def model_to_dict(model: MonomialModel) -> dict:
    return {
        "atoms": [
            {"label": lab, "exponents": [int(a) for a in row]}
            for lab, row in zip(model.labels, model.exponents)
        ],
        "theta": [float(t) for t in model.theta],
        "partition": [[i + 1 for i in b] for b in model.partition],
    }


def model_from_dict(doc: dict) -> MonomialModel:
    try:
        atoms = doc["atoms"]
        theta = doc["theta"]
        partition = doc["partition"]
    except (KeyError, TypeError) as exc:
        raise ModelError(f"model document is missing field {exc}") from None
    rows, labels = [], []
    for n, atom in enumerate(atoms):
        ex = atom.get("exponents") if isinstance(atom, dict) else None
        if not isinstance(ex, list) or not all(isinstance(a, int) and not isinstance(a, bool) for a in ex):
            raise ModelError(f"atoms[{n}].exponents must be an array of integers")
        rows.append(ex)
        labels.append(atom.get("label", f"y{n + 1}"))
    if len({len(r) for r in rows}) > 1:
        raise ModelError("atoms have exponent arrays of different lengths")
    blocks = []
    for j, b in enumerate(partition):
        if not isinstance(b, list) or not all(isinstance(i, int) for i in b):
            raise ModelError(f"partition[{j}] must be an array of integers")
        if any(i < 1 for i in b):
            raise ModelError(f"partition[{j}] uses 1-based indices; found value < 1")
        blocks.append([i - 1 for i in b])
    return MonomialModel(np.array(rows, dtype=np.int64), theta, blocks, labels)


def dumps_model(model: MonomialModel) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def loads_model(text: str) -> MonomialModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return model_from_dict(doc)
