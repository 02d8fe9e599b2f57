"""Staged event trees and their compilation to monomial models.

Tree documents are JSON objects::

    {
      "vertices": ["v0", "v1", ...],
      "root": "v0",
      "edges": [{"from": "v0", "to": "v1", "label": "head", "position": 1}, ...],
      "stages": [{"name": "s1", "members": ["v0", "v1"], "probs": [0.5, 0.5]}, ...]
    }

``position`` is the 1-based slot of the edge within its floret; edges in the
same slot of same-stage florets share one parameter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import EPS, SUM_TOL, MonomialModel


class TreeError(ValueError):
    """Raised when a tree is structurally invalid."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class ParseError(TreeError):
    """Raised on malformed tree documents; ``where`` names the line or field."""

    def __init__(self, message, where=None, violations=()):
        text = f"{where}: {message}" if where else message
        super().__init__(text, violations)
        self.where = where


class Edge(NamedTuple):
    src: str
    dst: str
    label: str
    position: int


class Stage(NamedTuple):
    name: str
    members: tuple[str, ...]
    probs: tuple[float, ...]


class Violation(NamedTuple):
    code: str
    subject: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.subject}: {self.message}"


@dataclass(frozen=True)
class StagedTree:
    vertices: tuple[str, ...]
    root: str
    edges: tuple[Edge, ...]
    stages: tuple[Stage, ...]

    def floret(self, v: str) -> list[Edge]:
        """Outgoing edges of ``v`` ordered by position."""
        return sorted((e for e in self.edges if e.src == v), key=lambda e: e.position)

    def children(self) -> dict[str, list[Edge]]:
        out: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out.setdefault(e.src, []).append(e)
        for v in out:
            out[v].sort(key=lambda e: e.position)
        return out

    def stage_of(self) -> dict[str, int]:
        return {m: s for s, st in enumerate(self.stages) for m in st.members}

    def paths(self) -> list[list[Edge]]:
        """Root-to-leaf edge sequences, depth first in floret order."""
        kids = self.children()
        out: list[list[Edge]] = []

        def walk(v, prefix):
            if not kids[v]:
                out.append(prefix)
                return
            for e in kids[v]:
                walk(e.dst, prefix + [e])

        walk(self.root, [])
        return out


def validate_tree(tree: StagedTree) -> list[Violation]:
    """Every structural problem with ``tree``; an empty list means valid."""
    found: list[Violation] = []
    vset = set(tree.vertices)
    if len(vset) != len(tree.vertices):
        dup = sorted({v for v in tree.vertices if tree.vertices.count(v) > 1})
        found.append(Violation("duplicate-vertex", ",".join(dup), "vertex listed more than once"))
    if tree.root not in vset:
        found.append(Violation("unknown-root", tree.root, "root is not a declared vertex"))
        return found
    parents: dict[str, list[str]] = {v: [] for v in vset}
    kids: dict[str, list[Edge]] = {v: [] for v in vset}
    for e in tree.edges:
        for end in (e.src, e.dst):
            if end not in vset:
                found.append(Violation("unknown-vertex", end, f"edge {e.src}->{e.dst} references it"))
        if e.src in vset and e.dst in vset:
            parents[e.dst].append(e.src)
            kids[e.src].append(e)
    if parents[tree.root]:
        found.append(Violation("root-has-parent", tree.root, f"incoming edge from {parents[tree.root][0]}"))
    for v in tree.vertices:
        if v != tree.root and len(parents.get(v, ())) > 1:
            found.append(Violation("multiple-parents", v, f"parents {sorted(parents[v])}"))

    # reachability and cycles
    seen: set[str] = set()
    stack = [tree.root]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(e.dst for e in kids.get(v, ()))
    for v in tree.vertices:
        if v not in seen:
            found.append(Violation("unreachable", v, "not reachable from the root"))
    back = _find_back_edge(tree.root, kids)
    if back is not None:
        found.append(Violation("cycle", f"{back.src}->{back.dst}", "edge closes a directed cycle"))

    inner = [v for v in tree.vertices if kids.get(v)]
    for v in inner:
        if len(kids[v]) < 2:
            found.append(Violation("inner-vertex-with-<2-children", v, f"has {len(kids[v])} child"))
        positions = sorted(e.position for e in kids[v])
        if positions != list(range(1, len(positions) + 1)):
            found.append(Violation("bad-positions", v, f"floret positions {positions} are not 1..{len(positions)}"))

    assigned: dict[str, str] = {}
    for st in tree.stages:
        for m in st.members:
            if m not in vset:
                found.append(Violation("unknown-vertex", m, f"member of stage {st.name}"))
                continue
            if m in assigned:
                found.append(Violation("multiple-stages", m, f"in stages {assigned[m]} and {st.name}"))
            assigned[m] = st.name
            if not kids.get(m):
                found.append(Violation("leaf-in-stage", m, f"leaf listed in stage {st.name}"))
        sizes = {len(kids[m]) for m in st.members if kids.get(m)}
        if len(sizes) > 1 or (sizes and sizes != {len(st.probs)}):
            found.append(Violation(
                "floret-size-mismatch", st.name,
                f"floret sizes {sorted(sizes)} vs {len(st.probs)} stage probabilities"))
        p = np.asarray(st.probs, dtype=float)
        if p.size and not ((p > EPS) & (p < 1 - EPS)).all():
            found.append(Violation("prob-out-of-range", st.name, "probabilities must lie in (0, 1)"))
        if abs(float(p.sum()) - 1.0) > SUM_TOL:
            found.append(Violation("prob-sum", st.name, f"probabilities sum to {float(p.sum())!r}"))
    for v in inner:
        if v not in assigned:
            found.append(Violation("unstaged-vertex", v, "inner vertex belongs to no stage"))
    return found


def _find_back_edge(root, kids) -> Edge | None:
    state: dict[str, int] = {}  # 1 = on stack, 2 = done
    stack = [(root, iter(kids.get(root, ())))]
    state[root] = 1
    while stack:
        v, it = stack[-1]
        e = next(it, None)
        if e is None:
            state[v] = 2
            stack.pop()
            continue
        s = state.get(e.dst)
        if s == 1:
            return e
        if s is None:
            state[e.dst] = 1
            stack.append((e.dst, iter(kids.get(e.dst, ()))))
    return None


def repeated_stage_on_path(tree: StagedTree) -> bool:
    """True if some root-to-leaf path visits two vertices of one stage."""
    stage_of = tree.stage_of()
    for path in tree.paths():
        visited = [stage_of[e.src] for e in path]
        if len(visited) != len(set(visited)):
            return True
    return False


def compile_to_mm(tree: StagedTree) -> MonomialModel:
    """Monomial model with one atom per root-to-leaf path.

    Parameters are the stage probability vectors concatenated in stage order;
    the exponent of a parameter in an atom counts how often its
    (stage, position) slot is traversed on that path.
    """
    problems = validate_tree(tree)
    if problems:
        raise TreeError(f"invalid tree: {problems[0]}", problems)
    offsets = np.cumsum([0] + [len(st.probs) for st in tree.stages])
    stage_of = tree.stage_of()
    paths = tree.paths()
    A = np.zeros((len(paths), int(offsets[-1])), dtype=np.int64)
    labels = []
    for y, path in enumerate(paths):
        for e in path:
            A[y, offsets[stage_of[e.src]] + e.position - 1] += 1
        labels.append("/".join(e.label or e.dst for e in path))
    theta = [p for st in tree.stages for p in st.probs]
    partition = [range(offsets[s], offsets[s + 1]) for s in range(len(tree.stages))]
    return MonomialModel(A, theta, partition, labels)


# -- file format -------------------------------------------------------------

def tree_to_dict(tree: StagedTree) -> dict:
    return {
        "vertices": list(tree.vertices),
        "root": tree.root,
        "edges": [{"from": e.src, "to": e.dst, "label": e.label, "position": e.position}
                  for e in tree.edges],
        "stages": [{"name": st.name, "members": list(st.members), "probs": list(st.probs)}
                   for st in tree.stages],
    }


def serialize_tree(tree: StagedTree) -> str:
    return json.dumps(tree_to_dict(tree), indent=2) + "\n"


def _field(doc, key, kind, where):
    if not isinstance(doc, dict) or key not in doc:
        raise ParseError(f"missing field '{key}'", where)
    val = doc[key]
    if not isinstance(val, kind) or isinstance(val, bool) and kind is not bool:
        raise ParseError(f"field '{key}' has type {type(val).__name__}", f"{where}.{key}" if where else key)
    return val


def tree_from_dict(doc: dict, check: bool = True) -> StagedTree:
    vertices = _field(doc, "vertices", list, "")
    for n, v in enumerate(vertices):
        if not isinstance(v, str):
            raise ParseError("vertex ids must be strings", f"vertices[{n}]")
    vset = set(vertices)
    root = _field(doc, "root", str, "")
    if root not in vset:
        raise ParseError(f"unknown vertex '{root}'", "root")
    edges = []
    for n, raw in enumerate(_field(doc, "edges", list, "")):
        where = f"edges[{n}]"
        src = _field(raw, "from", str, where)
        dst = _field(raw, "to", str, where)
        for key, end in (("from", src), ("to", dst)):
            if end not in vset:
                raise ParseError(f"unknown vertex '{end}'", f"{where}.{key}")
        label = raw.get("label", "")
        if not isinstance(label, str):
            raise ParseError("label must be a string", f"{where}.label")
        edges.append(Edge(src, dst, label, _field(raw, "position", int, where)))
    stages = []
    for n, raw in enumerate(_field(doc, "stages", list, "")):
        where = f"stages[{n}]"
        members = _field(raw, "members", list, where)
        for m_i, m in enumerate(members):
            if m not in vset:
                raise ParseError(f"unknown vertex '{m}'", f"{where}.members[{m_i}]")
        probs = _field(raw, "probs", list, where)
        if not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in probs):
            raise ParseError("probabilities must be numbers", f"{where}.probs")
        name = raw.get("name", f"S{n + 1}")
        stages.append(Stage(str(name), tuple(members), tuple(float(p) for p in probs)))
    tree = StagedTree(tuple(vertices), root, tuple(edges), tuple(stages))

    kids: dict[str, list[Edge]] = {}
    for e in edges:
        kids.setdefault(e.src, []).append(e)
    back = _find_back_edge(root, kids)
    if back is not None:
        raise ParseError(f"cycle through back edge {back.src} -> {back.dst}",
                         f"edges[{edges.index(back)}]")
    if check:
        problems = validate_tree(tree)
        if problems:
            raise ParseError(str(problems[0]), problems[0].subject, problems)
    return tree


def parse_tree(text: str, check: bool = True) -> StagedTree:
    """Parse a tree document. With ``check`` every structural violation raises."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", "line 1")
    return tree_from_dict(doc, check=check)
