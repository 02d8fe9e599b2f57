"""Command-line front end.

Exit codes: 0 success, 1 runtime error, 2 validation failure, 3 bad flags.
"""

from __future__ import annotations

import argparse
import csv
import difflib
import fnmatch
import io
import json
import re
import sys
from importlib import resources
from pathlib import Path

from .covariation import InfeasibleVariation, apply_scheme, make_target, parse_scheme
from .divergence import (
    MEASURES,
    PHI,
    ConditionError,
    cd_corollary4,
    cd_distance_block,
    cd_distance_full,
    check_cor4_condition,
    divergence_sweep,
    phi_divergence_block,
    phi_divergence_full,
)
from .model import ModelError, MonomialModel, dumps_model, is_multilinear, loads_model
from .optimality import search_schemes
from .sensitivity import default_grid, sweep
from .tree import ParseError, TreeError, compile_to_mm, parse_tree, validate_tree

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID, EXIT_FLAGS = 0, 1, 2, 3


class FlagError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FLAGS, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    return "infeasible" if x is None else f"{x:.12g}"


def read_input(spec: str) -> tuple[str, str]:
    """Return ``(text, name)``; ``@name`` selects a bundled fixture."""
    if spec.startswith("@"):
        data = resources.files("monosens") / "data"
        for suffix in (".tree.json", ".model.json", ""):
            cand = data / (spec[1:] + suffix)
            if cand.is_file():
                return cand.read_text(), cand.name
        raise FileNotFoundError(f"no bundled fixture named {spec[1:]!r}")
    return Path(spec).read_text(), spec


def is_tree_doc(text: str) -> bool:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        return False
    return isinstance(doc, dict) and "vertices" in doc


def load_model(spec: str, force_tree: bool = False) -> MonomialModel:
    text, _ = read_input(spec)
    if force_tree or is_tree_doc(text):
        return compile_to_mm(parse_tree(text))
    return loads_model(text)


def resolve_event(model: MonomialModel, spec: str) -> tuple[str, list[int]]:
    """``[NAME:]SPEC`` where SPEC is ``#i,j,..`` (1-based atoms) or labels/globs."""
    m = re.match(r"([A-Za-z_][\w.-]*):(.*)$", spec)
    name, body = (m.group(1), m.group(2)) if m else (spec, spec)
    if body.startswith("#"):
        try:
            atoms = [int(x) - 1 for x in body[1:].split(",")]
        except ValueError:
            raise FlagError(f"bad atom index list {body!r}") from None
        for y in atoms:
            if not 0 <= y < model.q:
                raise FlagError(f"atom index {y + 1} out of range 1..{model.q}")
        return name, atoms
    atoms: list[int] = []
    for token in body.split(","):
        token = token.strip()
        if any(c in token for c in "*?["):
            hits = [y for y, lab in enumerate(model.labels) if fnmatch.fnmatchcase(lab, token)]
            if not hits:
                raise FlagError(f"pattern {token!r} matches no atom label")
            atoms.extend(hits)
        elif token in model.labels:
            atoms.append(model.labels.index(token))
        else:
            near = difflib.get_close_matches(token, model.labels, n=3)
            hint = f"; did you mean {', '.join(near)}?" if near else ""
            raise FlagError(f"unknown atom label {token!r}{hint}")
    return name, sorted(set(atoms))


def _param(model: MonomialModel, p: int) -> int:
    if not 1 <= p <= model.k:
        raise FlagError(f"--param {p} out of range 1..{model.k}")
    return p - 1


def _schemes(args):
    try:
        return [parse_scheme(s) for s in (args.scheme or ["proportional"])]
    except ValueError as exc:
        raise FlagError(str(exc)) from None


def _write(args, text: str):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands -----------------------------------------------------------------

def cmd_validate(args) -> int:
    text, name = read_input(args.input)
    try:
        if args.tree or is_tree_doc(text):
            tree = parse_tree(text, check=False)
            problems = validate_tree(tree)
            for v in problems:
                print(f"finding: {name}: {v}", file=sys.stderr)
            if problems:
                return EXIT_INVALID
            model = compile_to_mm(tree)
        else:
            model = loads_model(text)
    except (ModelError, TreeError) as exc:
        print(f"finding: {name}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    kind = "multilinear" if is_multilinear(model) else "non-multilinear"
    print(f"note: {name}: valid, {model.q} atoms, {model.k} parameters, "
          f"{len(model.partition)} blocks, {kind}", file=sys.stderr)
    return EXIT_OK


def cmd_compile(args) -> int:
    text, name = read_input(args.input)
    try:
        model = compile_to_mm(parse_tree(text))
    except TreeError as exc:
        print(f"finding: {name}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _write(args, dumps_model(model))
    return EXIT_OK


def cmd_sweep(args) -> int:
    model = load_model(args.model, args.tree)
    param = _param(model, args.param)
    schemes = _schemes(args)
    measures = args.measure or (["sensitivity"] if args.event else ["cd"])
    grid = default_grid(args.grid)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if measures == ["sensitivity"]:
        if not args.event:
            raise FlagError("sensitivity sweep needs at least one --event")
        given = resolve_event(model, args.given) if args.given else None
        writer.writerow(["theta_tilde", "value", "scheme", "event", "target"])
        for spec in args.event:
            ev_name, ev = resolve_event(model, spec)
            if given:
                ev_name = f"{ev_name}|{given[0]}"
            for scheme in schemes:
                for row in sweep(model, ev, param, scheme, grid,
                                 given=None if given is None else given[1]):
                    writer.writerow([fmt(row.theta_tilde), fmt(row.value), str(scheme),
                                     ev_name, f"theta{param + 1}"])
    elif "sensitivity" in measures:
        raise FlagError("--measure sensitivity cannot be combined with divergence measures")
    else:
        bad = [m for m in measures if m not in MEASURES]
        if bad:
            raise FlagError(f"unknown measure {bad[0]!r}; choose from sensitivity, {', '.join(MEASURES)}")
        writer.writerow(["theta_tilde", "scheme", "measure", "value"])
        for row in divergence_sweep(model, param, schemes, measures, grid):
            writer.writerow([fmt(row.theta_tilde), row.scheme, row.measure, fmt(row.value)])
    _write(args, buf.getvalue())
    return EXIT_OK


def cmd_divergence(args) -> int:
    model = load_model(args.model, args.tree)
    param = _param(model, args.param)
    target = make_target(model, param, args.value)
    measures = args.measure or ["cd"]
    out = []
    for scheme in _schemes(args):
        theta_t = apply_scheme(model, target, scheme)
        for m in measures:
            rec = {"scheme": str(scheme), "measure": m, "param": param + 1, "value": target.value}
            if m == "cd":
                full = cd_distance_full(model, theta_t)
                block = cd_distance_block(model, target, scheme)
                rec.update(full=full.value, closed_form=block.value,
                           argmax_atom=model.labels[full.argmax],
                           argmin_atom=model.labels[full.argmin])
                holds, _ = check_cor4_condition(model, target.block)
                rec["single_block_form"] = cd_corollary4(model, target, scheme).value if holds else None
            elif m in PHI:
                rec.update(full=phi_divergence_full(model, theta_t, PHI[m]).value,
                           closed_form=phi_divergence_block(model, target, scheme, PHI[m]).value)
            else:
                raise FlagError(f"unknown measure {m!r}; choose from {', '.join(MEASURES)}")
            out.append(rec)
    _write(args, json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def cmd_optimality(args) -> int:
    model = load_model(args.model, args.tree)
    target = make_target(model, _param(model, args.param), args.value)
    verdict = search_schemes(model, target, args.samples, args.seed)
    _write(args, json.dumps(verdict.to_dict(), indent=2) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="monosens", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a model or tree file")
    p.add_argument("input", help="file path, or @name for a bundled fixture")
    p.add_argument("--tree", action="store_true", help="treat input as a tree document")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compile", help="compile a staged tree into a model file")
    p.add_argument("input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compile)

    def common(p, value=True):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--model", help="model or tree file (auto-detected), or @name")
        src.add_argument("--tree", dest="tree_path", help="tree file")
        p.add_argument("--param", type=int, required=True, help="varied parameter, 1-based")
        if value:
            p.add_argument("--value", type=float, required=True, help="new value in (0, 1)")
        p.add_argument("--out")
        p.add_argument("--log-base", default="e", choices=["e"])

    p = sub.add_parser("sweep", help="sensitivity or divergence values along a grid")
    common(p, value=False)
    p.add_argument("--grid", type=int, default=199, help="number of interior grid points")
    p.add_argument("--scheme", action="append", help="proportional | uniform | linear:.. | linear-full:..")
    p.add_argument("--measure", action="append", help="sensitivity | " + " | ".join(MEASURES))
    p.add_argument("--event", action="append", help="[NAME:]labels, globs or #indices")
    p.add_argument("--given", help="conditioning event, same syntax as --event")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("divergence", help="CD distance / phi-divergences at one new value")
    common(p)
    p.add_argument("--scheme", action="append")
    p.add_argument("--measure", action="append")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("optimality", help="search covariation schemes against proportional")
    common(p)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_optimality)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if hasattr(args, "tree_path"):
        args.tree = args.tree_path is not None
        args.model = args.model or args.tree_path
    try:
        return args.func(args)
    except FlagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ModelError, ParseError, TreeError) as exc:
        print(f"finding: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InfeasibleVariation, ConditionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
