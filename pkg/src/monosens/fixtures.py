"""Bundled example models: coin, edu_ml, edu_nml, edu_nml_split (trees) and ex3 (model only)."""

from importlib import resources

from .model import MonomialModel, loads_model
from .tree import StagedTree, compile_to_mm, parse_tree

TREES = ("coin", "edu_ml", "edu_nml", "edu_nml_split")
MODELS = TREES + ("ex3",)


def fixture_text(filename: str) -> str:
    return (resources.files("monosens") / "data" / filename).read_text()


def load_tree(name: str) -> StagedTree:
    return parse_tree(fixture_text(f"{name}.tree.json"))


def load_fixture(name: str) -> MonomialModel:
    """Model for a bundled fixture, compiled from its tree when there is one."""
    if name in TREES:
        return compile_to_mm(load_tree(name))
    if name in MODELS:
        return loads_model(fixture_text(f"{name}.model.json"))
    raise KeyError(f"unknown fixture {name!r}; available: {', '.join(MODELS)}")
