"""Bundled example programs."""

from importlib import resources


def names():
    return sorted(p.name[:-3] for p in resources.files(__name__).iterdir() if p.name.endswith(".ll"))


def load(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.ll").read_text()
