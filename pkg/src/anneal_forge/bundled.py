"""Access to data files shipped with the package."""

from __future__ import annotations

from importlib import resources


def data_text(name: str) -> str:
    """Return the contents of a bundled data file."""
    return resources.files("anneal_forge").joinpath("data", name).read_text()
