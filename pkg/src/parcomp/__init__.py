"""Primal-dual splitting for sums of parallel sums of composite monotone operators."""

from importlib import resources

__version__ = "0.1.0"

ASSETS = {"shapes64": "shapes64.pgm", "camera256": "camera256.pgm"}


def asset_path(name: str):
    """Path of a bundled test image (``shapes64`` or ``camera256``)."""
    return resources.files(__name__).joinpath("data", ASSETS[name])
