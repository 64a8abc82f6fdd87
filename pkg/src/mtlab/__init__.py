"""Numerics for the sharp Moser-Trudinger inequality of the Laplacian without boundary
conditions on the unit ball: constants, kernels, the canonical solution operator,
kernel level sets, region certificates and the extremal-family experiment."""

__version__ = "0.1.0"

from .errors import MtlabError  # noqa: F401
from .geometry import Constants, constants  # noqa: F401
