"""Optimal relay power control for two-way amplify-and-forward relaying."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    CutoffCapReached,
    DegenerateState,
    InfeasibleTarget,
    InvalidArgument,
    NumericalFailure,
    OutOfDomain,
    UnsupportedConfiguration,
)
from .model import ChannelState, SystemParams  # noqa: F401
