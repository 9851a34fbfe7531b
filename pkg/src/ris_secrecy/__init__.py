"""Secrecy analysis of an RIS-assisted downlink with Poisson UAV eavesdroppers."""

__version__ = "0.1.0"

from .geometry import SystemParams, SphericalPoint  # noqa: E402
from .specfun import Truncation  # noqa: E402
from .analysis import analytic_cdfs, analytic_secrecy_capacity  # noqa: E402
from .montecarlo import run_trials, mc_secrecy_capacity  # noqa: E402

__all__ = [
    "SystemParams", "SphericalPoint", "Truncation",
    "analytic_cdfs", "analytic_secrecy_capacity", "run_trials", "mc_secrecy_capacity",
]
