"""Marginal tracial states on M_n (x) M_n: certification, descent and Schmidt analysis."""

__version__ = "0.1.0"

from .extremality import Certificate, Tolerances, certify  # noqa: E402
from .margstates import StateElement, check_marginal, mix, sample_mts, state_tau  # noqa: E402

__all__ = ["Certificate", "StateElement", "Tolerances", "certify", "check_marginal",
           "mix", "sample_mts", "state_tau", "__version__"]
