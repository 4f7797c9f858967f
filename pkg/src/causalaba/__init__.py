"""Exact causal discovery from weighted conditional-independence facts."""

from .graph import Dag, Pdag, cpdag_of, d_separated, mec_members

__version__ = "0.1.0"

__all__ = ["Dag", "Pdag", "cpdag_of", "d_separated", "mec_members", "__version__"]
