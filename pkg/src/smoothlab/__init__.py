"""Numerical companion for smoothing inequalities of disordered pinning-type models.

Modules
-------
disorder     disorder laws, exponential tilts, exact-weight sampling
constants    explicit constants of the tilt and shift comparisons
pinning      pinning partition functions, Monte Carlo free energy, critical point
toy          exactly solvable product-spin models and the signed counterexample
rarestretch  rare-stretch lower bounds with importance sampling
verify       named checks producing machine-readable reports
cli          the ``smoothlab`` command
"""

from . import constants, disorder, pinning, rarestretch, toy, verify
from .errors import SmoothlabError

__version__ = "0.1.0"

__all__ = ["constants", "disorder", "pinning", "rarestretch", "toy", "verify", "SmoothlabError", "__version__"]
