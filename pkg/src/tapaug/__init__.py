"""Stemless tree augmentation: a matching-based 3/2-approximation, an exact
oracle, generators, and an exact-rational certification layer."""

from .instance import (InstanceError, TapInstance, find_stems, is_cover, parse_instance, serialize,
                       shadow_close, validate)
from .gens import gen_clawpath, gen_fixture, gen_random_stemless
from .oracle import BudgetExceeded, opt_cover
from .solver import SolveError, solve

__all__ = [
    "BudgetExceeded", "InstanceError", "SolveError", "TapInstance", "find_stems", "gen_clawpath",
    "gen_fixture", "gen_random_stemless", "is_cover",
    "opt_cover", "parse_instance", "serialize", "shadow_close", "solve", "validate",
]
__version__ = "0.1.0"
