from .oracle import brute_force
from .solver import Matching, Sense, WeightMatrix, solve

__all__ = ["Matching", "Sense", "WeightMatrix", "brute_force", "solve"]
