"""Stochastic shortest path planning with Generalized Policy Automata."""

__version__ = "0.1.0"
