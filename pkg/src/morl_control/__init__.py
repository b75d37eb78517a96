"""Preference-conditioned multi-objective PPO with controllability metrics."""

__version__ = "0.1.0"
