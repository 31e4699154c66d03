"""Moebius ladder lab.

Capacities of signed-segment ladders, crossing penalties, declarative ladder
families over unit cubes, and a seeded stochastic search with live steering.
"""

__version__ = "0.1.0"
