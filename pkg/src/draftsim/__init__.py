"""Closed-drafting card game engine, DQN self-play agents and analysis tools."""

__version__ = "0.1.0"
