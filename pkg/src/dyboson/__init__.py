"""Free-boson realization of the super-Yangian double and a symbolic relation checker."""

__version__ = "0.1.0"
