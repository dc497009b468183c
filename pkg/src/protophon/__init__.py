"""Phonetic reconstruction of ancestral initials by mixed-integer optimisation."""

__version__ = "0.1.0"
