"""Spatially multimode twin beams from a phase-insensitive 4-wave-mixing amplifier."""

__version__ = "0.1.0"
