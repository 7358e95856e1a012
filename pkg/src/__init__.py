"""QSHI Teleport - Quantum teleportation between two quantum spin Hall insulator rings."""

__version__ = "1.0.0"
