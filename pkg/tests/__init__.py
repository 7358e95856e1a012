"""Tests for the QSHI teleportation simulator."""
