"""Pytest configuration and shared fixtures."""

import math

import numpy as np
import pytest

from src.core.models import JunctionAmplitudes, RingConfig, RunConfig
from src.services import audit, protocol, sweep
from src.services.audit import AuditService
from src.services.ring_model import beam_splitter_ring, default_geometry

SQRT_HALF = 1 / math.sqrt(2)

SYMMETRIC_CONFIG_TEXT = """\
# Symmetric beam-splitter junctions on both rings
ring_a.junction_a.t = [0.7071067811865476, 0.0]
ring_a.junction_a.p = [0.0, 0.0]
ring_a.junction_a.f = [0.7071067811865476, 0.0]
ring_a.junction_b.t = [0.7071067811865476, 0.0]
ring_a.junction_b.p = [0.0, 0.0]
ring_a.junction_b.f = [0.7071067811865476, 0.0]

ring_b.junction_a.t = [0.7071067811865476, 0.0]
ring_b.junction_a.p = [0.0, 0.0]
ring_b.junction_a.f = [0.7071067811865476, 0.0]
ring_b.junction_b.t = [0.7071067811865476, 0.0]
ring_b.junction_b.p = [0.0, 0.0]
ring_b.junction_b.f = [0.7071067811865476, 0.0]

qubit_choice = up
mode = constraint
"""


@pytest.fixture(autouse=True)
def fresh_singletons(monkeypatch):
    """Give every test its own audit, protocol and sweep singletons."""
    monkeypatch.setattr(audit, "_audit_service", None)
    monkeypatch.setattr(protocol, "_protocol_service", None)
    monkeypatch.setattr(sweep, "_sweep_service", None)


@pytest.fixture
def audit_service():
    """Create an AuditService for testing."""
    return AuditService()


@pytest.fixture
def rng():
    """Seeded random generator for property tests."""
    return np.random.default_rng(20240531)


@pytest.fixture
def beam_splitter_config() -> RingConfig:
    """Ring with t = f = 1/√2, p = 0 junctions; its state is Φ+."""
    return beam_splitter_ring()


@pytest.fixture
def psi_config() -> RingConfig:
    """Ring with p = t = 1/√2, f = 0 junctions; its state is Ψ+ at K = 0."""
    junction = JunctionAmplitudes(t=SQRT_HALF, p=SQRT_HALF, f=0)
    return RingConfig(junction_a=junction, junction_b=junction, geometry=default_geometry())


@pytest.fixture
def run_config(beam_splitter_config) -> RunConfig:
    """Symmetric run configuration with defaults elsewhere."""
    return RunConfig(ring_a=beam_splitter_config, ring_b=beam_splitter_config)


@pytest.fixture
def config_file(tmp_path):
    """
    Write config text to a file.

    Returns a factory taking (text, name) and returning the path.
    """
    def write(text: str = SYMMETRIC_CONFIG_TEXT, name: str = "symmetric.cfg"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return write
