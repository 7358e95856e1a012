"""Run configuration files.

Configurations are flat text files with one ``key = value`` per line and
``#`` comments::

    # symmetric beam-splitter junctions on both rings
    ring_a.junction_a.t = [0.7071067811865476, 0.0]
    ring_a.junction_a.p = 0
    ring_a.junction_a.f = [0.7071067811865476, 0.0]
    ...
    qubit_choice = up
    mode = constraint

Values are JSON literals or bare words. Complex numbers are ``[re, im]``
pairs. Omitted geometry and physics fall back to the circular-symmetric
defaults; junction amplitudes have no default.
"""

import cmath
import json
import logging
import math
import re
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional

from src.core.errors import ParseError, ValidationError
from src.core.models import (
    BellLabel,
    JunctionAmplitudes,
    Mode,
    QubitChoice,
    RingConfig,
    RingGeometry,
    RingPhysics,
    RunConfig,
    SweepSpec,
)
from src.services.ring_model import default_geometry

logger = logging.getLogger(__name__)

# Configuration keys
RINGS = ("ring_a", "ring_b")
JUNCTIONS = ("junction_a", "junction_b")
AMPLITUDES = ("t", "p", "f")
LENGTH_KEYS = tuple(f"l{i}" for i in range(1, 8))
PHYSICS_KEYS = ("v_f", "alpha", "energy", "gate")
COMPONENTS = ("mag", "phase", "re", "im")
KEY_QUBIT_CHOICE = "qubit_choice"
KEY_MODE = "mode"
KEY_SEED = "seed"
KEY_TOL = "tol"
KEY_SHOTS = "shots"
KEY_WORKERS = "workers"
KEY_DESIGN_ROW = "ring_b.design_row"
SWEEP_KEYS = ("sweep.param", "sweep.start", "sweep.stop", "sweep.steps")

# Defaults
DEFAULT_SEED = 42
DEFAULT_TOL = 1e-9
DEFAULT_SHOTS = 0
DEFAULT_WORKERS = 1
DESIGN_ROW_AUTO = "auto"

_BARE_WORD = re.compile(r"^[A-Za-z_][\w.\-]*$")


def _known_keys() -> set[str]:
    keys = {KEY_QUBIT_CHOICE, KEY_MODE, KEY_SEED, KEY_TOL, KEY_SHOTS, KEY_WORKERS, KEY_DESIGN_ROW}
    keys.update(SWEEP_KEYS)
    for ring in RINGS:
        keys.update(f"{ring}.{k}" for k in LENGTH_KEYS + PHYSICS_KEYS)
        for junction in JUNCTIONS:
            keys.update(f"{ring}.{junction}.{amp}" for amp in AMPLITUDES)
    return keys


KNOWN_KEYS = frozenset(_known_keys())


def sweepable_parameters() -> list[str]:
    """Every real-valued leaf a sweep may address."""
    params = []
    for ring in RINGS:
        for junction in JUNCTIONS:
            for amp in AMPLITUDES:
                params.extend(f"{ring}.{junction}.{amp}.{c}" for c in COMPONENTS)
        params.extend(f"{ring}.{k}" for k in LENGTH_KEYS + PHYSICS_KEYS)
    return params


# =============================================================================
# Parsing
# =============================================================================

def _strip_comment(line: str) -> str:
    in_string = False
    for i, char in enumerate(line):
        if char == '"':
            in_string = not in_string
        elif char == "#" and not in_string:
            return line[:i]
    return line


def _parse_value(raw: str, line_no: int, key: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        if _BARE_WORD.match(raw):
            return raw
        raise ParseError(f"Malformed value {raw!r}", line_no, key)


def parse_entries(text: str) -> dict[str, tuple[Any, int]]:
    """
    Parse config text into raw values.

    Returns:
        Mapping of key to (value, line number)

    Raises:
        ParseError: On malformed lines, unknown keys, duplicates or bad values
    """
    entries: dict[str, tuple[Any, int]] = {}
    for line_no, line in enumerate(text.splitlines(), 1):
        content = _strip_comment(line).strip()
        if not content:
            continue
        if "=" not in content:
            raise ParseError("Expected 'key = value'", line_no)
        key, _, raw = content.partition("=")
        key, raw = key.strip(), raw.strip()
        if not key or not raw:
            raise ParseError("Expected 'key = value'", line_no, key or None)
        if key not in KNOWN_KEYS:
            raise ParseError("Unknown key", line_no, key)
        if key in entries:
            raise ParseError(f"Duplicate key (first on line {entries[key][1]})", line_no, key)
        entries[key] = (_parse_value(raw, line_no, key), line_no)
    return entries


def _number(entries: dict, key: str, default: Optional[float] = None) -> Optional[float]:
    if key not in entries:
        return default
    value, line_no = entries[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"Expected a number, got {value!r}", line_no, key)
    return float(value)


def _integer(entries: dict, key: str, default: int) -> int:
    if key not in entries:
        return default
    value, line_no = entries[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"Expected an integer, got {value!r}", line_no, key)
    return value


def _complex(entries: dict, key: str) -> complex:
    if key not in entries:
        raise ValidationError("missing junction amplitude", key)
    value, line_no = entries[key]
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    raise ParseError(f"Expected [re, im] pair, got {value!r}", line_no, key)


def _word(entries: dict, key: str, default: str) -> str:
    if key not in entries:
        return default
    value, line_no = entries[key]
    if not isinstance(value, str):
        raise ParseError(f"Expected a word, got {value!r}", line_no, key)
    return value


def _choice(entries: dict, key: str, enum_cls, default):
    value = _word(entries, key, default.value)
    try:
        return enum_cls(value)
    except ValueError:
        raise ValidationError(f"must be one of {enum_cls.values()}, got {value!r}", key)


def _ring(entries: dict, ring: str) -> RingConfig:
    junctions = []
    for junction in JUNCTIONS:
        prefix = f"{ring}.{junction}"
        amps = JunctionAmplitudes(*(_complex(entries, f"{prefix}.{a}") for a in AMPLITUDES))
        if not amps.is_unitary():
            raise ValidationError(
                f"|t|^2 + |p|^2 + |f|^2 = {amps.probability_sum:.15g}, expected 1", prefix
            )
        junctions.append(amps)

    defaults = default_geometry()
    try:
        geometry = RingGeometry(**{
            k: _number(entries, f"{ring}.{k}", getattr(defaults, k)) for k in LENGTH_KEYS
        })
        physics = RingPhysics(**{
            k: _number(entries, f"{ring}.{k}", getattr(RingPhysics, k)) for k in PHYSICS_KEYS
        })
    except ValidationError as e:
        raise ValidationError(str(e), ring) from e

    design_row = None
    if ring == "ring_b":
        row = _word(entries, KEY_DESIGN_ROW, DESIGN_ROW_AUTO)
        if row != DESIGN_ROW_AUTO:
            try:
                design_row = BellLabel(row)
            except ValueError:
                raise ValidationError(
                    f"must be '{DESIGN_ROW_AUTO}' or one of {BellLabel.values()}, got {row!r}", KEY_DESIGN_ROW
                )
    return RingConfig(junctions[0], junctions[1], geometry, physics, design_row)


def _sweep(entries: dict) -> Optional[SweepSpec]:
    present = [k for k in SWEEP_KEYS if k in entries]
    if not present:
        return None
    missing = [k for k in SWEEP_KEYS if k not in entries]
    if missing:
        raise ValidationError(f"incomplete sweep, missing {', '.join(missing)}", "sweep")
    param = _word(entries, "sweep.param", "")
    if param not in sweepable_parameters():
        raise ValidationError(f"not a sweepable parameter: {param!r}", "sweep.param")
    steps = _integer(entries, "sweep.steps", 0)
    if steps < 2:
        raise ValidationError(f"steps must be at least 2, got {steps}", "sweep.steps")
    start, stop = _number(entries, "sweep.start"), _number(entries, "sweep.stop")
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise ValidationError("sweep bounds must be finite", "sweep")
    return SweepSpec(param=param, start=start, stop=stop, steps=steps)


def parse_config(text: str) -> RunConfig:
    """
    Parse and validate configuration text.

    Raises:
        ParseError: With line/key context for malformed input
        ValidationError: Naming the violated invariant
    """
    entries = parse_entries(text)

    seed = _integer(entries, KEY_SEED, DEFAULT_SEED)
    if seed < 0:
        raise ValidationError(f"must be non-negative, got {seed}", KEY_SEED)
    tol = _number(entries, KEY_TOL, DEFAULT_TOL)
    if not (math.isfinite(tol) and tol >= 0):
        raise ValidationError(f"must be a non-negative number, got {tol}", KEY_TOL)
    shots = _integer(entries, KEY_SHOTS, DEFAULT_SHOTS)
    if shots < 0:
        raise ValidationError(f"must be non-negative, got {shots}", KEY_SHOTS)
    workers = _integer(entries, KEY_WORKERS, DEFAULT_WORKERS)
    if workers < 1:
        raise ValidationError(f"must be at least 1, got {workers}", KEY_WORKERS)

    config = RunConfig(
        ring_a=_ring(entries, "ring_a"),
        ring_b=_ring(entries, "ring_b"),
        qubit_choice=_choice(entries, KEY_QUBIT_CHOICE, QubitChoice, QubitChoice.UP),
        mode=_choice(entries, KEY_MODE, Mode, Mode.CONSTRAINT),
        seed=seed,
        tol=tol,
        shots=shots,
        workers=workers,
        sweep=_sweep(entries),
    )
    if config.sweep is not None:
        # Both endpoints must yield valid rings
        set_parameter(config, config.sweep.param, config.sweep.start)
        set_parameter(config, config.sweep.param, config.sweep.stop)
    return config


def load_config(path) -> RunConfig:
    """
    Load a run configuration from file.

    Raises:
        ParseError: If the file cannot be read or parsed
        ValidationError: If a value violates an invariant
    """
    config_file = Path(path)
    try:
        text = config_file.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ParseError(f"Cannot read config file {config_file}: {e}")
    logger.info("Loaded config %s", config_file)
    return parse_config(text)


def apply_overrides(
    config: RunConfig,
    seed: Optional[int] = None,
    mode: Optional[str] = None,
    tol: Optional[float] = None,
    workers: Optional[int] = None,
) -> RunConfig:
    """Apply command-line overrides on top of file values."""
    updates = {}
    if seed is not None:
        if seed < 0:
            raise ValidationError(f"must be non-negative, got {seed}", "--seed")
        updates["seed"] = seed
    if mode is not None:
        updates["mode"] = Mode(mode)
    if tol is not None:
        if not (math.isfinite(tol) and tol >= 0):
            raise ValidationError(f"must be a non-negative number, got {tol}", "--tol")
        updates["tol"] = tol
    if workers is not None:
        if workers < 1:
            raise ValidationError(f"must be at least 1, got {workers}", "--workers")
        updates["workers"] = workers
    return replace(config, **updates) if updates else config


# =============================================================================
# Parameter access
# =============================================================================

def _component(value: complex, component: str) -> float:
    return {
        "mag": abs(value),
        "phase": cmath.phase(value),
        "re": value.real,
        "im": value.imag,
    }[component]


def _with_component(value: complex, component: str, x: float) -> complex:
    if component == "mag":
        return cmath.rect(x, cmath.phase(value))
    if component == "phase":
        return cmath.rect(abs(value), x)
    if component == "re":
        return complex(x, value.imag)
    return complex(value.real, x)


def get_parameter(config: RunConfig, path: str) -> float:
    """Read a sweepable real-valued leaf."""
    if path not in sweepable_parameters():
        raise ValidationError(f"not a sweepable parameter: {path!r}", "sweep.param")
    parts = path.split(".")
    ring = getattr(config, parts[0])
    if len(parts) == 4:
        junction = getattr(ring, parts[1])
        return _component(getattr(junction, parts[2]), parts[3])
    if parts[1] in LENGTH_KEYS:
        return getattr(ring.geometry, parts[1])
    return getattr(ring.physics, parts[1])


def set_parameter(config: RunConfig, path: str, value: float) -> RunConfig:
    """
    Copy of the config with one sweepable leaf replaced.

    Junction unitarity is not enforced here; sweeps report it per point.

    Raises:
        ValidationError: If the path is not sweepable or the value breaks a geometry/physics invariant
    """
    if path not in sweepable_parameters():
        raise ValidationError(f"not a sweepable parameter: {path!r}", "sweep.param")
    parts = path.split(".")
    ring: RingConfig = getattr(config, parts[0])
    if len(parts) == 4:
        junction: JunctionAmplitudes = getattr(ring, parts[1])
        amp = _with_component(getattr(junction, parts[2]), parts[3], value)
        ring = replace(ring, **{parts[1]: replace(junction, **{parts[2]: amp})})
    else:
        try:
            if parts[1] in LENGTH_KEYS:
                ring = replace(ring, geometry=replace(ring.geometry, **{parts[1]: value}))
            else:
                ring = replace(ring, physics=replace(ring.physics, **{parts[1]: value}))
        except ValidationError as e:
            raise ValidationError(str(e), parts[0]) from e
    return replace(config, **{parts[0]: ring})
