"""Configuration parsing and report serialization.

Configs are JSON documents::

    {
      "schema_version": 1,
      "units": {"energy": "GHz", "capacitance": "fF"},
      "circuit": {"ej_a": 100, "ej_b": -10, "ec_a": 1, "ec_b": 1,
                  "n_junctions": 500, "m_squids": 100},
      "options": {"strictness": 10},
      "sweep": {"ranges": {"ej_b": {"min": -10, "max": -1, "steps": 10, "scale": "log"}}},
      "output": {"dir": "out", "formats": ["json"]}
    }

Charging energies may be replaced by capacitances ``c_a``/``c_b`` (never
both), which are converted once here with E_C = e^2 / (2 c h).
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

SCHEMA_VERSION = 1

# SI 2019 exact values
ELEMENTARY_CHARGE = 1.602176634e-19  # C
PLANCK = 6.62607015e-34  # J s

# divisors to GHz; dividing by an exact power of ten rounds correctly
ENERGY_UNITS = {"GHz": 1.0, "MHz": 1e3, "kHz": 1e6, "Hz": 1e9}
CAPACITANCE_UNITS = {"F": 1.0, "pF": 1e12, "fF": 1e15, "aF": 1e18}
ENERGY_KEYS = ("ej_a", "ej_b", "ec_a", "ec_b")
INTEGER_KEYS = ("n_junctions", "m_squids")
FORMATS = ("csv", "json")

CSV_SCHEMAS = {
    "levels": ("energy", "label", "kind", "tower", "p", "q", "flags"),
    "edge_profile": ("x", "delta_phi_l", "delta_phi_r", "phi_density", "phase"),
    "current_profile": ("x", "i_coupler", "i_squid"),
    "bvp": ("x", "phi", "i_coupler"),
    "lattice": ("site", "phi", "i_squid", "i_coupler_right"),
    "candidates": (
        "ej_a", "ej_b", "ec_a", "ec_b", "n_junctions", "m_squids",
        "stiffness_k", "soliton_mass", "delta", "feasible", "stable", "regime_valid", "violations", "flags",
    ),
}
CSV_VERSION = 1


def charging_energy_ghz(capacitance_farad: float) -> float:
    """E_C = e^2 / (2c), expressed as a frequency in GHz."""
    if not capacitance_farad > 0:
        raise ConfigError(f"capacitance must be positive, got {capacitance_farad!r}")
    return ELEMENTARY_CHARGE**2 / (2.0 * capacitance_farad) / PLANCK / 1e9


@dataclass
class RunConfig:
    circuit: dict
    options: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    out_dir: str | None = None
    formats: tuple[str, ...] = ("json",)


def _number(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    return value


def _energy_factor(units: dict) -> float:
    unit = units.get("energy")
    if unit is None:
        raise ConfigError("units.energy must be declared (one of %s)" % ", ".join(ENERGY_UNITS))
    if unit not in ENERGY_UNITS:
        raise ConfigError(f"unit mismatch: unsupported energy unit {unit!r}")
    return ENERGY_UNITS[unit]


def parse_circuit(raw: dict, units: dict, *, partial: bool = False) -> dict:
    """Validate a circuit block and convert it to GHz charging energies.

    With ``partial`` missing parameters are allowed (they come from sweep ranges).
    """
    if not isinstance(raw, dict):
        raise ConfigError("circuit must be an object")
    known = set(ENERGY_KEYS) | set(INTEGER_KEYS) | {"c_a", "c_b"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown circuit keys: {sorted(unknown)}")
    has_ec = any(k in raw for k in ("ec_a", "ec_b"))
    has_c = any(k in raw for k in ("c_a", "c_b"))
    if has_ec and has_c:
        raise ConfigError("supply either charging energies (ec_a, ec_b) or capacitances (c_a, c_b), not both")
    factor = _energy_factor(units)
    out = {}
    for key in ("ej_a", "ej_b", "ec_a", "ec_b"):
        if key in raw:
            out[key] = _number(key, raw[key]) / factor
    if has_c:
        cunit = units.get("capacitance")
        if cunit is None:
            raise ConfigError("units.capacitance must be declared when capacitances are given")
        if cunit not in CAPACITANCE_UNITS:
            raise ConfigError(f"unit mismatch: unsupported capacitance unit {cunit!r}")
        for key, target in (("c_a", "ec_a"), ("c_b", "ec_b")):
            if key in raw:
                out[target] = charging_energy_ghz(_number(key, raw[key]) / CAPACITANCE_UNITS[cunit])
    for key in INTEGER_KEYS:
        if key in raw:
            value = raw[key]
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{key} must be an integer, got {value!r}")
            out[key] = value
    if not partial:
        missing = [k for k in ENERGY_KEYS + INTEGER_KEYS if k not in out]
        if missing:
            raise ConfigError(f"circuit is missing {missing}")
    return out


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    units = doc.get("units")
    if not isinstance(units, dict):
        raise ConfigError("units block is required, e.g. {\"energy\": \"GHz\"}")
    sweep_block = doc.get("sweep") or {}
    if not isinstance(sweep_block, dict):
        raise ConfigError("sweep must be an object")
    circuit = parse_circuit(doc.get("circuit", {}), units, partial=bool(sweep_block))

    factor = _energy_factor(units)
    if sweep_block:
        ranges = {}
        for name, entry in (sweep_block.get("ranges") or {}).items():
            if not isinstance(entry, dict) or not {"min", "max", "steps"} <= set(entry):
                raise ConfigError(f"sweep range {name!r} needs min, max and steps")
            divisor = factor if name in ENERGY_KEYS else 1.0
            ranges[name] = {
                "min": _number(f"{name}.min", entry["min"]) / divisor,
                "max": _number(f"{name}.max", entry["max"]) / divisor,
                "steps": entry["steps"],
                "scale": entry.get("scale", "linear"),
            }
        sweep_block = dict(sweep_block, ranges=ranges)

    output = doc.get("output") or {}
    formats = tuple(output.get("formats", ("json",)))
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ConfigError(f"unsupported output formats {bad}")
    options = doc.get("options") or {}
    if not isinstance(options, dict):
        raise ConfigError("options must be an object")
    return RunConfig(circuit=circuit, options=options, sweep=sweep_block, out_dir=output.get("dir"), formats=formats)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return parse_config(doc)


def to_jsonable(obj):
    """Plain JSON structure; non-finite floats become ``None``."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"real": to_jsonable(obj.real), "imag": to_jsonable(obj.imag)}
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (tuple, list)):
        return ";".join(str(v) for v in value)
    return str(value)


def csv_text(schema: str, rows) -> str:
    columns = CSV_SCHEMAS[schema]
    buf = io.StringIO()
    buf.write(f"# sgcircuit {schema} v{CSV_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"{schema} row has {len(row)} cells, expected {len(columns)}")
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path, schema: str, rows) -> Path:
    path = Path(path)
    path.write_text(csv_text(schema, rows))
    return path


def read_csv(path) -> tuple[str, list[dict]]:
    """Read back a file written by :func:`write_csv`: (schema header, rows as dicts of strings)."""
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        return header, list(csv.DictReader(fh))
