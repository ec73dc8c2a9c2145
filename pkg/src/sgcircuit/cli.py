"""Command-line interface: ``sg-circuit <command> --config <file> [--out <dir>] [--format csv|json]``.

Exit status is 0 on success, 1 when the physics refuses the request
(:class:`~sgcircuit.errors.DomainError`) and 2 for configuration problems.
The output directory is taken from ``--out``, then the ``SG_CIRCUIT_OUT``
environment variable, then ``output.dir`` in the config, then the current
directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import io as sgio
from .design import PARAM_ORDER, DesignSpace, optimize_delta, sweep
from .errors import ConfigError, DomainError
from .mapping import DEFAULT_STRICTNESS, CircuitParams, classify_phase, map_circuit_to_sg, validate_regime
from .profiles import current_profile, edge_profile, integrate
from .solver import Branch, compare_lattice_to_continuum, relax_lattice, solve_continuum_kink, solve_lattice_ground_states
from .spectrum import enumerate_spectrum

COMMANDS = ("map", "validate", "spectrum", "profiles", "solve", "sweep", "optimize")
OUT_ENV = "SG_CIRCUIT_OUT"


def _circuit(config: sgio.RunConfig) -> CircuitParams:
    missing = [k for k in PARAM_ORDER if k not in config.circuit]
    if missing:
        raise ConfigError(f"circuit is missing {missing}")
    return CircuitParams(**config.circuit)


def _option(config, name, default):
    return config.options.get(name, default)


def cmd_map(config, out: Path, formats):
    sg = map_circuit_to_sg(_circuit(config), allow_gapless=True)
    report = {"sg_params": sg, "phase": classify_phase(sg)}
    return [sgio.write_json(out / "sg_params.json", report)]


def cmd_validate(config, out: Path, formats):
    report = validate_regime(_circuit(config), _option(config, "strictness", DEFAULT_STRICTNESS))
    return [sgio.write_json(out / "regime_report.json", report)]


def cmd_spectrum(config, out: Path, formats):
    sg = map_circuit_to_sg(_circuit(config), allow_gapless=True)
    catalog = enumerate_spectrum(sg, _option(config, "energy_cap", None))
    rows = [(s.energy, s.label, s.kind, s.tower, s.p, s.q, s.flags) for s in catalog.states]
    return [
        sgio.write_json(out / "spectrum.json", catalog),
        sgio.write_csv(out / "levels.csv", "levels", rows),
    ]


def cmd_profiles(config, out: Path, formats):
    sg = map_circuit_to_sg(_circuit(config), allow_gapless=True)
    profile = edge_profile(
        sg,
        _option(config, "regime", None),
        _option(config, "ground_state", "left"),
        points_per_decay=_option(config, "points_per_decay", 128),
    )
    currents = current_profile(sg, profile)
    phase = profile.phase if profile.phase is not None else [None] * len(profile.grid)
    edge_rows = zip(profile.grid, profile.delta_phi_l, profile.delta_phi_r, profile.phi_density, phase)
    current_rows = zip(currents.grid, currents.i_coupler, currents.i_squid)
    summary = {
        "regime": profile.regime,
        "ground_state": profile.ground_state,
        "scale": profile.scale,
        "decay_length": profile.decay_length,
        "normalization_l": integrate(profile, profile.delta_phi_l),
        "conservation_residual": currents.conservation_residual,
        "flags": profile.flags,
    }
    return [
        sgio.write_csv(out / "edge_profile.csv", "edge_profile", edge_rows),
        sgio.write_csv(out / "current_profile.csv", "current_profile", current_rows),
        sgio.write_json(out / "profiles.json", summary),
    ]


def _lattice_rows(state):
    i_c, i_s = state.i_coupler, state.i_squid
    rows = []
    for k, phi in enumerate(state.phi):
        squid = i_s[k] if 0 < k < len(state.phi) - 1 else None
        coupler = i_c[k] if k < len(i_c) else None
        rows.append((k, phi, squid, coupler))
    return rows


def cmd_solve(config, out: Path, formats):
    params = _circuit(config)
    sg = map_circuit_to_sg(params)
    ppd = _option(config, "points_per_decay", 64)
    scheme = _option(config, "scheme", "numerov")
    mode = _option(config, "lattice_mode", "effective")
    paths = []
    summary = {"phase": classify_phase(sg), "bvp": {}, "lattice": {}}
    if sg.lam < 0:
        states = dict(zip((Branch.PLUS_PI, Branch.MINUS_PI), solve_lattice_ground_states(params, mode)))
        branches = list(states)
    else:
        states = {Branch.TRIVIAL: relax_lattice(params, np.zeros(params.m_squids + 1), mode)}
        branches = [Branch.TRIVIAL]
    for branch in branches:
        bvp = solve_continuum_kink(sg, branch, points_per_decay=ppd, scheme=scheme)
        lat = states[branch]
        paths.append(sgio.write_csv(
            out / f"bvp_{branch.value}.csv", "bvp", zip(bvp.grid, bvp.phi, bvp.coupler_current())
        ))
        paths.append(sgio.write_csv(out / f"lattice_{branch.value}.csv", "lattice", _lattice_rows(lat)))
        entry = {"energy": lat.energy, "converged": lat.converged, "gradient_norm": lat.gradient_norm,
                 "conservation_residual": lat.conservation_residual}
        if branch is not Branch.TRIVIAL:
            entry["continuum"] = compare_lattice_to_continuum(lat, bvp)
        summary["bvp"][branch.value] = {"energy": bvp.energy, "converged": bvp.converged, "residual": bvp.residual}
        summary["lattice"][branch.value] = entry
    paths.append(sgio.write_json(out / "solve.json", summary))
    return paths


def _space(config) -> DesignSpace:
    block = config.sweep
    if not block:
        raise ConfigError("sweep block is required for sweep/optimize")
    fixed = {k: v for k, v in config.circuit.items() if k not in block["ranges"]}
    try:
        return DesignSpace(
            ranges=block["ranges"],
            fixed=fixed,
            strictness=block.get("strictness", _option(config, "strictness", DEFAULT_STRICTNESS)),
            k_max=block.get("k_max", 0.5),
            require_boundary=block.get("require_boundary", True),
        )
    except DomainError as exc:
        # a malformed range is a config problem, not a physics refusal
        raise ConfigError(f"invalid sweep block: {exc}") from exc


def _candidate_row(c):
    p = c.params
    return (p.ej_a, p.ej_b, p.ec_a, p.ec_b, p.n_junctions, p.m_squids,
            c.sg.stiffness_k if c.sg else None, c.sg.soliton_mass if c.sg else None,
            c.delta, c.feasible, c.stable, c.regime.valid, c.violations, c.flags)


def _write_candidates(out: Path, stem: str, candidates, extra, formats):
    paths = []
    if "csv" in formats:
        paths.append(sgio.write_csv(out / f"{stem}.csv", "candidates", [_candidate_row(c) for c in candidates]))
    if "json" in formats:
        paths.append(sgio.write_json(out / f"{stem}.json", dict(extra, candidates=list(candidates))))
    return paths


def cmd_sweep(config, out: Path, formats):
    result = sweep(_space(config), workers=config.sweep.get("workers", 1))
    return _write_candidates(out, "candidates", result.candidates, {"diagnostics": result.diagnostics}, formats)


def cmd_optimize(config, out: Path, formats):
    best = optimize_delta(_space(config), config.sweep.get("budget", 200), workers=config.sweep.get("workers", 1))
    return _write_candidates(out, "optimum", [best], {}, formats)


HANDLERS = {
    "map": cmd_map,
    "validate": cmd_validate,
    "spectrum": cmd_spectrum,
    "profiles": cmd_profiles,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
}


def run(command: str, config: sgio.RunConfig, out_dir=None, fmt=None) -> list[Path]:
    """Execute one command and return the files it wrote."""
    if command not in HANDLERS:
        raise ConfigError(f"unknown command {command!r} (choose from {', '.join(COMMANDS)})")
    out = Path(out_dir or os.environ.get(OUT_ENV) or config.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    formats = (fmt,) if fmt else config.formats
    return HANDLERS[command](config, out, formats)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sg-circuit", description="Sine-Gordon Josephson array design tools.")
    parser.add_argument("command", help=f"one of: {', '.join(COMMANDS)}")
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and output.dir)")
    parser.add_argument("--format", choices=sgio.FORMATS, help="table format for sweep/optimize")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command not in HANDLERS:
            raise ConfigError(f"unknown command {args.command!r} (choose from {', '.join(COMMANDS)})")
        config = sgio.load_config(args.config)
        paths = run(args.command, config, args.out, args.format)
    except ConfigError as exc:
        print(f"sg-circuit: config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"sg-circuit: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
