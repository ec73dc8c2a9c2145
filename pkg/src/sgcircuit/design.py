"""Design-space sweeps and refinement of the boundary/bulk breather separation.

The figure of merit is ``delta = m_B1 - E_B1``: the spectroscopic distance
between the lowest boundary breather and the lightest bulk breather.
A design is feasible when the effective-theory regime holds, the
superconducting phase is stable against a Mott insulator (K < 1/2), K is
below ``k_max`` and boundary breathers exist.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .errors import DomainError
from .mapping import (
    DEFAULT_STRICTNESS,
    CircuitParams,
    Phase,
    RegimeReport,
    SgParams,
    classify_phase,
    map_circuit_to_sg,
    validate_regime,
)
from .spectrum import boundary_breather_energies, bulk_breather_masses, globally_stable

PARAM_ORDER = ("ej_a", "ej_b", "ec_a", "ec_b", "n_junctions", "m_squids")
INTEGER_PARAMS = frozenset({"n_junctions", "m_squids"})
INTEGER_SEARCH_FRACTION = 0.2
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ParamRange:
    min: float
    max: float
    steps: int
    scale: str = "linear"

    def __post_init__(self):
        if not self.min < self.max:
            raise DomainError(f"range needs min < max, got [{self.min}, {self.max}]")
        if int(self.steps) != self.steps or self.steps < 2:
            raise DomainError(f"range needs an integer steps >= 2, got {self.steps!r}")
        if self.scale not in ("linear", "log"):
            raise DomainError(f"scale must be 'linear' or 'log', got {self.scale!r}")
        if self.scale == "log" and self.min * self.max <= 0:
            raise DomainError("log-scaled range must not contain or touch zero")

    def values(self, integer: bool = False) -> list:
        if self.scale == "log":
            pts = np.geomspace(self.min, self.max, int(self.steps))
        else:
            pts = np.linspace(self.min, self.max, int(self.steps))
        if integer:
            return sorted({int(round(v)) for v in pts})
        return [float(v) for v in pts]

    def to_unit(self, value: float) -> float:
        if self.scale == "log":
            return math.log(abs(value))
        return value

    def from_unit(self, t: float) -> float:
        if self.scale == "log":
            return math.copysign(math.exp(t), self.min)
        return t


@dataclass(frozen=True)
class DesignSpace:
    ranges: dict
    fixed: dict
    strictness: float = DEFAULT_STRICTNESS
    k_max: float = 0.5
    require_boundary: bool = True

    def __post_init__(self):
        ranges = {name: r if isinstance(r, ParamRange) else ParamRange(**r) for name, r in self.ranges.items()}
        object.__setattr__(self, "ranges", ranges)
        names = set(ranges) | set(self.fixed)
        overlap = set(ranges) & set(self.fixed)
        if overlap:
            raise DomainError(f"parameters both ranged and fixed: {sorted(overlap)}")
        missing = set(PARAM_ORDER) - names
        unknown = names - set(PARAM_ORDER)
        if missing or unknown:
            raise DomainError(f"design space must cover {PARAM_ORDER}; missing {sorted(missing)}, unknown {sorted(unknown)}")
        if not self.strictness > 1:
            raise DomainError(f"strictness must exceed 1, got {self.strictness!r}")

    def grid(self) -> list[dict]:
        axes = [
            (name, self.ranges[name].values(name in INTEGER_PARAMS))
            for name in PARAM_ORDER
            if name in self.ranges
        ]
        points = []
        for combo in itertools.product(*(values for _, values in axes)):
            point = dict(self.fixed)
            point.update(zip((name for name, _ in axes), combo))
            points.append(point)
        return points


@dataclass(frozen=True)
class DesignCandidate:
    params: CircuitParams
    sg: SgParams | None
    phase: Phase | None
    delta: float | None
    regime: RegimeReport
    stable: bool
    feasible: bool
    violations: tuple[str, ...] = ()
    flags: tuple[str, ...] = ()

    def sort_key(self):
        delta = -self.delta if self.delta is not None else math.inf
        return (not self.feasible, delta, tuple(getattr(self.params, n) for n in PARAM_ORDER))


@dataclass(frozen=True)
class SweepResult:
    candidates: tuple[DesignCandidate, ...]
    diagnostics: dict = field(default_factory=dict)

    @property
    def feasible(self) -> tuple[DesignCandidate, ...]:
        return tuple(c for c in self.candidates if c.feasible)

    def __iter__(self):
        return iter(self.candidates)

    def __len__(self):
        return len(self.candidates)


def breather_separation(sg: SgParams) -> float | None:
    """m_B1 - E_B1 for a topological SgParams, else ``None``."""
    if classify_phase(sg) is not Phase.TOPOLOGICAL or sg.soliton_mass is None:
        return None
    bulk = bulk_breather_masses(sg.soliton_mass, sg.xi)
    boundary = boundary_breather_energies(sg.soliton_mass, sg.xi)
    if not (bulk and boundary):
        return None
    return bulk[0].energy - boundary[0].energy


def evaluate_design(point: dict, strictness=DEFAULT_STRICTNESS, k_max=0.5, require_boundary=True) -> DesignCandidate:
    params = CircuitParams(**point)
    regime = validate_regime(params, strictness)
    sg = map_circuit_to_sg(params, allow_gapless=True)
    phase = classify_phase(sg)
    k = sg.stiffness_k
    stable = globally_stable(k)
    delta = breather_separation(sg)

    violations = []
    if not regime.valid:
        violations.append("regime")
    if phase is not Phase.TOPOLOGICAL:
        violations.append(f"phase:{phase.value}")
    if not stable:
        violations.append("mott_cdw")
    if not k < k_max:
        violations.append("k_max")
    if require_boundary and delta is None:
        violations.append("no_boundary_breathers")
    if delta is not None and not delta > 0:
        violations.append("delta_nonpositive")
    return DesignCandidate(
        params=params,
        sg=sg,
        phase=phase,
        delta=delta,
        regime=regime,
        stable=stable,
        feasible=not violations and delta is not None,
        violations=tuple(violations),
    )


def _evaluator(space: DesignSpace):
    return partial(
        evaluate_design, strictness=space.strictness, k_max=space.k_max, require_boundary=space.require_boundary
    )


def sweep(space: DesignSpace, *, workers: int = 1) -> SweepResult:
    """Evaluate every grid point; feasible first, then by delta (descending).

    Ties are broken lexicographically on the parameter tuple, so the order is
    independent of ``workers``.
    """
    evaluate = _evaluator(space)
    points = space.grid()
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, points, chunksize=max(1, len(points) // (4 * workers))))
    else:
        results = [evaluate(p) for p in points]
    results.sort(key=DesignCandidate.sort_key)

    diagnostics = {"points": len(results), "feasible": sum(c.feasible for c in results)}
    for cand in results:
        for v in cand.violations:
            diagnostics[v] = diagnostics.get(v, 0) + 1
    return SweepResult(tuple(results), diagnostics)


class _Budget:
    def __init__(self, evaluate, limit):
        self.evaluate = evaluate
        self.left = int(limit)
        self.used = 0

    def __call__(self, point):
        if self.left <= 0:
            return None
        self.left -= 1
        self.used += 1
        return self.evaluate(point)


def _better(a: DesignCandidate | None, b: DesignCandidate) -> bool:
    """True when ``a`` is feasible with a strictly larger delta than ``b``."""
    return a is not None and a.feasible and a.delta > b.delta


def _point(cand: DesignCandidate) -> dict:
    return {name: getattr(cand.params, name) for name in PARAM_ORDER}


def _golden_section(budget, base, name, rng, best, tol=1e-10):
    a, b = rng.to_unit(rng.min), rng.to_unit(rng.max)

    def score(t):
        point = dict(base)
        point[name] = rng.from_unit(t)
        cand = budget(point)
        if cand is None:
            return None, -math.inf
        return cand, cand.delta if cand.feasible else -math.inf

    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    cand_c, fc = score(c)
    cand_d, fd = score(d)
    for cand in (cand_c, cand_d):
        if _better(cand, best):
            best = cand
    while abs(b - a) > tol * max(1.0, abs(a), abs(b)) and budget.left > 0:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            cand, fc = score(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            cand, fd = score(d)
        if _better(cand, best):
            best = cand
    # the optimum often sits on a bound
    for edge in (rng.min, rng.max):
        point = dict(base)
        point[name] = edge
        cand = budget(point)
        if _better(cand, best):
            best = cand
    return best


def optimize_delta(space: DesignSpace, budget: int = 200, *, workers: int = 1) -> DesignCandidate:
    """Refine the best feasible grid point by coordinate descent.

    Continuous parameters are refined by golden-section search over their
    whole range; integer parameters by exhaustive search within +-20% of the
    current value. ``budget`` caps the number of evaluations after the grid.
    The grid winner comes back flagged ``no-improvement`` when nothing better
    is found.
    """
    grid = sweep(space, workers=workers)
    if not grid.feasible:
        raise DomainError(f"no feasible grid point to refine (diagnostics: {grid.diagnostics})")
    winner = grid.feasible[0]
    best = winner
    counter = _Budget(_evaluator(space), budget)
    continuous = [n for n in PARAM_ORDER if n in space.ranges and n not in INTEGER_PARAMS]
    integers = [n for n in PARAM_ORDER if n in space.ranges and n in INTEGER_PARAMS]

    while counter.left > 0:
        start = best
        for name in continuous:
            best = _golden_section(counter, _point(best), name, space.ranges[name], best)
        for name in integers:
            rng = space.ranges[name]
            centre = getattr(best.params, name)
            lo = max(int(math.ceil(rng.min)), int(math.floor(centre * (1 - INTEGER_SEARCH_FRACTION))))
            hi = min(int(math.floor(rng.max)), int(math.ceil(centre * (1 + INTEGER_SEARCH_FRACTION))))
            base = _point(best)
            for value in range(lo, hi + 1):
                if value == centre:
                    continue
                point = dict(base)
                point[name] = value
                cand = counter(point)
                if _better(cand, best):
                    best = cand
        if best is start:
            break

    if best is winner:
        return dataclasses.replace(winner, flags=winner.flags + ("no-improvement",))
    return best
