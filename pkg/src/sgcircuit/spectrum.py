"""Exact excitation spectrum of the sine-Gordon array.

Soliton mass from the exact mass formula, bulk and boundary breathers,
the boundary-breather towers built on the two ground states, the
Mott/CDW scaling-dimension rule, and the edge Pauli/Majorana algebra of the
ground-state manifold as explicit matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedPhaseError
from .mapping import Phase, SgParams, classify_phase, xi_from_k

# relative tolerance for deciding that 1/xi (or 1/2xi) is an exact integer
FLOOR_TIE_RTOL = 1e-12
# closest approach to the Gamma(1 - K/2) pole that is still evaluated
K_POLE_GUARD = 1e-6
CAP_RTOL = 1e-12


@dataclass(frozen=True)
class Level:
    index: int
    energy: float
    threshold: bool = False


@dataclass(frozen=True)
class State:
    label: str
    energy: float
    kind: str
    tower: str | None = None
    p: int | None = None
    q: int | None = None
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class SpectrumCatalog:
    phase: Phase
    stiffness_k: float
    xi: float
    soliton_mass: float
    energy_cap: float
    ground_states: tuple[State, ...]
    soliton_states: tuple[State, ...]
    bulk_breathers: tuple[Level, ...]
    boundary_levels: tuple[Level, ...]
    breather_states: tuple[State, ...]
    tower_states: tuple[State, ...]
    continuum_threshold: float
    midgap_separation: float | None

    @property
    def states(self) -> tuple[State, ...]:
        """Every enumerated state below the cap, sorted by energy then label."""
        allstates = self.ground_states + self.soliton_states + self.breather_states + self.tower_states
        return tuple(sorted(allstates, key=lambda s: (s.energy, s.label)))


@dataclass(frozen=True)
class StabilityReport:
    n: int
    dim_super: float
    dim_insulator: float
    superconducting_stable: bool


@dataclass(frozen=True)
class GroundManifoldAlgebra:
    """Operators on the ground-state manifold.

    The 2x2 operators act on the basis (|0_L>, |0_R>). The 4x4 operators act
    on the two-edge space |s_L> (x) |s_R> with |up> = |+1/2>, so that
    |0_L> = |up, down> and |0_R> = |down, up>.
    """

    sigma_l: np.ndarray
    sigma_r: np.ndarray
    c_op: np.ndarray
    tau_l: dict
    tau_r: dict
    majorana_l: np.ndarray
    majorana_r: np.ndarray
    conjugation: np.ndarray
    embedding: np.ndarray


def soliton_mass(ej_b_abs: float, ec_b: float, k: float) -> float:
    """Soliton mass in GHz from the exact mass formula in circuit units.

    Evaluated in log space with ``math.lgamma`` so that it stays finite for
    small K where the individual Gamma factors become large.
    """
    if not k > 0:
        raise DomainError(f"soliton mass needs K > 0, got {k!r}")
    if 2.0 - k < K_POLE_GUARD:
        raise DomainError(f"K = {k!r} too close to 2 (pole of Gamma(1 - K/2))")
    if not (ej_b_abs > 0 and ec_b > 0):
        raise DomainError("soliton mass needs |E_J^b| > 0 and E_C^b > 0")
    xi = xi_from_k(k)
    inv = 1.0 / (2.0 - k)
    log_ratio = (
        inv * math.log(ej_b_abs / ec_b)
        + math.log(2.0)
        + math.lgamma(xi / 2.0)
        - (1.0 - k) * inv * math.log(2.0 * math.pi * k)
        - 0.5 * math.log(math.pi)
        - math.lgamma((1.0 + xi) / 2.0)
        + inv * (math.log(math.pi) + math.lgamma(1.0 - k / 2.0) - math.log(2.0) - math.lgamma(k / 2.0))
    )
    mass = ec_b * math.exp(log_ratio)
    if not (math.isfinite(mass) and mass > 0):
        raise DomainError(f"soliton mass overflow at K = {k!r}")
    return mass


def soliton_energy(mass: float, rapidity):
    """Dispersion m cosh(theta) of a propagating soliton."""
    return mass * np.cosh(rapidity)


def _integer_part(x: float) -> tuple[int, bool]:
    """Integer part of x and whether x is (numerically) an exact integer."""
    nearest = round(x)
    if nearest >= 1 and abs(x - nearest) <= FLOOR_TIE_RTOL * abs(x):
        return int(nearest), True
    return int(math.floor(x)), False


def bulk_breather_masses(mass: float, xi: float) -> list[Level]:
    if not (mass > 0 and xi > 0):
        raise DomainError("bulk breathers need m > 0 and xi > 0")
    count, tie = _integer_part(1.0 / xi)
    return [
        Level(p, 2.0 * mass * math.sin(p * math.pi * xi / 2.0), threshold=tie and p == count)
        for p in range(1, count + 1)
    ]


def boundary_breather_energies(mass: float, xi: float) -> list[Level]:
    if not (mass > 0 and xi > 0):
        raise DomainError("boundary breathers need m > 0 and xi > 0")
    count, tie = _integer_part(1.0 / (2.0 * xi))
    return [
        Level(p, mass * math.sin(p * math.pi * xi), threshold=tie and p == count)
        for p in range(1, count + 1)
    ]


def enumerate_spectrum(sg: SgParams, energy_cap: float | None = None) -> SpectrumCatalog:
    """Classify all excitations up to ``energy_cap`` (default ``2m``).

    Continuum states are represented by their thresholds only. The cap is
    inclusive up to a relative 1e-12 so that states sitting exactly on it
    (e.g. ``2 E_B2 = 2m`` at K = 2/5) are kept.
    """
    phase = classify_phase(sg)
    if phase not in (Phase.TOPOLOGICAL, Phase.TRIVIAL):
        raise UnsupportedPhaseError(f"no gapped spectrum in the {phase.value} phase")
    m = sg.soliton_mass
    if m is None:
        m = soliton_mass(abs(sg.lam), sg.ec_b, sg.stiffness_k)
    cap = 2.0 * m if energy_cap is None else float(energy_cap)
    if not cap > 0:
        raise DomainError(f"energy_cap must be positive, got {energy_cap!r}")
    limit = cap * (1.0 + CAP_RTOL)
    xi = sg.xi

    bulk = bulk_breather_masses(m, xi)
    topological = phase is Phase.TOPOLOGICAL
    boundary = boundary_breather_energies(m, xi) if topological else []
    lightest = bulk[0].energy if bulk else math.inf
    threshold = min(m, lightest) if topological else min(2.0 * m, lightest)

    if topological:
        ground = (State("0_L", 0.0, "ground", tower="L"), State("0_R", 0.0, "ground", tower="R"))
        solitons = tuple(
            State(label, m, "soliton", flags=("propagating",)) for label in ("S", "S_bar") if m <= limit
        )
    else:
        ground = (State("0", 0.0, "ground"),)
        # single solitons are absent; the first soliton excitation is a pair at 2m
        solitons = ()
        if 2.0 * m <= limit:
            solitons = (State("S_Sbar_pair", 2.0 * m, "soliton_pair", flags=("propagating",)),)

    breathers = tuple(
        State(f"B{lv.index}", lv.energy, "bulk_breather", p=lv.index,
              flags=("propagating",) + (("threshold",) if lv.threshold else ()))
        for lv in bulk
        if lv.energy <= limit
    )

    towers = []
    levels = [Level(0, 0.0)] + boundary
    for tower in ("L", "R"):
        for left in levels:
            for right in levels:
                if left.index == 0 and right.index == 0:
                    continue
                energy = left.energy + right.energy
                if energy > limit:
                    continue
                flags = []
                if energy < threshold:
                    flags.append("midgap")
                if left.threshold or right.threshold:
                    flags.append("threshold")
                towers.append(
                    State(f"0_{tower}[{left.index},{right.index}]", energy, "boundary_tower",
                          tower=tower, p=left.index, q=right.index, flags=tuple(flags))
                )

    midgap = bulk[0].energy - boundary[0].energy if (bulk and boundary) else None
    return SpectrumCatalog(
        phase=phase,
        stiffness_k=sg.stiffness_k,
        xi=xi,
        soliton_mass=m,
        energy_cap=cap,
        ground_states=ground,
        soliton_states=solitons,
        bulk_breathers=tuple(bulk),
        boundary_levels=tuple(boundary),
        breather_states=breathers,
        tower_states=tuple(towers),
        continuum_threshold=threshold,
        midgap_separation=midgap,
    )


def midgap_separation(catalog: SpectrumCatalog) -> float | None:
    """m_B1 - E_B1, or ``None`` when there are no boundary breathers."""
    return catalog.midgap_separation


def mott_cdw_stability(k: float, n: int = 1) -> StabilityReport:
    if not k > 0:
        raise DomainError(f"K must be positive, got {k!r}")
    if int(n) != n or n < 1:
        raise DomainError(f"commensurability order n must be a positive integer, got {n!r}")
    n = int(n)
    return StabilityReport(n=n, dim_super=k, dim_insulator=n * n / (4.0 * k), superconducting_stable=k < n / 2.0)


def globally_stable(k: float) -> bool:
    """Stable against every commensurate insulator; n = 1 is the worst case."""
    return mott_cdw_stability(k, 1).superconducting_stable


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_I2 = np.eye(2, dtype=complex)


def ground_manifold_algebra() -> GroundManifoldAlgebra:
    tau_l = {axis: np.kron(mat, _I2) for axis, mat in _PAULI.items()}
    tau_r = {axis: np.kron(_I2, mat) for axis, mat in _PAULI.items()}
    majorana_l = tau_l["z"]
    majorana_r = tau_l["y"] @ tau_r["x"]
    conjugation = tau_l["x"] @ tau_r["x"]

    # columns: |0_L> = |up,down> (index 1), |0_R> = |down,up> (index 2)
    embedding = np.zeros((4, 2), dtype=complex)
    embedding[1, 0] = 1.0
    embedding[2, 1] = 1.0

    def restrict(op):
        return embedding.conj().T @ op @ embedding

    alg = GroundManifoldAlgebra(
        sigma_l=restrict(tau_l["z"] / 2),
        sigma_r=restrict(tau_r["z"] / 2),
        c_op=restrict(conjugation),
        tau_l=tau_l,
        tau_r=tau_r,
        majorana_l=majorana_l,
        majorana_r=majorana_r,
        conjugation=conjugation,
        embedding=embedding,
    )
    _check_algebra(alg)
    return alg


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def _check_algebra(alg: GroundManifoldAlgebra) -> None:
    eye2, eye4 = np.eye(2), np.eye(4)
    checks = {
        "sigma_l": np.array_equal(alg.sigma_l, np.diag([0.5, -0.5])),
        "sigma_r": np.array_equal(alg.sigma_r, np.diag([-0.5, 0.5])),
        "total phase": not np.any(alg.sigma_l + alg.sigma_r),
        "C|0_L> = |0_R>": np.array_equal(alg.c_op @ [1, 0], [0, 1]),
        "C^2 = 1": np.array_equal(alg.c_op @ alg.c_op, eye2),
        "{xi_L, xi_L} = 2": np.array_equal(anticommutator(alg.majorana_l, alg.majorana_l), 2 * eye4),
        "{xi_R, xi_R} = 2": np.array_equal(anticommutator(alg.majorana_r, alg.majorana_r), 2 * eye4),
        "{xi_L, xi_R} = 0": not np.any(anticommutator(alg.majorana_l, alg.majorana_r)),
        "C = i xi_L xi_R": np.array_equal(1j * alg.majorana_l @ alg.majorana_r, alg.conjugation),
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise RuntimeError(f"ground-manifold algebra violated: {failed}")
