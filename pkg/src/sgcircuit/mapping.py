"""Circuit parameters, effective-theory regime checks and the map to sine-Gordon couplings.

All energies are frequencies in GHz (E/h). Positions are measured in units of the
SQUID spacing ``a0`` which is fixed to 1, so the velocity ``u`` carries GHz.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import DomainError, GaplessRegimeError

DEFAULT_STRICTNESS = 10.0


class Phase(str, enum.Enum):
    TOPOLOGICAL = "topological"
    TRIVIAL = "trivial"
    GAPLESS = "gapless"
    FREE_BOSON = "free_boson"


@dataclass(frozen=True)
class CircuitParams:
    """Physical inputs of the Josephson-junction array.

    Parameters
    ----------
    ej_a:
        Josephson energy of a coupler junction.
    ej_b:
        Effective (flux-tuned) Josephson energy of a SQUID. Negative when one
        flux quantum threads every SQUID.
    ec_a, ec_b:
        Charging energies ``e^2 / 2c`` of coupler junctions and SQUIDs.
    n_junctions:
        Junctions per coupler.
    m_squids:
        Number of couplers; the array has ``m_squids + 1`` SQUIDs.
    """

    ej_a: float
    ej_b: float
    ec_a: float
    ec_b: float
    n_junctions: int
    m_squids: int
    a0: float = 1.0

    def __post_init__(self):
        for name in ("ej_a", "ec_a", "ec_b"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        if not math.isfinite(self.ej_b):
            raise DomainError(f"ej_b must be finite, got {self.ej_b!r}")
        if int(self.n_junctions) != self.n_junctions or self.n_junctions < 2:
            raise DomainError(f"n_junctions must be an integer >= 2, got {self.n_junctions!r}")
        if int(self.m_squids) != self.m_squids or self.m_squids < 2:
            raise DomainError(f"m_squids must be an integer >= 2, got {self.m_squids!r}")
        if self.a0 != 1.0:
            raise DomainError("a0 is fixed to 1 (positions are in SQUID-spacing units)")
        object.__setattr__(self, "n_junctions", int(self.n_junctions))
        object.__setattr__(self, "m_squids", int(self.m_squids))


@dataclass(frozen=True)
class SgParams:
    """Sine-Gordon couplings of the continuum theory.

    ``soliton_mass`` is ``None`` when it is undefined (``lam == 0`` or ``K >= 2``).
    ``ec_b`` is kept because the soliton mass and the semiclassical breather
    scale are expressed through it.
    """

    u: float
    stiffness_k: float
    lam: float
    length: float
    ec_b: float
    soliton_mass: float | None = None
    xi: float = field(init=False)

    def __post_init__(self):
        if not self.u > 0:
            raise DomainError(f"velocity u must be positive, got {self.u!r}")
        if not self.stiffness_k > 0:
            raise DomainError(f"stiffness K must be positive, got {self.stiffness_k!r}")
        object.__setattr__(self, "xi", xi_from_k(self.stiffness_k) if self.stiffness_k < 2 else math.inf)

    @property
    def breather_scale(self) -> float:
        """Semiclassical fundamental breather mass sqrt(2 E_C^b |E_J^b|) (a0 = 1)."""
        return math.sqrt(2.0 * self.ec_b * abs(self.lam))

    @property
    def inverse_inductance(self) -> float:
        """Coupler inverse inductance u / (4 pi K a0), equal to E_J^a / N."""
        return self.u / (4.0 * math.pi * self.stiffness_k)


@dataclass(frozen=True)
class Margin:
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class RegimeReport:
    ratio_ejb_eja: float
    ratio_eca_eja: float
    ratio_time: float
    ratio_space: float
    strictness: float
    margins: tuple[Margin, ...]
    valid: bool


def xi_from_k(k: float) -> float:
    return k / (2.0 - k)


def k_from_xi(xi: float) -> float:
    return 2.0 * xi / (1.0 + xi)


def velocity(ej_a: float, ec_b: float, n_junctions: float, a0: float = 1.0) -> float:
    """u = a0 sqrt(2 E_J^a E_C^b / N)."""
    return a0 * math.sqrt(2.0 * ej_a * ec_b / n_junctions)


def stiffness(ej_a: float, ec_b: float, n_junctions: float) -> float:
    """K = sqrt(2 N E_C^b / E_J^a) / (4 pi)."""
    return math.sqrt(2.0 * n_junctions * ec_b / ej_a) / (4.0 * math.pi)


def sg_params(ej_a, ej_b, ec_b, n_junctions, length, *, allow_gapless=False) -> SgParams:
    """Build :class:`SgParams` from the couplings that enter the continuum theory.

    Unlike :func:`map_circuit_to_sg` this accepts any ``n_junctions >= 1``
    since the formulas themselves do not need ``N >= 2``; only the regime checks do.
    """
    # imported here: spectrum depends on this module
    from .spectrum import soliton_mass

    if n_junctions < 1:
        raise DomainError(f"n_junctions must be >= 1, got {n_junctions!r}")
    u = velocity(ej_a, ec_b, n_junctions)
    k = stiffness(ej_a, ec_b, n_junctions)
    if k >= 2 and not allow_gapless:
        raise GaplessRegimeError(
            f"K = {k:.6g} >= 2: gapless regime, sine-Gordon cosine irrelevant"
        )
    mass = None
    if ej_b != 0 and k < 2:
        mass = soliton_mass(abs(ej_b), ec_b, k)
    return SgParams(u=u, stiffness_k=k, lam=float(ej_b), length=float(length), ec_b=ec_b, soliton_mass=mass)


def map_circuit_to_sg(params: CircuitParams, *, allow_gapless: bool = False) -> SgParams:
    """Map circuit parameters to (u, K, lambda, xi, m, L).

    Raises :class:`GaplessRegimeError` for ``K >= 2`` unless ``allow_gapless``
    is set, in which case the soliton mass is left undefined.
    """
    return sg_params(
        params.ej_a,
        params.ej_b,
        params.ec_b,
        params.n_junctions,
        params.m_squids * params.a0,
        allow_gapless=allow_gapless,
    )


def validate_regime(params: CircuitParams, strictness: float = DEFAULT_STRICTNESS) -> RegimeReport:
    """Check the inequalities under which the couplers can be integrated out.

    Each "much smaller than" is read as "smaller by at least a factor
    ``strictness``": a ratio passes when ``ratio <= 1 / strictness``.
    """
    if not strictness > 1:
        raise DomainError(f"strictness must exceed 1, got {strictness!r}")
    n = params.n_junctions
    ratio_ejb = abs(params.ej_b) / params.ej_a
    ratio_eca = params.ec_a / params.ej_a
    ratio_time = ratio_ejb / ((n / (n - 1)) * (params.ec_a / params.ec_b))
    ratio_space = params.ec_b / ((n - 1) * params.ec_a)
    threshold = 1.0 / strictness
    margins = tuple(
        Margin(name, value, threshold, value <= threshold)
        for name, value in (
            ("josephson_hierarchy", ratio_ejb),
            ("coupler_charging", ratio_eca),
            ("time_scale_separation", ratio_time),
            ("spatial_locality", ratio_space),
        )
    )
    return RegimeReport(
        ratio_ejb_eja=ratio_ejb,
        ratio_eca_eja=ratio_eca,
        ratio_time=ratio_time,
        ratio_space=ratio_space,
        strictness=float(strictness),
        margins=margins,
        valid=all(m.passed for m in margins),
    )


def classify_phase(sg: SgParams) -> Phase:
    if sg.lam == 0:
        return Phase.FREE_BOSON
    if sg.stiffness_k >= 2:
        return Phase.GAPLESS
    return Phase.TOPOLOGICAL if sg.lam < 0 else Phase.TRIVIAL
