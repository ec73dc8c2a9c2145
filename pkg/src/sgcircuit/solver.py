"""Static classical ground states on the continuum and on the lattice.

The continuum problem is the Dirichlet boundary-value problem of the static
sine-Gordon equation. The lattice problem minimises the discrete energy of
the SQUID phases, either with the couplers replaced by linear inductors
("effective") or with every coupler junction kept with its full cosine
potential ("full_array").

Sign conventions: the coupler current ``I_C(k) = (E_J^a/N)(Phi_k - Phi_{k-1})``
flows through coupler k (between nodes k-1 and k), the SQUID current is
``I_S(k) = E_J^b sin(Phi_k)``, and stationarity of the energy is the node
balance ``I_C(k+1) - I_C(k) - I_S(k) = 0``. The gradient of the energy with
respect to ``Phi_k`` is exactly minus that node residual.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline
from scipy.linalg import LinAlgError, cholesky_banded, cho_solve_banded, eigh_tridiagonal, solve_banded
from scipy.sparse.linalg import spsolve

from .errors import ConvergenceError, DegeneracyNotFoundError, DomainError
from .mapping import CircuitParams, Phase, SgParams, classify_phase, map_circuit_to_sg

DEFAULT_TOL = 1e-12
MAX_ITER = 200
MIN_SQUIDS = 8
FULL_ARRAY_MAX_SIZE = 100_000
BVP_POINTS_PER_DECAY = 64


class Branch(str, enum.Enum):
    PLUS_PI = "plus_pi"
    MINUS_PI = "minus_pi"
    TRIVIAL = "trivial"

    @property
    def sign(self) -> int:
        return {"plus_pi": 1, "minus_pi": -1, "trivial": 0}[self.value]


class Scheme(str, enum.Enum):
    NUMEROV = "numerov"
    CENTRAL = "central"


class LatticeMode(str, enum.Enum):
    EFFECTIVE = "effective"
    FULL_ARRAY = "full_array"


@dataclass(frozen=True)
class BvpSolution:
    grid: np.ndarray
    phi: np.ndarray
    branch: Branch
    energy: float
    converged: bool
    residual: float
    sg: SgParams
    scheme: Scheme
    iterations: int = 0

    def coupler_current(self, x=None):
        """I_C(x) = u/(4 pi K) dPhi/dx from a cubic spline of the solution."""
        spline = CubicSpline(self.grid, self.phi)
        x = self.grid if x is None else np.asarray(x, dtype=float)
        return self.sg.inverse_inductance * spline(x, 1)


@dataclass(frozen=True)
class LatticeState:
    phi: np.ndarray
    energy: float
    i_coupler: np.ndarray
    i_squid: np.ndarray
    params: CircuitParams
    mode: LatticeMode
    branch: Branch
    converged: bool
    gradient_norm: float
    theta: np.ndarray | None = None
    iterations: int = 0

    @property
    def node_currents(self) -> np.ndarray:
        """Rows (I_C in, I_C out, I_S) for every interior node k = 1..M-1."""
        return np.column_stack([self.i_coupler[:-1], self.i_coupler[1:], self.i_squid[1:-1]])

    @property
    def node_residuals(self) -> np.ndarray:
        nc = self.node_currents
        return nc[:, 1] - nc[:, 0] - nc[:, 2]

    @property
    def conservation_residual(self) -> float:
        return float(np.max(np.abs(self.node_residuals)))

    @property
    def max_current(self) -> float:
        return float(max(np.max(np.abs(self.i_coupler)), np.max(np.abs(self.i_squid))))


@dataclass(frozen=True)
class ContinuumComparison:
    phase_deviation: float
    current_deviation: float
    resolution: float
    continuum_valid: bool
    flags: tuple[str, ...] = field(default=())


# ---------------------------------------------------------------------------
# continuum boundary-value problem


def _bvp_grid(length, decay, points_per_decay, spacing):
    if spacing is None:
        n = int(math.ceil(length / decay * points_per_decay)) + 1
    else:
        n = int(round(length / spacing)) + 1
        if not math.isclose((n - 1) * spacing, length, rel_tol=1e-12):
            raise DomainError(f"spacing {spacing!r} does not divide length {length!r}")
    return np.linspace(0.0, length, n)


def continuum_energy(sg: SgParams, x: np.ndarray, phi: np.ndarray) -> float:
    """Discrete static energy: u/(8 pi K) int Phi'^2 + lambda int (1 - cos Phi)."""
    h = np.diff(x)
    gradient = np.sum((np.diff(phi) ** 2) / h) * sg.u / (8.0 * math.pi * sg.stiffness_k)
    potential = sg.lam * trapezoid(1.0 - np.cos(phi), x)
    return float(gradient + potential)


def solve_continuum_kink(
    sg: SgParams,
    branch=Branch.PLUS_PI,
    *,
    points_per_decay: float = BVP_POINTS_PER_DECAY,
    spacing: float | None = None,
    scheme=Scheme.NUMEROV,
    tol: float = 1e-10,
    max_iter: int = MAX_ITER,
) -> BvpSolution:
    """Solve u/(4 pi K) Phi'' = lambda sin(Phi) with Phi(0) = Phi(L) = 0.

    Newton iteration on the discretised equation, started from
    ``+-pi tanh(Mx/u) tanh(M(L-x)/u)``. The default Numerov discretisation
    is fourth order; ``scheme="central"`` gives the plain three-point
    Laplacian, which coincides with the effective lattice equations when the
    spacing equals a0. For ``lambda > 0`` the unique solution ``Phi = 0`` is
    returned with branch ``trivial``.

    The reported ``residual`` is the sup norm of the discrete equation
    divided by ``h^2 |c|`` with ``c = 4 pi K lambda / u``.
    """
    phase = classify_phase(sg)
    branch = Branch(branch)
    scheme = Scheme(scheme)
    if phase is Phase.TRIVIAL:
        x = _bvp_grid(sg.length, sg.u / sg.breather_scale, points_per_decay, spacing)
        phi = np.zeros_like(x)
        return BvpSolution(x, phi, Branch.TRIVIAL, 0.0, True, 0.0, sg, scheme)
    if phase is not Phase.TOPOLOGICAL:
        raise DomainError(f"no static kink solution in the {phase.value} phase")
    if branch is Branch.TRIVIAL:
        raise DomainError("branch must be plus_pi or minus_pi in the topological phase")

    mu = sg.breather_scale / sg.u
    x = _bvp_grid(sg.length, 1.0 / mu, points_per_decay, spacing)
    h = x[1] - x[0]
    c = 4.0 * math.pi * sg.stiffness_k * sg.lam / sg.u
    phi = branch.sign * math.pi * np.tanh(mu * x) * np.tanh(mu * (sg.length - x))
    phi[0] = phi[-1] = 0.0
    scale = h * h * abs(c)

    if scheme is Scheme.NUMEROV:
        w_side, w_mid = h * h / 12.0, 10.0 * h * h / 12.0
    else:
        w_side, w_mid = 0.0, h * h

    def residual(p):
        f = c * np.sin(p)
        return p[2:] - 2.0 * p[1:-1] + p[:-2] - (w_side * (f[2:] + f[:-2]) + w_mid * f[1:-1])

    res = residual(phi)
    norm = np.max(np.abs(res)) / scale
    it = 0
    while norm > tol and it < max_iter:
        it += 1
        fp = c * np.cos(phi)
        n_int = len(phi) - 2
        ab = np.zeros((3, n_int))
        ab[0, 1:] = 1.0 - w_side * fp[2:-1]
        ab[1, :] = -2.0 - w_mid * fp[1:-1]
        ab[2, :-1] = 1.0 - w_side * fp[1:-2]
        step = solve_banded((1, 1), ab, -res)
        alpha = 1.0
        while True:
            trial = phi.copy()
            trial[1:-1] += alpha * step
            trial_res = residual(trial)
            trial_norm = np.max(np.abs(trial_res)) / scale
            if trial_norm < norm or alpha < 1e-6:
                break
            alpha *= 0.5
        phi, res, norm = trial, trial_res, trial_norm

    if norm > tol:
        raise ConvergenceError(f"kink solver did not converge: residual {norm:.3e} after {it} iterations", norm)
    return BvpSolution(
        grid=x,
        phi=phi,
        branch=branch,
        energy=continuum_energy(sg, x, phi),
        converged=True,
        residual=float(norm),
        sg=sg,
        scheme=scheme,
        iterations=it,
    )


# ---------------------------------------------------------------------------
# lattice, effective inductive couplers


def lattice_energy(params: CircuitParams, phi) -> float:
    """(E_J^a / 2N) sum (Phi_k - Phi_{k-1})^2 + E_J^b sum (1 - cos Phi_k)."""
    phi = np.asarray(phi, dtype=float)
    g = params.ej_a / params.n_junctions
    return float(0.5 * g * np.sum(np.diff(phi) ** 2) + params.ej_b * np.sum(1.0 - np.cos(phi)))


def lattice_currents(params: CircuitParams, phi) -> tuple[np.ndarray, np.ndarray]:
    phi = np.asarray(phi, dtype=float)
    return (params.ej_a / params.n_junctions) * np.diff(phi), params.ej_b * np.sin(phi)


def lattice_gradient(params: CircuitParams, phi) -> np.ndarray:
    """dE/dPhi_k for all M+1 sites (boundary entries included, though pinned)."""
    phi = np.asarray(phi, dtype=float)
    g = params.ej_a / params.n_junctions
    grad = params.ej_b * np.sin(phi)
    d = g * np.diff(phi)
    grad[1:] += d
    grad[:-1] -= d
    return grad


def _interior_hessian_bands(params: CircuitParams, phi):
    g = params.ej_a / params.n_junctions
    diag = 2.0 * g + params.ej_b * np.cos(phi[1:-1])
    off = np.full(len(diag) - 1, -g)
    return diag, off


def _branch_initial(params: CircuitParams, sign: int) -> np.ndarray:
    k = np.arange(params.m_squids + 1, dtype=float)
    mu = math.sqrt(abs(params.ej_b) * params.n_junctions / params.ej_a)
    if mu == 0:
        mu = 1.0
    return sign * math.pi * np.tanh(k * mu) * np.tanh((params.m_squids - k) * mu)


def _armijo(fun, x, f0, slope, direction, alpha=1.0):
    # slack absorbs rounding in f once the predicted decrease drops below it
    slack = 8.0 * np.finfo(float).eps * max(1.0, abs(f0))
    while alpha > 1e-14:
        trial = x + alpha * direction
        f1 = fun(trial)
        if f1 <= f0 + 1e-4 * alpha * slope + slack:
            return trial, f1
        alpha *= 0.5
    return x, f0


def minimize_effective(params: CircuitParams, initial, *, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER):
    """Damped Newton descent of the effective lattice energy from ``initial``.

    Indefinite Hessians are shifted until positive definite. At a stationary
    point with negative curvature the iterate is pushed along the softest
    mode, so the result is a local minimum rather than a saddle.
    Returns ``(phi, converged, gradient_norm, iterations)``.
    """
    phi = np.array(initial, dtype=float)
    phi[0] = phi[-1] = 0.0
    g = params.ej_a / params.n_junctions
    curvature_scale = 4.0 * g + abs(params.ej_b)
    grad_tol = tol * max(g, abs(params.ej_b))

    def fun(interior):
        full = np.concatenate(([0.0], interior, [0.0]))
        return lattice_energy(params, full)

    x = phi[1:-1].copy()
    f = fun(x)
    it = 0
    while it < max_iter:
        it += 1
        full = np.concatenate(([0.0], x, [0.0]))
        grad = lattice_gradient(params, full)[1:-1]
        gnorm = np.max(np.abs(grad))
        diag, off = _interior_hessian_bands(params, full)
        if gnorm <= grad_tol:
            lowest, vec = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
            if lowest[0] >= -1e-9 * curvature_scale:
                return full, True, float(gnorm), it
            v = vec[:, 0]
            trial_p, fp = _armijo(fun, x, f, 0.5 * lowest[0], v)
            trial_m, fm = _armijo(fun, x, f, 0.5 * lowest[0], -v)
            x, f = (trial_p, fp) if fp <= fm else (trial_m, fm)
            continue
        shift = 0.0
        while True:
            ab = np.zeros((2, len(diag)))
            ab[0, 1:] = off
            ab[1, :] = diag + shift
            try:
                chol = cholesky_banded(ab)
                break
            except LinAlgError:
                shift = max(10.0 * shift, 1e-3 * curvature_scale)
        direction = -cho_solve_banded((chol, False), grad)
        x, f = _armijo(fun, x, f, float(grad @ direction), direction)
    full = np.concatenate(([0.0], x, [0.0]))
    return full, False, float(np.max(np.abs(lattice_gradient(params, full)[1:-1]))), it


# ---------------------------------------------------------------------------
# lattice, full array of coupler junctions


def _theta_last(phi, theta):
    """Phase drop on the N-th junction of each coupler from the loop rule."""
    return np.diff(phi) - theta.sum(axis=1)


def full_array_energy(params: CircuitParams, phi, theta) -> float:
    """Static potential of the complete circuit.

    ``theta`` holds the first N-1 junction phases of each coupler, shape (M, N-1).
    """
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    last = _theta_last(phi, theta)
    return float(
        params.ej_b * np.sum(1.0 - np.cos(phi))
        + params.ej_a * (np.sum(1.0 - np.cos(theta)) + np.sum(1.0 - np.cos(last)))
    )


def full_array_gradient(params: CircuitParams, phi, theta):
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    s_last = params.ej_a * np.sin(_theta_last(phi, theta))
    g_phi = params.ej_b * np.sin(phi)
    g_phi[1:] += s_last
    g_phi[:-1] -= s_last
    g_theta = params.ej_a * np.sin(theta) - s_last[:, None]
    return g_phi, g_theta


def _full_array_hessian(params: CircuitParams, phi, theta):
    m, nm1 = theta.shape
    n_phi = m - 1  # interior phases Phi_1..Phi_{M-1}
    c_last = params.ej_a * np.cos(_theta_last(phi, theta))
    rows, cols, vals = [], [], []

    # diagonal pieces
    idx_phi = np.arange(n_phi)
    rows.append(idx_phi)
    cols.append(idx_phi)
    vals.append(params.ej_b * np.cos(phi[1:-1]))
    idx_theta = n_phi + np.arange(m * nm1)
    rows.append(idx_theta)
    cols.append(idx_theta)
    vals.append(params.ej_a * np.cos(theta).ravel())

    # rank-one block of the N-th junction of every coupler l = 1..M
    for l in range(m):
        members, signs = [], []
        # coupler l (0-based) joins nodes l and l+1; interior Phi_j sits at index j-1
        if l >= 1:
            members.append(l - 1)
            signs.append(-1.0)
        if l + 1 <= n_phi:
            members.append(l)
            signs.append(1.0)
        members.extend(n_phi + l * nm1 + np.arange(nm1))
        signs.extend([-1.0] * nm1)
        members = np.asarray(members)
        signs = np.asarray(signs)
        rows.append(np.repeat(members, len(members)))
        cols.append(np.tile(members, len(members)))
        vals.append(c_last[l] * np.outer(signs, signs).ravel())

    size = n_phi + m * nm1
    return sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    )


def minimize_full_array(params: CircuitParams, phi0, theta0=None, *, tol=DEFAULT_TOL, max_iter=MAX_ITER):
    """Newton descent of the full-array potential over Phi_1..Phi_{M-1} and the free junction phases.

    Starts from ``theta0`` or, by default, from an equal split of each
    coupler's phase drop over its N junctions.
    """
    m, n = params.m_squids, params.n_junctions
    if m * n > FULL_ARRAY_MAX_SIZE:
        raise DomainError(f"full_array mode limited to N*M <= {FULL_ARRAY_MAX_SIZE}, got {m * n}")
    phi = np.array(phi0, dtype=float)
    phi[0] = phi[-1] = 0.0
    theta = np.repeat((np.diff(phi) / n)[:, None], n - 1, axis=1) if theta0 is None else np.array(theta0, float)
    n_phi = m - 1

    def unpack(z):
        return np.concatenate(([0.0], z[:n_phi], [0.0])), z[n_phi:].reshape(m, n - 1)

    def fun(z):
        return full_array_energy(params, *unpack(z))

    def gradient(z):
        g_phi, g_theta = full_array_gradient(params, *unpack(z))
        return np.concatenate((g_phi[1:-1], g_theta.ravel()))

    z = np.concatenate((phi[1:-1], theta.ravel()))
    f = fun(z)
    grad_tol = tol * max(params.ej_a, abs(params.ej_b))
    it = 0
    while it < max_iter:
        grad = gradient(z)
        gnorm = np.max(np.abs(grad))
        if gnorm <= grad_tol:
            break
        it += 1
        direction = spsolve(_full_array_hessian(params, *unpack(z)), -grad)
        slope = float(grad @ direction)
        if not np.all(np.isfinite(direction)) or slope >= 0:
            direction, slope = -grad, -float(grad @ grad)
        z, f = _armijo(fun, z, f, slope, direction)
    grad = gradient(z)
    gnorm = float(np.max(np.abs(grad)))
    phi, theta = unpack(z)
    return phi, theta, gnorm <= grad_tol, gnorm, it


# ---------------------------------------------------------------------------
# public lattice interface


def _make_state(params, phi, mode, branch, converged, gnorm, it, theta=None):
    if mode is LatticeMode.EFFECTIVE:
        i_c, i_s = lattice_currents(params, phi)
        energy = lattice_energy(params, phi)
    else:
        i_c = params.ej_a * np.sin(_theta_last(phi, theta))
        i_s = params.ej_b * np.sin(phi)
        energy = full_array_energy(params, phi, theta)
    return LatticeState(
        phi=phi, energy=energy, i_coupler=i_c, i_squid=i_s, params=params, mode=mode, branch=branch,
        converged=converged, gradient_norm=gnorm, theta=theta, iterations=it,
    )


def relax_lattice(params: CircuitParams, initial, mode=LatticeMode.EFFECTIVE, *, tol=DEFAULT_TOL,
                  branch=Branch.TRIVIAL) -> LatticeState:
    """Single descent from ``initial`` (M+1 phases); boundary phases are pinned to 0."""
    mode = LatticeMode(mode)
    phi, converged, gnorm, it = minimize_effective(params, initial, tol=tol)
    if not converged:
        raise ConvergenceError(f"lattice descent did not converge (|grad| = {gnorm:.3e})", gnorm)
    if mode is LatticeMode.EFFECTIVE:
        return _make_state(params, phi, mode, Branch(branch), converged, gnorm, it)
    phi, theta, converged, gnorm, it2 = minimize_full_array(params, phi, tol=tol)
    if not converged:
        raise ConvergenceError(f"full-array descent did not converge (|grad| = {gnorm:.3e})", gnorm)
    return _make_state(params, phi, mode, Branch(branch), converged, gnorm, it + it2, theta)


def solve_lattice_ground_states(params: CircuitParams, mode=LatticeMode.EFFECTIVE, *, tol: float = DEFAULT_TOL):
    """Descend from the +pi and -pi bulk initialisations and return both minima.

    In ``full_array`` mode the effective minimum seeds a Newton descent of the
    full circuit potential. Raises :class:`DegeneracyNotFoundError` (carrying
    the unique minimum) when both descents end in the same configuration, as
    happens for ``E_J^b > 0``.
    """
    mode = LatticeMode(mode)
    if params.m_squids < MIN_SQUIDS:
        raise DomainError(f"need m_squids >= {MIN_SQUIDS} for a bulk plateau, got {params.m_squids}")
    states = [
        relax_lattice(params, _branch_initial(params, sign), mode, tol=tol, branch=branch)
        for sign, branch in ((1, Branch.PLUS_PI), (-1, Branch.MINUS_PI))
    ]
    plus, minus = states
    if np.max(np.abs(plus.phi - minus.phi)) < 1e-6:
        raise DegeneracyNotFoundError(
            "degeneracy not found: both descents reached the same minimum",
            state=_make_state(params, plus.phi, mode, Branch.TRIVIAL, plus.converged, plus.gradient_norm,
                              plus.iterations, plus.theta),
        )
    return plus, minus


def edge_decay_rate(state: LatticeState) -> float:
    """Fitted exponential approach rate of |Phi_k| to pi over the left half (per a0)."""
    half = state.phi[: state.params.m_squids // 2 + 1]
    gap = math.pi - np.abs(half)
    k = np.arange(len(half))
    mask = (gap < 0.05 * math.pi) & (gap > 1e-9)
    if mask.sum() < 3:
        raise DomainError("not enough resolved bulk points to fit a decay rate")
    slope = np.polyfit(k[mask], np.log(gap[mask]), 1)[0]
    return float(-slope)


def compare_lattice_to_continuum(
    lattice: LatticeState, bvp: BvpSolution, *, min_resolution: float = 2.0, max_deviation: float = 0.05
) -> ContinuumComparison:
    """Sup-norm phase and relative coupler-current deviations at the lattice sites.

    ``resolution`` is the continuum decay length ``u/M`` in lattice units; the
    comparison is flagged ``continuum limit invalid`` below ``min_resolution``
    or when the phase deviation exceeds ``max_deviation``.
    """
    if lattice.mode is not LatticeMode.EFFECTIVE:
        raise DomainError("continuum comparison needs an effective-mode lattice state")
    sg = map_circuit_to_sg(lattice.params)
    other = bvp.sg
    for name in ("u", "stiffness_k", "lam", "length"):
        if not math.isclose(getattr(sg, name), getattr(other, name), rel_tol=1e-12):
            raise DomainError(f"parameter mismatch between lattice and continuum solutions ({name})")
    if lattice.branch is not bvp.branch:
        raise DomainError(f"branch mismatch: lattice {lattice.branch.value}, continuum {bvp.branch.value}")

    sites = np.arange(lattice.params.m_squids + 1, dtype=float) * lattice.params.a0
    if len(bvp.grid) == len(sites) and np.allclose(bvp.grid, sites, rtol=0, atol=1e-12):
        continuum_phi = bvp.phi
        continuum_ic = sg.inverse_inductance * np.diff(bvp.phi) / lattice.params.a0
    else:
        spline = CubicSpline(bvp.grid, bvp.phi)
        continuum_phi = spline(sites)
        continuum_ic = bvp.coupler_current(sites[:-1] + 0.5 * lattice.params.a0)
    phase_dev = float(np.max(np.abs(lattice.phi - continuum_phi)))
    current_dev = float(np.max(np.abs(lattice.i_coupler - continuum_ic)) / np.max(np.abs(continuum_ic)))
    resolution = sg.u / (sg.breather_scale * lattice.params.a0)
    flags = ()
    valid = resolution >= min_resolution and phase_dev <= max_deviation
    if not valid:
        flags = ("continuum limit invalid",)
    return ContinuumComparison(phase_dev, current_dev, resolution, valid, flags)
