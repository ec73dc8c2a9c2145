import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgcircuit import (
    Branch,
    CircuitParams,
    DomainError,
    compare_lattice_to_continuum,
    edge_decay_rate,
    map_circuit_to_sg,
    relax_lattice,
    sg_params,
    solve_continuum_kink,
    solve_lattice_ground_states,
)
from sgcircuit.solver import (
    continuum_energy,
    full_array_energy,
    lattice_currents,
    lattice_energy,
    lattice_gradient,
)


def params(ej_b=-1.0, ej_a=100.0, n=4, m=200):
    return CircuitParams(ej_a=ej_a, ej_b=ej_b, ec_a=1.0, ec_b=1.0, n_junctions=n, m_squids=m)


def kink_case(decays=40.0):
    base = sg_params(1000.0, -1.0, 1.0, 2, 1.0)
    decay = base.u / base.breather_scale
    return sg_params(1000.0, -1.0, 1.0, 2, decays * decay), decay


def test_trivial_bvp_is_zero():
    sg = sg_params(1000.0, 1.0, 1.0, 2, 500.0)
    sol = solve_continuum_kink(sg, "plus_pi")
    assert sol.branch is Branch.TRIVIAL
    assert not np.any(sol.phi) and sol.energy == 0.0


def test_bvp_pins_and_plateau():
    sg, _ = kink_case()
    for branch, sign in (("plus_pi", 1), ("minus_pi", -1)):
        sol = solve_continuum_kink(sg, branch)
        assert sol.phi[0] == 0.0 and sol.phi[-1] == 0.0
        assert abs(sol.phi[len(sol.phi) // 2] - sign * math.pi) < 1e-6
        assert sol.converged and sol.residual < 1e-10


def test_numerov_fourth_order():
    sg, decay = kink_case()
    errors = []
    for ppd in (8, 16, 32):
        sol = solve_continuum_kink(sg, "plus_pi", points_per_decay=ppd)
        half = sol.grid <= sg.length / 2
        exact = -math.pi + 4 * np.arctan(np.exp(sol.grid[half] / decay))
        errors.append(np.max(np.abs(sol.phi[half] - exact)))
    for coarse, fine in zip(errors, errors[1:]):
        assert coarse / fine == pytest.approx(16.0, rel=0.1)


def test_central_scheme_second_order():
    sg, decay = kink_case()
    errors = []
    for ppd in (16, 32):
        sol = solve_continuum_kink(sg, "plus_pi", points_per_decay=ppd, scheme="central")
        half = sol.grid <= sg.length / 2
        errors.append(np.max(np.abs(sol.phi[half] + math.pi - 4 * np.arctan(np.exp(sol.grid[half] / decay)))))
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.1)


def test_kink_energy_matches_closed_form():
    # bulk density -2|lambda|; each edge adds (u / 4 pi K) * int Phi'^2 = 4 mu u / (4 pi K)
    sg, decay = kink_case()
    sol = solve_continuum_kink(sg, "plus_pi", points_per_decay=64)
    bulk = -2 * abs(sg.lam) * sg.length
    edge = 4 * sg.inverse_inductance / decay
    # the energy integral uses the trapezoid rule, accurate to O(h^2)
    assert sol.energy == pytest.approx(bulk + 2 * edge, rel=1e-6)
    assert continuum_energy(sg, sol.grid, sol.phi) == sol.energy


def test_branch_required_in_topological_phase():
    sg, _ = kink_case()
    with pytest.raises(DomainError):
        solve_continuum_kink(sg, "trivial")


def test_lattice_decay_rate_matches_linearized_lattice():
    state, _ = solve_lattice_ground_states(params())
    exact = math.acosh(1 + 1.0 * 4 / (2 * 100.0))  # cosh(kappa) = 1 + |E_J^b| N / (2 E_J^a)
    assert edge_decay_rate(state) == pytest.approx(exact, rel=0.02)


def test_lattice_z2_covariance():
    plus, minus = solve_lattice_ground_states(params())
    assert lattice_energy(plus.params, -plus.phi) == plus.energy
    assert np.max(np.abs(lattice_gradient(plus.params, -plus.phi)[1:-1])) < 1e-10
    assert np.max(np.abs(plus.node_residuals + minus.node_residuals)) < 1e-12


def test_node_currents_layout():
    state, _ = solve_lattice_ground_states(params())
    nc = state.node_currents
    assert nc.shape == (state.params.m_squids - 1, 3)
    assert np.array_equal(nc[:, 1] - nc[:, 0] - nc[:, 2], state.node_residuals)


def test_lattice_requires_plateau_room():
    with pytest.raises(DomainError):
        solve_lattice_ground_states(params(m=6))


def test_trivial_lattice_relaxes_to_zero():
    p = params(ej_b=1.0)
    rng = np.random.default_rng(3)
    start = rng.uniform(-1, 1, p.m_squids + 1)
    start[0] = start[-1] = 0
    state = relax_lattice(p, start)
    assert np.max(np.abs(state.phi)) < 1e-10


def test_continuum_comparison_resolved():
    # u / M = sqrt(E_J^a / (N |E_J^b|)) = 20 sites
    lat, _ = solve_lattice_ground_states(params(ej_b=-0.125, n=2, m=800))
    bvp = solve_continuum_kink(map_circuit_to_sg(lat.params), "plus_pi")
    report = compare_lattice_to_continuum(lat, bvp)
    assert report.resolution == pytest.approx(20.0)
    assert report.phase_deviation < 1e-3 and report.continuum_valid

    # a quarter of |E_J^b| doubles the decay length in sites: second-order convergence
    lat2, _ = solve_lattice_ground_states(params(ej_b=-0.125 / 4, n=2, m=1600))
    bvp2 = solve_continuum_kink(map_circuit_to_sg(lat2.params), "plus_pi")
    ratio = report.phase_deviation / compare_lattice_to_continuum(lat2, bvp2).phase_deviation
    assert ratio == pytest.approx(4.0, rel=0.05)


def test_continuum_comparison_identical_discretization():
    lat, _ = solve_lattice_ground_states(params(ej_b=-0.125, n=2, m=800))
    bvp = solve_continuum_kink(map_circuit_to_sg(lat.params), "plus_pi", spacing=1.0, scheme="central")
    report = compare_lattice_to_continuum(lat, bvp)
    assert report.phase_deviation < 1e-12 and report.current_deviation < 1e-12


def test_continuum_comparison_flags_unresolved_kinks():
    p = params(ej_b=-1250.0, ej_a=100.0, n=2, m=40)  # u / M = 0.2 sites
    lat, _ = solve_lattice_ground_states(p)
    bvp = solve_continuum_kink(map_circuit_to_sg(p), "plus_pi")
    report = compare_lattice_to_continuum(lat, bvp)
    assert report.resolution == pytest.approx(0.2)
    assert not report.continuum_valid and "continuum limit invalid" in report.flags


def test_continuum_comparison_mismatch():
    lat, lat_minus = solve_lattice_ground_states(params(ej_b=-0.125, n=2, m=800))
    bvp = solve_continuum_kink(map_circuit_to_sg(lat.params), "plus_pi")
    with pytest.raises(DomainError):
        compare_lattice_to_continuum(lat_minus, bvp)
    other = solve_continuum_kink(map_circuit_to_sg(params(ej_b=-0.2, n=2, m=800)), "plus_pi")
    with pytest.raises(DomainError):
        compare_lattice_to_continuum(lat, other)


def test_full_array_state():
    p = params(ej_a=40.0, m=60)
    plus, minus = solve_lattice_ground_states(p, "full_array")
    assert plus.theta.shape == (p.m_squids, p.n_junctions - 1)
    assert abs(plus.energy - minus.energy) <= 1e-10 * abs(plus.energy)
    assert plus.energy == full_array_energy(p, plus.phi, plus.theta)
    assert plus.conservation_residual < 1e-8 * plus.max_current


@settings(max_examples=30, deadline=None)
@given(
    ej_a=st.floats(5.0, 200.0),
    ej_b=st.floats(-5.0, 5.0).filter(lambda v: abs(v) > 1e-3),
    n=st.integers(2, 10),
    seed=st.integers(0, 2**32 - 1),
)
def test_gradient_is_minus_node_residual(ej_a, ej_b, n, seed):
    p = params(ej_b=ej_b, ej_a=ej_a, n=n, m=20)
    phi = np.random.default_rng(seed).uniform(-4, 4, p.m_squids + 1)
    phi[0] = phi[-1] = 0.0
    i_c, i_s = lattice_currents(p, phi)
    residual = i_c[1:] - i_c[:-1] - i_s[1:-1]
    assert np.allclose(lattice_gradient(p, phi)[1:-1], -residual, rtol=1e-12, atol=1e-12)
