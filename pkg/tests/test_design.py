import numpy as np
import pytest

from sgcircuit import DesignSpace, DomainError, ParamRange, evaluate_design, optimize_delta, sweep

from conftest import REF

FIXED = {k: v for k, v in REF.items()}


def ejb_space(steps=10, **kw):
    fixed = dict(FIXED)
    return DesignSpace(ranges={"ej_b": ParamRange(-10.0, -1.0, steps, "log")}, fixed=fixed, **kw)


def test_param_range_values():
    assert ParamRange(1.0, 3.0, 3).values() == [1.0, 2.0, 3.0]
    assert ParamRange(-100.0, -1.0, 3, "log").values() == pytest.approx([-100.0, -10.0, -1.0])
    assert ParamRange(2, 5, 10).values(integer=True) == [2, 3, 4, 5]


@pytest.mark.parametrize(
    "args", [(1.0, 1.0, 3), (2.0, 1.0, 3), (1.0, 2.0, 1), (1.0, 2.0, 2.5), (-1.0, 1.0, 3, "log"), (1.0, 2.0, 3, "cubic")]
)
def test_param_range_rejects(args):
    with pytest.raises(DomainError):
        ParamRange(*args)


def test_design_space_must_cover_parameters():
    with pytest.raises(DomainError):
        DesignSpace(ranges={}, fixed={"ej_a": 1.0})
    with pytest.raises(DomainError):
        DesignSpace(ranges={"ej_b": ParamRange(-2.0, -1.0, 2)}, fixed=dict(FIXED, ej_b=-1.0))


def test_reference_sweep():
    result = sweep(ejb_space())
    assert len(result) == 10 and len(result.feasible) == 10
    deltas = [c.delta for c in result]
    assert deltas == sorted(deltas, reverse=True)
    assert 0.035 < min(deltas) < 0.045 and 0.140 < max(deltas) < 0.150
    assert result.candidates[0].params.ej_b == -10.0


def test_small_n_points_rank_last():
    space = DesignSpace(
        ranges={"n_junctions": ParamRange(2, 500, 3)},
        fixed={k: v for k, v in dict(FIXED, ej_b=-10.0).items() if k != "n_junctions"},
    )
    # N = 2 and 251 grid points alongside the reference N = 500
    result = sweep(space)
    small = [c for c in result if c.params.n_junctions == 2][0]
    assert small.sg.stiffness_k == pytest.approx(np.sqrt(0.04) / (4 * np.pi))
    assert not small.feasible and "regime" in small.violations
    assert result.candidates[-1] is small


def test_space_without_boundary_breathers_has_no_feasible_point():
    # K = sqrt(2 N / E_J^a) / 4 pi >= 2/3 across the range
    space = DesignSpace(
        ranges={"ej_a": ParamRange(20.0, 40.0, 3)},
        fixed={"ej_b": -1.0, "ec_a": 1.0, "ec_b": 1.0, "n_junctions": 1500, "m_squids": 100},
    )
    result = sweep(space)
    assert not result.feasible
    assert result.diagnostics["no_boundary_breathers"] == 3
    with pytest.raises(DomainError):
        optimize_delta(space)


def test_evaluate_design_violations():
    cand = evaluate_design(dict(FIXED, ej_b=5.0))
    assert not cand.feasible and "phase:trivial" in cand.violations and cand.delta is None
    cand = evaluate_design(dict(FIXED, ej_b=-10.0), k_max=0.2)
    assert cand.violations == ("k_max",)


def test_sweep_is_deterministic_across_workers():
    space = DesignSpace(
        ranges={"ej_b": ParamRange(-10.0, -1.0, 4, "log"), "n_junctions": ParamRange(300, 700, 3)},
        fixed={k: v for k, v in FIXED.items() if k != "n_junctions"},
    )
    serial = sweep(space, workers=1)
    parallel = sweep(space, workers=2)
    assert [c.params for c in serial] == [c.params for c in parallel]
    assert [c.delta for c in serial] == [c.delta for c in parallel]


def test_optimizer_keeps_upper_bound_winner():
    best = optimize_delta(ejb_space(steps=3), budget=60)
    assert best.params.ej_b == -10.0
    dense = [evaluate_design(dict(FIXED, ej_b=-e)).delta for e in np.linspace(1, 10, 50)]
    assert all(a < b for a, b in zip(dense, dense[1:]))


def test_optimizer_finds_interior_regime_boundary():
    # delta grows as E_J^a drops (K grows) until |E_J^b|/E_J^a reaches 1/10 at E_J^a = 100
    space = DesignSpace(
        ranges={"ej_a": ParamRange(50.0, 200.0, 3)},
        fixed={k: v for k, v in dict(FIXED, ej_b=-10.0).items() if k != "ej_a"},
    )
    grid_best = sweep(space).feasible[0]
    assert grid_best.params.ej_a == 125.0
    best = optimize_delta(space, budget=200)
    assert best.params.ej_a == pytest.approx(100.0, rel=1e-6)
    assert best.delta > grid_best.delta
    assert "no-improvement" not in best.flags


def test_single_point_and_zero_budget():
    space = DesignSpace(ranges={}, fixed=dict(FIXED, ej_b=-10.0))
    best = optimize_delta(space)
    assert best.params.ej_b == -10.0 and "no-improvement" in best.flags
    best = optimize_delta(ejb_space(steps=3), budget=0)
    assert best.params.ej_b == -10.0 and best.flags == ("no-improvement",)
