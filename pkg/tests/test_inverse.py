import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from interval_probe import inverse
from interval_probe.cli import build_inverse_problem
from interval_probe.core import Grid, HeatProblem, InvalidInputError, Signal, WaveProblem
from interval_probe.forms import Sine, sine_cubed, zero
from interval_probe.inverse import (
    ForwardSolveError,
    InverseProblem,
    add_noise,
    brent_minimize,
    cost,
    make_target,
    minimize_length,
    noise_sweep,
    observe,
    scan_cost,
    worker_count,
)
from interval_probe.presets import get_preset

PI = math.pi


@pytest.fixture(scope="module")
def heat11():
    return build_inverse_problem(get_preset("heat-1.1"))


@pytest.fixture(scope="module")
def heat12():
    return build_inverse_problem(get_preset("heat-1.2"))


@pytest.fixture(scope="module")
def heat13():
    return build_inverse_problem(get_preset("heat-1.3"))


def _self_target(template, length, grid):
    """Target computed on the inversion grid itself (the "inverse crime" setting)."""
    return make_target(template, length, grid, refine=1)


# --- cost ---------------------------------------------------------------------------


def test_cost_vanishes_at_the_true_length_on_the_same_grid():
    template = HeatProblem(1.0, 5.0, sine_cubed(5.0), zero())
    grid = Grid(200, 1000)
    ip = InverseProblem(template, _self_target(template, 2.0, grid), (0.5, 4.0), grid)
    assert cost(2.0, ip) <= 1e-14


def test_cost_of_zero_data_is_zero():
    template = HeatProblem(1.0, 5.0, zero(), zero())
    grid = Grid(50, 200)
    ip = InverseProblem(template, _self_target(template, 2.0, grid), (0.5, 4.0), grid)
    assert cost(1.0, ip) == 0.0 and cost(3.0, ip) == 0.0


def test_cost_vanishes_at_both_commensurate_lengths(heat13):
    assert cost(4.0, heat13) < 1e-7
    assert cost(6.0, heat13) < 1e-7
    assert cost(5.0, heat13) > 1e3 * max(cost(4.0, heat13), cost(6.0, heat13))


def test_cost_is_deterministic_and_nonnegative(heat11):
    a = [cost(e, heat11) for e in (0.7, 1.9, 3.3)]
    b = [cost(e, heat11) for e in (0.7, 1.9, 3.3)]
    assert a == b and min(a) >= 0


def test_cost_is_quadratic_in_the_residual():
    # 1/2 * trapezoid of (beta - model)^2 checked against a direct computation
    template = HeatProblem(1.0, 2.0, sine_cubed(5.0), zero())
    grid = Grid(60, 240)
    target = _self_target(template, 1.5, grid)
    ip = InverseProblem(template, target, (0.5, 3.0), grid)
    model = observe(template.at_length(1.2), grid)
    r = target.samples - model.samples
    expected = 0.5 * target.dt * (np.sum(r * r) - 0.5 * (r[0] ** 2 + r[-1] ** 2))
    assert cost(1.2, ip) == pytest.approx(expected, rel=1e-12)


def test_cost_rejects_lengths_outside_the_bracket(heat11):
    with pytest.raises(InvalidInputError):
        cost(0.4, heat11)
    with pytest.raises(InvalidInputError):
        cost(4.5, heat11)


def test_cost_wraps_solver_failures():
    template = HeatProblem(1.0, 5.0, sine_cubed(5.0), zero())
    grid = Grid(50, 200)
    target = _self_target(template, 2.0, grid)
    # a target on a longer time grid than the solver covers cannot be resampled
    ip = InverseProblem(template, target, (0.5, 4.0), grid)
    bad = InverseProblem(HeatProblem(1.0, 5.0, sine_cubed(5.0), zero()), target, (0.5, 4.0), Grid(50, 200))
    object.__setattr__(bad, "template", HeatProblem(1.0, 2.0, sine_cubed(5.0), zero()))
    with pytest.raises(ForwardSolveError) as info:
        cost(1.0, bad)
    assert info.value.ell == 1.0
    assert cost(2.0, ip) < 1e-14


def test_inverse_problem_validation(heat11):
    with pytest.raises(InvalidInputError):
        heat11.with_bracket(2.0, 1.0)
    with pytest.raises(InvalidInputError):
        heat11.with_bracket(0.0, 1.0)
    with pytest.raises(InvalidInputError):
        InverseProblem(heat11.template, Signal(np.zeros(100), 0.1), (1, 2))
    with pytest.raises(InvalidInputError):
        InverseProblem(heat11.template, [1.0, 2.0], (1, 2))


def test_make_target_is_cut_to_the_horizon():
    template = WaveProblem(1.0, 4.0, sine_cubed(3.0), zero(), zero())
    t = make_target(template, 2.0, Grid(70, 8))
    assert t.t_end <= 4.0 + 1e-12
    assert t.t_end > 4.0 - 2 * t.dt


# --- noise --------------------------------------------------------------------------


def test_zero_noise_returns_the_signal_itself(heat11):
    assert add_noise(heat11.target, 0.0, 1) is heat11.target


def test_full_noise_on_ones_stays_in_range():
    s = add_noise(Signal(np.ones(10000), 0.01), 100.0, 7)
    assert s.samples.min() >= 0.0 and s.samples.max() <= 2.0
    assert abs(s.samples.mean() - 1.0) < 0.02


def test_one_percent_noise_size(heat11):
    beta = heat11.target
    noisy = add_noise(beta, 1.0, 3)
    rel = np.abs(noisy.samples - beta.samples) / np.maximum(np.abs(beta.samples), 1e-300)
    nz = np.abs(beta.samples) > 1e-8
    assert rel[nz].max() <= 0.01 + 1e-12
    assert 1e-3 < rel[nz].mean() < 1e-2


def test_noise_is_seeded(heat11):
    a = add_noise(heat11.target, 1.0, 11).samples
    b = add_noise(heat11.target, 1.0, 11).samples
    c = add_noise(heat11.target, 1.0, 12).samples
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_negative_noise_rejected(heat11):
    with pytest.raises(InvalidInputError):
        add_noise(heat11.target, -1.0, 0)


# --- optimisation -------------------------------------------------------------------


def test_heat_1_1_reconstruction(heat11):
    res = minimize_length(heat11, 3.0)
    assert abs(res.L_c - 2.0) <= 1e-3
    assert res.final_cost < 1e-8
    assert res.evaluations <= 40
    assert res.termination == "converged"
    assert len(res.iterates) == res.evaluations


def test_heat_1_2_reconstruction(heat12):
    res = minimize_length(heat12, 0.5)
    assert abs(res.L_c - 2.0) <= 1e-3


def test_seeding_at_the_true_length_on_the_same_grid():
    template = HeatProblem(1.0, 5.0, sine_cubed(5.0), zero())
    grid = Grid(100, 500)
    ip = InverseProblem(template, _self_target(template, 2.0, grid), (0.5, 4.0), grid)
    res = minimize_length(ip, 2.0)
    assert res.final_cost < 1e-14 and res.L_c == 2.0 and res.evaluations == 1


def test_wave_reconstruction_lands_in_the_zero_misfit_set():
    # with T = 4 every length >= T/2 gives the same observation (the reflection
    # from the far end never comes back in time); the search must end there
    ip = build_inverse_problem(get_preset("wave-2.1"))
    res = minimize_length(ip, 1.5)
    assert res.L_c >= 2.0 - 1e-2
    assert res.final_cost < 1e-6


def test_wave_reconstruction_with_a_longer_horizon():
    # once the reflection is observable the true length is the only zero of the
    # misfit, but the wave landscape has further local minima, so use multistart
    cfg = get_preset("wave-2.1").with_overrides(horizon=6.0)
    ip = build_inverse_problem(cfg)
    res = minimize_length(ip, 1.5, multistart_count=4)
    assert abs(res.L_c - 2.0) <= 1e-3
    land = scan_cost(ip, 31)
    zeros = [m.ell for m in land.local_minima if m.cost < 1e-6]
    assert zeros == [pytest.approx(2.0, abs=1e-3)]


def test_max_iter_termination(heat11):
    res = minimize_length(heat11, 3.0, max_iter=3)
    assert res.termination == "max-iter"
    assert res.evaluations == 4


def test_bracket_edge_termination(heat11):
    res = minimize_length(heat11.with_bracket(2.5, 4.0), 3.0)
    assert res.termination == "bracket-edge"
    assert res.L_c == pytest.approx(2.5, abs=1e-4)


def test_initial_length_must_be_inside(heat11):
    with pytest.raises(InvalidInputError):
        minimize_length(heat11, 4.0)
    with pytest.raises(InvalidInputError):
        minimize_length(heat11, 0.1)


def test_brent_agrees_with_scipy_bounded():
    # the middle function is negative near its minimum at the right end of the interval
    fns = [lambda x: (x - 1.3) ** 2, lambda x: math.cos(x) + 0.1 * x, lambda x: abs(x - 0.7) ** 1.5]
    for f in fns:
        ours = brent_minimize(f, 0.0, 3.0, 1.5, xtol=1e-8)
        ref = minimize_scalar(f, bounds=(0.0, 3.0), method="bounded", options={"xatol": 1e-8})
        assert ours.L_c == pytest.approx(ref.x, abs=1e-6)


def test_brent_start_must_be_interior():
    with pytest.raises(InvalidInputError):
        brent_minimize(lambda x: x, 0.0, 1.0, 0.0)


def test_multistart_never_worse(heat13):
    single = minimize_length(heat13, 3.2)
    multi = minimize_length(heat13, 3.2, multistart_count=4)
    assert multi.final_cost <= single.final_cost
    assert multi.evaluations >= single.evaluations


# --- landscape -----------------------------------------------------------------------


def test_scan_finds_both_commensurate_minima(heat13):
    land = scan_cost(heat13, 41)
    ells = sorted(m.ell for m in land.local_minima)
    assert len(ells) == 2
    assert ells[0] == pytest.approx(4.0, abs=1e-3) and ells[1] == pytest.approx(6.0, abs=1e-3)
    assert land.samples.shape == (41, 2)
    assert land.ell[0] == 3.0 and land.ell[-1] == 7.0


def test_scan_finds_a_single_minimum(heat11):
    land = scan_cost(heat11, 41)
    assert len(land.local_minima) == 1
    assert land.local_minima[0].ell == pytest.approx(2.0, abs=1e-3)


def test_scan_of_zero_data_is_flat():
    template = HeatProblem(1.0, 5.0, zero(), zero())
    grid = Grid(50, 200)
    ip = InverseProblem(template, _self_target(template, 2.0, grid), (0.5, 4.0), grid)
    land = scan_cost(ip, 11)
    assert np.all(land.cost == 0) and land.local_minima == ()


def test_scan_needs_enough_samples(heat11):
    with pytest.raises(InvalidInputError):
        scan_cost(heat11, 9)


def test_scan_is_independent_of_thread_count(heat11, monkeypatch):
    monkeypatch.setenv("INTERVAL_PROBE_THREADS", "1")
    a = scan_cost(heat11, 11)
    monkeypatch.setenv("INTERVAL_PROBE_THREADS", "4")
    b = scan_cost(heat11, 11)
    assert np.array_equal(a.samples, b.samples)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("INTERVAL_PROBE_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("INTERVAL_PROBE_THREADS", "0")
    assert worker_count() == 1
    monkeypatch.setenv("INTERVAL_PROBE_THREADS", "junk")
    assert worker_count() >= 1


# --- noise sweep ---------------------------------------------------------------------


def test_sweep_with_only_the_clean_level(heat11):
    rows = noise_sweep(heat11, 3.0, [0.0], seed=0)
    assert len(rows) == 1 and rows[0].level == 0.0
    assert abs(rows[0].L_c - 2.0) < 1e-3 and rows[0].error is None


def test_sweep_on_heat_1_2(heat12):
    levels = [1.0, 0.1, 0.01, 0.001, 0.0]
    rows = noise_sweep(heat12, 0.5, levels, seed=0)
    assert [r.level for r in rows] == levels
    errs = [abs(r.L_c - 2.0) for r in rows]
    assert max(errs) <= 5e-3
    assert len({r.seed for r in rows}) == len(rows)


def test_sweep_with_no_levels(heat11):
    assert noise_sweep(heat11, 3.0, [], seed=0) == []


def test_sweep_rejects_negative_levels(heat11):
    with pytest.raises(InvalidInputError):
        noise_sweep(heat11, 3.0, [1.0, -1.0], seed=0)


def test_sweep_records_failures(heat11, monkeypatch):
    real = inverse.cost

    def flaky(ell, ip):
        if ip.target is not heat11.target:
            raise ForwardSolveError(ell, RuntimeError("boom"))
        return real(ell, ip)

    monkeypatch.setattr(inverse, "cost", flaky)
    rows = noise_sweep(heat11, 3.0, [1.0, 0.0], seed=0)
    assert rows[0].error is not None and "boom" in rows[0].error
    assert math.isnan(rows[0].L_c) and rows[0].termination == "failed"
    assert rows[1].error is None


def test_sweep_is_reproducible(heat11):
    a = noise_sweep(heat11, 3.0, [1.0, 0.1], seed=5)
    b = noise_sweep(heat11, 3.0, [1.0, 0.1], seed=5)
    assert a == b
