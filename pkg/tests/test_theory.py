import math
from fractions import Fraction

import numpy as np
import pytest

from interval_probe.core import Grid, InvalidInputError, WaveProblem
from interval_probe.forms import Polynomial, Sine, sine_cubed, zero
from interval_probe.theory import (
    HypothesisError,
    IncommensurateError,
    admissible_lengths,
    asymptotic_bound,
    bound_consistency_experiment,
    commensurate_initial_data,
    direct_inequality_check,
    flux_gap,
    h2_norm,
    rational_ratio,
    symmetric_data_check,
    trace_constant_bound,
    trace_constant_probe,
    verify_flux_equality,
)

PI = math.pi


# --- commensurability -------------------------------------------------------------


@pytest.mark.parametrize("x,frac", [(3.0, Fraction(3)), (1.5, Fraction(3, 2)), (6 / 4, Fraction(3, 2)), (7 / 3, Fraction(7, 3))])
def test_rational_ratio(x, frac):
    assert rational_ratio(x) == frac


def test_rational_ratio_of_pi_is_a_large_convergent():
    q = rational_ratio(PI)
    assert q == Fraction(103993, 33102)
    with pytest.raises(IncommensurateError):
        rational_ratio(PI, max_denominator=1000)


def test_rational_ratio_rejects_bad_input():
    for x in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(InvalidInputError):
            rational_ratio(x)


def test_commensurate_pair_two_six():
    pair = commensurate_initial_data(2.0, 6.0, 1)
    assert (pair.n0, pair.m0, pair.k1, pair.n1) == (1, 3, 1, 3)
    x = np.linspace(0, 6, 61)
    assert np.allclose(pair.profile(x), np.sin(PI * x / 2))
    # the profile vanishes at both ends of both intervals
    assert abs(pair.profile(2.0)) < 1e-15 and abs(pair.profile(6.0)) < 1e-14


def test_commensurate_pair_needs_integer_mode_on_the_long_interval():
    with pytest.raises(IncommensurateError):
        commensurate_initial_data(2.0, 3.0, 1)
    pair = commensurate_initial_data(2.0, 3.0, 2)
    assert (pair.n0, pair.m0, pair.n1) == (2, 3, 3)


def test_incommensurate_lengths_rejected():
    with pytest.raises(IncommensurateError):
        commensurate_initial_data(1.0, PI, 1)


def test_commensurate_pair_validation():
    with pytest.raises(InvalidInputError):
        commensurate_initial_data(3.0, 2.0, 1)
    with pytest.raises(InvalidInputError):
        commensurate_initial_data(2.0, 4.0, 0)
    with pytest.raises(InvalidInputError):
        commensurate_initial_data(2.0, 4.0, 1.5)


def test_admissible_lengths():
    assert admissible_lengths(2.0, 1, 10.0) == [2.0, 4.0, 6.0, 8.0, 10.0]
    assert admissible_lengths(2.0, 2, 4.0) == [2.0, 3.0, 4.0]
    assert admissible_lengths(2.0, 1, 1.0) == []
    with pytest.raises(InvalidInputError):
        admissible_lengths(2.0, 0, 4.0)


# --- shared observations --------------------------------------------------------------


def test_heat_commensurate_fluxes_coincide():
    pair = commensurate_initial_data(2.0, 6.0, 1)
    assert verify_flux_equality(pair, "heat", 5.0, t_min=0.01) < 1e-10


@pytest.mark.parametrize("variant", ["u0", "u1"])
def test_wave_commensurate_fluxes_coincide(variant):
    pair = commensurate_initial_data(2.0, 4.0, 1)
    assert verify_flux_equality(pair, "wave", 4.0, variant=variant) < 1e-10


def test_mismatched_lengths_have_different_fluxes():
    gap = flux_gap(Sine(1.0, PI / 2), 2.0, 3.0, "heat", 5.0, 0.01)
    assert gap > 1e-2


def test_flux_gap_validation():
    with pytest.raises(InvalidInputError):
        flux_gap(Sine(1.0, PI / 2), 2.0, 6.0, "heat", 5.0, 0.0)
    with pytest.raises(InvalidInputError):
        flux_gap(Sine(1.0, PI / 2), 2.0, 6.0, "wave", 5.0, 0.0, variant="u2")
    with pytest.raises(InvalidInputError):
        flux_gap(Sine(1.0, PI / 2), 2.0, 6.0, "wave", 5.0, 6.0)


def test_odd_extension_reproduces_the_short_flux():
    u0 = Polynomial((0.0, 10.0, -5.0))  # 5x(2-x) on (0, 2)
    assert symmetric_data_check(2.0, u0, 2.0, Grid(100, 400)) < 1e-10


def test_even_extension_does_not():
    u0 = Polynomial((0.0, 10.0, -5.0))
    assert symmetric_data_check(2.0, u0, 2.0, Grid(100, 400), parity=+1) > 1e-2


def test_symmetric_check_of_zero_data():
    assert symmetric_data_check(2.0, zero(), 1.0, Grid(20, 40)) == 0.0


# --- trace constant -------------------------------------------------------------------


def test_h2_norm_of_a_sine():
    # f = sin(x): f^2 + f'^2 = 1, f''^2 = sin^2, so the integral over (0, pi) is pi + pi/2
    assert h2_norm(Sine(1.0, 1.0), PI) == pytest.approx(math.sqrt(1.5 * PI), rel=1e-12)


def test_trace_probe_of_the_identity_matches_closed_form():
    # f = x: f'(0) = 1 and ||f||^2 = ell^3/3 + ell, so r = ell / sqrt(1 + ell^2/3)
    ells = np.array([0.1, 0.5, 1.0, 3.0, 10.0])
    r = trace_constant_probe(Polynomial((0.0, 1.0)), ells)
    assert np.allclose(r, ells / np.sqrt(1 + ells**2 / 3), rtol=1e-12)


def test_trace_probe_of_zero_is_zero():
    assert np.all(trace_constant_probe(zero(), [1.0, 2.0]) == 0)


def test_trace_ratio_stays_below_the_bound():
    rng = np.random.default_rng(4)
    L_star = 10.0
    C = trace_constant_bound(L_star)
    ells = np.linspace(0.05, L_star, 40)
    families = [Polynomial((0.0, 1.0)), Sine(1.0, 1.0), Sine(2.0, 0.3)]
    families += [lambda ell: Sine(1.0, PI / ell), lambda ell: Polynomial((0.0, ell, -1.0))]
    for _ in range(20):
        coeffs = tuple(rng.normal(size=5))
        families.append(Polynomial(coeffs))
    for f in families:
        assert np.max(trace_constant_probe(f, ells)) <= C


def test_trace_bound_is_sharp_enough_to_be_informative():
    # the identity attains a ratio within a factor of L_star of the bound
    C = trace_constant_bound(2.0)
    r = trace_constant_probe(Polynomial((0.0, 1.0)), [2.0])[0]
    assert r <= C < 3 * r


def test_trace_probe_validation():
    with pytest.raises(InvalidInputError):
        trace_constant_probe(Sine(1.0, 1.0), [0.0])
    with pytest.raises(InvalidInputError):
        trace_constant_bound(0.0)


# --- direct inequality ----------------------------------------------------------------


def test_direct_inequality_single_mode_example():
    d = direct_inequality_check([(1, 1.0)], 0.0, 1.0, 0.0, 1.0)
    assert d.lhs == pytest.approx(PI**2 / 2, rel=1e-13)
    assert d.rhs == pytest.approx(3 * PI**2 / 2, rel=1e-13)
    assert d.holds


def test_direct_inequality_random_superpositions():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        modes = [(int(k), float(a)) for k, a in zip(rng.integers(1, 12, n), rng.normal(size=n))]
        ell = float(rng.uniform(0, 3))
        L = ell + float(rng.uniform(0.2, 3))
        T0 = float(rng.uniform(0, 2))
        T1 = T0 + float(rng.uniform(0.1, 6))
        d = direct_inequality_check(modes, ell, L, T0, T1)
        assert d.holds
        scale = max(d.rhs, 1e-300)
        assert abs(d.lhs - d.lhs_quadrature) <= 1e-9 * scale
        assert abs(d.rhs - d.rhs_quadrature) <= 1e-9 * scale


def test_direct_inequality_of_no_modes():
    d = direct_inequality_check([], 0.0, 1.0, 0.0, 1.0)
    assert d.lhs == 0.0 and d.rhs == 0.0 and d.holds


def test_direct_inequality_validation():
    with pytest.raises(InvalidInputError):
        direct_inequality_check([(1, 1.0)], 1.0, 1.0, 0.0, 1.0)
    with pytest.raises(InvalidInputError):
        direct_inequality_check([(1, 1.0)], 0.0, 1.0, 1.0, 1.0)
    with pytest.raises(InvalidInputError):
        direct_inequality_check([(0, 1.0)], 0.0, 1.0, 0.0, 1.0)


# --- stability bound ------------------------------------------------------------------


def test_asymptotic_bound_example():
    assert asymptotic_bound(1, 2, 9, 1, 10) == pytest.approx(0.09, rel=1e-15)


@pytest.mark.parametrize(
    "args",
    [(2, 1, 9, 1, 10), (0, 2, 9, 1, 10), (1, 2, 8, 1, 10), (1, 2, 9, 0, 10), (1, 2, 9, 1, 0)],
)
def test_asymptotic_bound_hypotheses(args):
    with pytest.raises(HypothesisError):
        asymptotic_bound(*args)


def test_bound_experiment_self_comparison_holds():
    p = WaveProblem(1.0, 8.0, sine_cubed(3.0), zero(), zero())
    rep = bound_consistency_experiment(p, p, Grid(100, 8))
    assert rep.status == "holds"
    assert rep.distance == 0.0 and rep.bound > 0 and rep.delta0 > 0


def test_bound_experiment_different_observations_inapplicable():
    a = WaveProblem(1.0, 8.0, sine_cubed(3.0), zero(), zero())
    b = WaveProblem(1.2, 8.0, sine_cubed(3.0), zero(), zero())
    rep = bound_consistency_experiment(a, b, Grid(100, 8))
    assert rep.status == "inapplicable" and rep.flux_gap > 1e-2


def test_bound_experiment_without_input_is_vacuous():
    u0 = Sine(1.0, PI / 2)
    a = WaveProblem(2.0, 4.0, zero(), u0, zero())
    with pytest.warns(UserWarning, match="horizon"):
        b = WaveProblem(4.0, 4.0, zero(), u0, zero())
    rep = bound_consistency_experiment(a, b, Grid(200, 8))
    assert rep.status == "vacuous" and rep.flux_gap < 1e-6


def test_bound_experiment_short_horizon_violates_hypothesis():
    p = WaveProblem(2.0, 6.0, sine_cubed(3.0), zero(), zero())
    assert bound_consistency_experiment(p, p, Grid(100, 8)).status == "hypothesis-violated"


def test_bound_experiment_needs_a_shared_horizon():
    with pytest.raises(InvalidInputError):
        bound_consistency_experiment(
            WaveProblem(1.0, 8.0, zero(), zero(), zero()), WaveProblem(1.0, 9.0, zero(), zero(), zero())
        )
