"""Synchronous TASEP dynamics, stationary solves and closed forms."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from percotasep import rng as rng_mod
from percotasep.errors import (
    CapacityError,
    ContractError,
    DegenerateChainError,
    ParameterError,
)
from percotasep.strip import EdgeColumn
from percotasep.tasep import (
    EXACT_K_CAP,
    TasepRates,
    TasepState,
    _apply_events,
    _enabled_events,
    a_eps,
    coupled_tasep_step,
    nu_limit_K,
    nu_pair_formula,
    nu_pair_from_probabilities,
    nu_pair_simulated,
    run_tasep,
    state_from_int,
    state_to_int,
    stationary_exact,
    stationary_exact_rational,
    step_initial_state,
    tasep_step,
    transition_matrix,
    transition_rows_scaled,
)


def _state(bits):
    return TasepState(np.array(bits, dtype=np.uint8))


def test_state_int_round_trip():
    for K in (1, 2, 3):
        for s in range(1 << (2 * K)):
            assert state_to_int(state_from_int(s, K)) == s


def test_state_site_indexing():
    s = _state([1, 0, 0, 1])  # K = 2, sites -1, 0, 1, 2
    assert s.site(-1) == 1 and s.site(0) == 0 and s.site(1) == 0 and s.site(2) == 1


def test_step_initial_state_matches_profile_extraction():
    s = step_initial_state(3)
    assert np.array_equal(s.occupancy, [1, 1, 1, 0, 0, 0])


def test_tasep_step_all_occupied_only_exit():
    """Exclusion: in the full state only the exit at site K can fire."""
    K = 3
    full = TasepState(np.ones(2 * K, dtype=np.uint8))
    fire = np.zeros(2 * K + 1)  # all draws < rate 1: every enabled event fires
    new = tasep_step(full, TasepRates(1.0, 1.0, 1.0), fire)
    expected = np.ones(2 * K, dtype=np.uint8)
    expected[-1] = 0
    assert np.array_equal(new.occupancy, expected)


def test_tasep_step_all_empty_only_entry():
    K = 3
    empty = TasepState(np.zeros(2 * K, dtype=np.uint8))
    fire = np.zeros(2 * K + 1)
    new = tasep_step(empty, TasepRates(1.0, 1.0, 1.0), fire)
    expected = np.zeros(2 * K, dtype=np.uint8)
    expected[0] = 1
    assert np.array_equal(new.occupancy, expected)


def test_tasep_step_k1_move_blocks_entry():
    """K = 1, (•,○), jump fires: the mover leaves but entry reads time t."""
    new = tasep_step(_state([1, 0]), TasepRates(1.0, 1.0, 1.0), np.zeros(3))
    assert np.array_equal(new.occupancy, [0, 1])


def test_tasep_step_draw_count_mismatch():
    with pytest.raises(ContractError):
        tasep_step(_state([1, 0]), TasepRates.uniform(0.5), np.zeros(4))


def test_tasep_step_accepts_generator():
    out = tasep_step(_state([1, 0, 1, 0]), TasepRates.uniform(0.5), rng_mod.stream(0))
    assert out.occupancy.shape == (4,)


def test_rates_validation():
    with pytest.raises(ParameterError):
        TasepRates(1.2, 0.5, 0.5)


@pytest.mark.parametrize("K", [1, 2])
def test_update_simultaneity_exhaustive(K):
    """All-fire tasep_step equals the deterministic map read off the old state."""
    n = 2 * K
    for s in range(1 << n):
        state = state_from_int(s, K)
        new = tasep_step(state, TasepRates(1.0, 1.0, 1.0), np.zeros(n + 1))
        events = _enabled_events(s, n)
        expected = _apply_events(s, events, (1 << len(events)) - 1, n)
        assert state_to_int(new) == expected


def test_particle_conservation_without_boundaries():
    """beta = gamma = 0: bulk moves conserve the particle count."""
    rng = rng_mod.stream(13)
    state = _state([1, 0, 1, 1, 0, 0])
    count = int(state.occupancy.sum())
    for _ in range(200):
        state = tasep_step(state, TasepRates(0.7, 0.0, 0.0), rng)
        assert int(state.occupancy.sum()) == count


def test_coupled_step_all_open_no_change():
    K = 2
    col = EdgeColumn(np.zeros(2 * K + 1, dtype=bool))
    s = _state([1, 0, 0, 1])
    assert coupled_tasep_step(s, col) == s


def test_coupled_step_all_closed_empty_gets_entry():
    K = 2
    col = EdgeColumn(np.ones(2 * K + 1, dtype=bool))
    s = _state([0, 0, 0, 0])
    assert np.array_equal(coupled_tasep_step(s, col).occupancy, [1, 0, 0, 0])


def test_coupled_step_k_mismatch():
    with pytest.raises(ContractError):
        coupled_tasep_step(_state([1, 0]), EdgeColumn(np.zeros(5, dtype=bool)))


def test_transition_matrix_rows_sum_to_one():
    P = transition_matrix(2, TasepRates.uniform(0.3))
    assert np.allclose(np.asarray(P.sum(axis=1)).ravel(), 1.0)


def test_transition_rows_scaled_matches_float_matrix():
    K = 2
    eps = Fraction(1, 4)
    rows, den = transition_rows_scaled(K, eps)
    P = transition_matrix(K, TasepRates.uniform(float(eps))).toarray()
    dense = np.zeros_like(P)
    for s, row in enumerate(rows):
        assert sum(w for _, w in row) == den
        for t, w in row:
            dense[s, t] = w / den
    assert np.allclose(dense, P, atol=1e-15)


def test_stationary_exact_k1_residual_and_simulation():
    """K = 1, eps = 0.5: residual tolerance and a long-run cross-check."""
    dist = stationary_exact(1, TasepRates.uniform(0.5))
    assert dist.residual <= 1e-10
    assert abs(dist.probabilities.sum() - 1.0) <= 1e-12
    sim = nu_pair_simulated(1, 0.5, 10_000, 10_000_000, rng_mod.stream(1))
    assert abs(sim.nu_pair - dist.nu_pair) <= 4 * sim.stderr


def test_stationary_exact_vs_simulated_k2():
    dist = stationary_exact(2, TasepRates.uniform(0.3))
    sim = nu_pair_simulated(2, 0.3, 50_000, 2_000_000, rng_mod.stream(5))
    assert abs(sim.nu_pair - dist.nu_pair) <= 4 * sim.stderr


@pytest.mark.parametrize("eps", [0.1, 0.45, 0.9])
def test_stationary_exact_normalized(eps):
    dist = stationary_exact(3, TasepRates.uniform(eps))
    assert abs(dist.probabilities.sum() - 1.0) <= 1e-12
    assert 0.0 <= dist.nu_pair <= 1.0


def test_stationary_exact_caps_and_degeneracy():
    with pytest.raises(CapacityError):
        stationary_exact(EXACT_K_CAP + 1, TasepRates.uniform(0.5))
    with pytest.raises(DegenerateChainError):
        stationary_exact(2, TasepRates.uniform(0.0))
    with pytest.raises(DegenerateChainError):
        stationary_exact(2, TasepRates.uniform(1.0))


def test_stationary_exact_rational_matches_float():
    pi, nu = stationary_exact_rational(2, Fraction(3, 10))
    assert sum(pi) == 1
    dist = stationary_exact(2, TasepRates.uniform(0.3))
    assert abs(float(nu) - dist.nu_pair) <= 1e-9
    assert np.max(np.abs(np.array([float(p) for p in pi]) - dist.probabilities)) <= 1e-9


def test_run_tasep_matches_stepwise_reference():
    """The chunked kernel consumes draws exactly like repeated tasep_step."""
    K, steps = 3, 257
    rates = TasepRates.uniform(0.35)
    uniforms = rng_mod.stream(21).random((steps, 2 * K + 1))
    state = step_initial_state(K)
    expected_ind = []
    for t in range(steps):
        state = tasep_step(state, rates, uniforms[t])
        expected_ind.append(state.site(0) == 1 and state.site(1) == 0)
    final, ind = run_tasep(step_initial_state(K), rates, steps, rng_mod.stream(21))
    assert final == state
    assert np.array_equal(ind.astype(bool), expected_ind)


def test_a_eps_identities():
    assert a_eps(1, Fraction(1, 3), exact=True) == 0
    assert a_eps(2, Fraction(0), exact=True) == 1
    for eps in (Fraction(1, 5), Fraction(2, 7)):
        assert a_eps(2, eps, exact=True) == 1 - eps


def test_a_eps_float_matches_exact_to_12_digits():
    for K in (5, 20, 40, 60):
        exact = a_eps(K, Fraction(19, 100), exact=True)
        approx = a_eps(K, 0.19)
        assert math.isclose(approx, float(exact), rel_tol=1e-12)


def test_nu_pair_formula_values():
    assert nu_pair_formula(1, Fraction(1, 2), exact=True) == 0
    assert nu_pair_formula(2, Fraction(0), exact=True) == Fraction(1, 4)
    with pytest.raises(DegenerateChainError):
        nu_pair_formula(3, 1.0)


def test_nu_pair_formula_converges_to_limit():
    """Tail-monotone convergence toward the large-K limit."""
    for eps in (0.1, 0.19, 0.5):
        limit = nu_limit_K(eps)
        gaps = [abs(nu_pair_formula(K, eps) - limit) for K in range(20, 201, 20)]
        assert all(b <= a for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < gaps[0] / 4  # roughly 1/K decay


def test_nu_limit_values():
    assert math.isclose(nu_limit_K(0.19), 0.1 / 0.38)
    assert nu_limit_K(1.0) == 0.5
    assert nu_limit_K(0.0) == 0.25
    with pytest.raises(ParameterError):
        nu_limit_K(-0.1)


def test_nu_pair_from_probabilities_selects_middle_pair():
    K = 2
    pi = np.zeros(16)
    s = 0b0010  # site 0 (bit K-1 = 1) occupied, site 1 (bit K = 2) empty
    pi[s] = 1.0
    assert nu_pair_from_probabilities(pi, K) == 1.0


@given(st.integers(1, 3), st.floats(0.05, 0.95))
@settings(max_examples=20, deadline=None)
def test_stationary_residual_property(K, eps):
    dist = stationary_exact(K, TasepRates.uniform(eps))
    assert dist.residual <= 1e-10
