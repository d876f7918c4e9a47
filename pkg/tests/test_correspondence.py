"""Profile/particle bijection and the exact coupling verifier."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from percotasep import rng as rng_mod
from percotasep.correspondence import (
    CouplingReport,
    extract_particles,
    reconstruct_increment,
    reconstruct_profile,
    verify_coupling,
)
from percotasep.errors import ContractError, ParameterError
from percotasep.strip import DistanceProfile, initial_profile
from percotasep.tasep import TasepState, state_from_int


def test_extract_initial_profile_is_step_state():
    """d = |j|: occupied exactly on j in {-K+1, ..., 0}."""
    K = 4
    state = extract_particles(initial_profile(K))
    assert np.array_equal(state.occupancy, [1, 1, 1, 1, 0, 0, 0, 0])


def test_extract_monotone_profiles():
    K = 3
    up = DistanceProfile(0, np.arange(K, 3 * K + 1))  # strictly increasing
    assert not extract_particles(up).occupancy.any()
    down = DistanceProfile(0, np.arange(3 * K, K - 1, -1))
    assert extract_particles(down).occupancy.all()


def test_reconstruct_inverts_extract():
    for K in (1, 2, 3):
        for s in range(1 << (2 * K)):
            state = state_from_int(s, K)
            anchor = 3 * K + 10  # parity K mod 2, matching row -K of column 0
            profile = reconstruct_profile(anchor, state)
            assert extract_particles(profile) == state
            assert profile.d[0] == anchor


def test_reconstruct_increment_no_event_is_one():
    s = state_from_int(0b0110, 2)
    for j in range(-2, 3):
        assert reconstruct_increment(s, s, j) == 1


def test_reconstruct_increment_single_swap():
    K = 2
    now = TasepState(np.array([0, 1, 0, 0], dtype=np.uint8))  # particle at site 0
    nxt = TasepState(np.array([0, 0, 1, 0], dtype=np.uint8))  # moved to site 1
    # swap across the pair (0, 1) corresponds to row j = 0
    assert reconstruct_increment(now, nxt, 0) == 3
    for j in (-1, 1):
        assert reconstruct_increment(now, nxt, j) == 1
    # boundary rows: no entry, no exit
    assert reconstruct_increment(now, nxt, -K) == 1
    assert reconstruct_increment(now, nxt, K) == 1


def test_reconstruct_increment_entry_and_exit():
    K = 2
    empty = TasepState(np.zeros(4, dtype=np.uint8))
    entered = TasepState(np.array([1, 0, 0, 0], dtype=np.uint8))
    assert reconstruct_increment(empty, entered, -K) == 3
    assert reconstruct_increment(empty, entered, K) == 1
    last = TasepState(np.array([0, 0, 0, 1], dtype=np.uint8))
    exited = TasepState(np.zeros(4, dtype=np.uint8))
    assert reconstruct_increment(last, exited, K) == 3
    assert reconstruct_increment(last, exited, -K) == 1


def test_reconstruct_increment_rejects_unreachable():
    a = TasepState(np.array([0, 0, 0, 0], dtype=np.uint8))
    b = TasepState(np.array([0, 0, 1, 0], dtype=np.uint8))  # spawned in the bulk
    with pytest.raises(ContractError):
        reconstruct_increment(a, b, 0)


def test_reconstruct_increment_rejects_bad_row():
    s = state_from_int(0, 2)
    with pytest.raises(ParameterError):
        reconstruct_increment(s, s, 3)


@pytest.mark.parametrize("eps", [0.0, 1.0])
def test_verify_coupling_degenerate_eps(eps):
    report = verify_coupling(3, eps, 500, seed=0)
    assert report.passed and report.steps_checked == 500


def test_verify_coupling_random_instances():
    for seed in range(10):
        report = verify_coupling(2, 0.4, 200, seed=seed)
        assert report.passed, report.to_dict()


def test_report_merge_and_dict():
    a = CouplingReport(100, 0, None, seed=1)
    b = CouplingReport(50, 2, (7, 0, 1, 0), seed=1)
    merged = a.merge(b)
    assert merged.steps_checked == 150
    assert merged.mismatches == 2
    assert merged.first_mismatch == (7, 0, 1, 0)
    assert not merged.passed
    d = merged.to_dict()
    assert d["mismatches"] == 2 and d["first_mismatch"] == [7, 0, 1, 0]


@given(st.integers(1, 4), st.integers(0, 2**32))
@settings(max_examples=25, deadline=None)
def test_coupling_property(K, seed):
    assert verify_coupling(K, 0.3, 100, seed).passed
