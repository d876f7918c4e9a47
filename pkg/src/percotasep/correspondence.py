"""Bijection between Cross-model distance profiles and particle states.

A profile column determines a particle configuration (a particle sits at
site j when the distance drops across the vertical edge below j), the
pair (anchor distance at row -K, particle pattern) reconstructs the
profile, and evolving profiles by edge columns commutes with evolving
particles by the coupled TASEP step. verify_coupling checks all of this
on sampled edge sequences and reports mismatches as data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from percotasep import rng as rng_mod
from percotasep.errors import ContractError, ParameterError
from percotasep.strip import (
    DistanceProfile,
    Model,
    StripGeometry,
    cross_step,
    initial_profile,
    sample_strip,
)
from percotasep.tasep import TasepState, coupled_tasep_step


def extract_particles(profile: DistanceProfile) -> TasepState:
    """Particle state of a profile: site j occupied iff d[j] = d[j-1] - 1."""
    profile.validate()
    occ = (np.diff(profile.d) == -1).astype(np.uint8)
    return TasepState(occ)


def reconstruct_profile(
    anchor: int, state: TasepState, column_index: int = 0
) -> DistanceProfile:
    """Invert extraction: rebuild a profile from d[-K] and the particle pattern."""
    steps = np.where(state.occupancy == 1, -1, 1)
    d = np.concatenate(([anchor], anchor + np.cumsum(steps))).astype(np.int64)
    return DistanceProfile(column_index, d)


def _fired_events(y_now: TasepState, y_next: TasepState):
    """Recover (entry, moves, exit) from a coupled transition; validate it."""
    a, b = y_now.occupancy, y_next.occupancy
    if a.shape != b.shape:
        raise ContractError("states have different K")
    n = a.shape[0]
    entry = a[0] == 0 and b[0] == 1
    exit_ = a[n - 1] == 1 and b[n - 1] == 0
    moves = (a[:-1] == 1) & (a[1:] == 0) & (b[:-1] == 0) & (b[1:] == 1)
    check = a.copy()
    check[:-1][moves] = 0
    check[1:][moves] = 1
    if entry:
        check[0] = 1
    if exit_:
        check[n - 1] = 0
    if not np.array_equal(check, b):
        raise ContractError("y_next is not reachable from y_now in one step")
    return entry, moves, exit_


def reconstruct_increment(y_now: TasepState, y_next: TasepState, j: int) -> int:
    """D(i+1, j) - D(i, j) recovered from the particle transition.

    Interior rows use the swap indicator of the sites (j, j+1); the
    boundary rows -K and K use the entry and exit indicators, which is
    what the boundary cases of the coupling force there.
    """
    K = y_now.K
    if not -K <= j <= K:
        raise ParameterError(f"row {j} outside [-K, K]")
    entry, moves, exit_ = _fired_events(y_now, y_next)
    if j == -K:
        return 3 if entry else 1
    if j == K:
        return 3 if exit_ else 1
    return 3 if moves[j + K - 1] else 1


@dataclass
class CouplingReport:
    """Outcome of a coupling verification run; mergeable by summation."""

    steps_checked: int = 0
    mismatches: int = 0
    first_mismatch: tuple | None = None
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return self.mismatches == 0

    def merge(self, other: "CouplingReport") -> "CouplingReport":
        first = self.first_mismatch or other.first_mismatch
        return CouplingReport(
            self.steps_checked + other.steps_checked,
            self.mismatches + other.mismatches,
            first,
            self.seed,
        )

    def to_dict(self) -> dict:
        return {
            "steps_checked": self.steps_checked,
            "mismatches": self.mismatches,
            "first_mismatch": list(self.first_mismatch)
            if self.first_mismatch
            else None,
            "seed": self.seed,
        }


def verify_coupling(K: int, eps: float, n_columns: int, seed: int) -> CouplingReport:
    """Run profiles and particles side by side on one sampled edge sequence.

    Asserts, per column: extracted particles equal the coupled TASEP
    state, and the cumulative reconstructed increments at row 0 equal
    the swept distance D(i, 0). Divergences are reported, not raised.
    """
    geom = StripGeometry(K, Model.CROSS)
    config = sample_strip(rng_mod.stream(seed), geom, eps, n_columns)
    report = CouplingReport(seed=seed)
    profile = initial_profile(K)
    state = extract_particles(profile)
    reconstructed_d0 = int(profile.d[K])
    for i in range(n_columns):
        col = config.column(i)
        profile = cross_step(profile, col)
        new_state = coupled_tasep_step(state, col)
        reconstructed_d0 += reconstruct_increment(state, new_state, 0)
        state = new_state
        report.steps_checked += 1
        extracted = extract_particles(profile)
        if extracted != state:
            row = int(np.nonzero(extracted.occupancy != state.occupancy)[0][0])
            report.mismatches += 1
            if report.first_mismatch is None:
                report.first_mismatch = (
                    i + 1,
                    row - K + 1,
                    int(extracted.occupancy[row]),
                    int(state.occupancy[row]),
                )
        if reconstructed_d0 != int(profile.d[K]):
            report.mismatches += 1
            if report.first_mismatch is None:
                report.first_mismatch = (
                    i + 1,
                    0,
                    int(profile.d[K]),
                    reconstructed_d0,
                )
    return report
