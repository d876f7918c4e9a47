"""Synchronous TASEP on 2K sites with open boundaries.

Sites are indexed j = -K+1..K and stored at array position i = j + K - 1.
A step is simultaneous: every decision reads the time-t configuration.
With jump, entry and exit rates all equal to eps, the chain is exactly
the particle system coupled to the Cross-model distance profiles
(see percotasep.correspondence).

Draw layout (fixed by contract, shared with the edge sampler): one
uniform per edge row -K..K, i.e. 2K+1 per step. Draw 0 drives entry at
site -K+1, draw i+1 drives the move of a particle at array position i,
draw 2K drives exit at site K. An event fires iff its uniform is < rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from percotasep._backend import tasep_chunk
from percotasep.errors import (
    CapacityError,
    ContractError,
    DegenerateChainError,
    ParameterError,
)
from percotasep.strip import EdgeColumn

EXACT_K_CAP = 7  # 2^(2K) states; 7 -> 16384, the dense-vector budget

DEFAULT_BATCH_SIZE = 1000  # batch-means block length for simulated stderr


@dataclass(frozen=True, eq=False)
class TasepState:
    """Occupation vector; occupancy[i] is site j = i - K + 1, 1 = particle."""

    occupancy: np.ndarray

    def __post_init__(self):
        if self.occupancy.ndim != 1 or self.occupancy.shape[0] % 2 != 0:
            raise ContractError("occupancy must be a flat vector of 2K bits")

    @property
    def K(self) -> int:
        return self.occupancy.shape[0] // 2

    def site(self, j: int) -> int:
        """Occupancy of lattice site j in [-K+1, K]."""
        return int(self.occupancy[j + self.K - 1])

    def __eq__(self, other) -> bool:
        return isinstance(other, TasepState) and np.array_equal(
            self.occupancy, other.occupancy
        )


def state_from_int(bits: int, K: int) -> TasepState:
    occ = np.array([(bits >> i) & 1 for i in range(2 * K)], dtype=np.uint8)
    return TasepState(occ)


def state_to_int(state: TasepState) -> int:
    return int(sum(int(b) << i for i, b in enumerate(state.occupancy)))


def step_initial_state(K: int) -> TasepState:
    """Particle pattern extracted from the deterministic start profile |j|."""
    occ = np.zeros(2 * K, dtype=np.uint8)
    occ[:K] = 1  # sites -K+1..0 occupied
    return TasepState(occ)


@dataclass(frozen=True)
class TasepRates:
    """Jump (alpha), entry (beta) and exit (gamma) probabilities per step."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name} must be in [0, 1], got {v}")

    @classmethod
    def uniform(cls, eps: float) -> "TasepRates":
        return cls(eps, eps, eps)


class Method(Enum):
    EXACT_SOLVE = "exact"
    SIMULATION = "simulation"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class StationaryDistribution:
    K: int
    eps: float
    method: Method
    nu_pair: float
    probabilities: np.ndarray | None = None
    stderr: float | None = None
    samples: int | None = None
    residual: float | None = None
    nu_pair_exact: Fraction | None = field(default=None, repr=False)


def tasep_step(state: TasepState, rates: TasepRates, draws) -> TasepState:
    """One synchronous step; ``draws`` is 2K+1 uniforms or a Generator."""
    occ = state.occupancy
    n = occ.shape[0]
    if isinstance(draws, np.random.Generator):
        draws = draws.random(n + 1)
    draws = np.asarray(draws, dtype=np.float64)
    if draws.shape != (n + 1,):
        raise ContractError(f"expected {n + 1} draws, got shape {draws.shape}")
    new = occ.copy()
    movers = (occ[:-1] == 1) & (occ[1:] == 0) & (draws[1:n] < rates.alpha)
    new[:-1][movers] = 0
    new[1:][movers] = 1
    if occ[0] == 0 and draws[0] < rates.beta:
        new[0] = 1
    if occ[n - 1] == 1 and draws[n] < rates.gamma:
        new[n - 1] = 0
    return TasepState(new)


def coupled_tasep_step(state: TasepState, col: EdgeColumn) -> TasepState:
    """Deterministic step driven by an edge column: events fire on closed edges.

    This is the coupling of Cross-model profiles and particles: a closed
    horizontal edge at row j makes the event at row j fire (entry at
    row -K, bulk move at rows -K+1..K-1, exit at row K).
    """
    occ = state.occupancy
    n = occ.shape[0]
    closed = np.asarray(col.horizontal, dtype=bool)
    if closed.shape != (n + 1,) or col.vertical is not None:
        raise ContractError("edge column does not match the state's K")
    # "fires iff closed" is tasep_step with rate 1 draws 0/1.
    draws = np.where(closed, 0.0, 1.0)
    return tasep_step(state, TasepRates(1.0, 1.0, 1.0), draws)


# --- exact stationary distribution -------------------------------------------


def _enabled_events(s: int, n: int) -> list[tuple[str, int]]:
    """Events enabled in bitmask state s (bit i = array position i)."""
    events = []
    if not s & 1:
        events.append(("entry", 0))
    for i in range(n - 1):
        if (s >> i) & 1 and not (s >> (i + 1)) & 1:
            events.append(("move", i))
    if (s >> (n - 1)) & 1:
        events.append(("exit", n - 1))
    return events


def _apply_events(s: int, events, mask: int, n: int) -> int:
    t = s
    for idx, (kind, i) in enumerate(events):
        if not (mask >> idx) & 1:
            continue
        if kind == "entry":
            t |= 1
        elif kind == "exit":
            t &= ~(1 << (n - 1))
        else:
            t = (t & ~(1 << i)) | (1 << (i + 1))
    return t


def transition_matrix(K: int, rates: TasepRates) -> sp.csr_matrix:
    """Full 2^(2K) x 2^(2K) one-step matrix of the synchronous chain."""
    if K > EXACT_K_CAP:
        raise CapacityError(f"exact transition matrix capped at K={EXACT_K_CAP}")
    n = 2 * K
    size = 1 << n
    rows, cols, vals = [], [], []
    probs = {
        "entry": rates.beta,
        "move": rates.alpha,
        "exit": rates.gamma,
    }
    for s in range(size):
        events = _enabled_events(s, n)
        m = len(events)
        for mask in range(1 << m):
            p = 1.0
            for idx, (kind, _) in enumerate(events):
                p *= probs[kind] if (mask >> idx) & 1 else 1.0 - probs[kind]
            if p == 0.0:
                continue
            rows.append(s)
            cols.append(_apply_events(s, events, mask, n))
            vals.append(p)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(size, size))
    return mat.tocsr()


def transition_rows_scaled(
    K: int, eps: Fraction
) -> tuple[list[list[tuple[int, int]]], int]:
    """Integer-scaled transition rows for exact-rational propagation.

    With eps = a/q, every one-step probability is an integer multiple of
    q^-(K+1) (at most K+1 events are enabled in any state). Returns per-
    state lists of (target, scaled weight) and the common denominator
    q^(K+1); weights of each row sum to the denominator.
    """
    eps = Fraction(eps)
    a, q = eps.numerator, eps.denominator
    n = 2 * K
    size = 1 << n
    mmax = K + 1
    rows: list[list[tuple[int, int]]] = []
    for s in range(size):
        events = _enabled_events(s, n)
        m = len(events)
        assert m <= mmax
        row: dict[int, int] = {}
        for mask in range(1 << m):
            f = bin(mask).count("1")
            w = a**f * (q - a) ** (m - f) * q ** (mmax - m)
            if w == 0:
                continue
            t = _apply_events(s, events, mask, n)
            row[t] = row.get(t, 0) + w
        rows.append(sorted(row.items()))
    return rows, q**mmax


def _check_single_recurrent_class(P: sp.csr_matrix) -> None:
    support = (P > 0).astype(np.int8)
    n_comp, labels = connected_components(support, directed=True, connection="strong")
    if n_comp == 1:
        return
    coo = support.tocoo()
    leaving = set()
    for r, c in zip(labels[coo.row], labels[coo.col]):
        if r != c:
            leaving.add(r)
    terminal = set(range(n_comp)) - leaving
    if len(terminal) != 1:
        raise DegenerateChainError(
            f"chain has {len(terminal)} recurrent classes; need exactly 1"
        )


def stationary_exact(K: int, rates: TasepRates) -> StationaryDistribution:
    """Brute-force stationary vector of the synchronous chain.

    Power iteration with Cesaro averaging; falls back to a direct sparse
    solve of pi (P - I) = 0 when iteration stalls. The accepted vector
    satisfies ||pi P - pi||_1 <= 1e-10 and sums to 1 within 1e-12.
    """
    if K > EXACT_K_CAP:
        raise CapacityError(f"stationary_exact capped at K={EXACT_K_CAP}")
    for v in (rates.alpha, rates.beta, rates.gamma):
        if v in (0.0, 1.0):
            raise DegenerateChainError(
                "rates in {0, 1} give a degenerate chain; refusing to solve"
            )
    P = transition_matrix(K, rates)
    _check_single_recurrent_class(P)
    size = P.shape[0]
    pi = np.full(size, 1.0 / size)
    cesaro = np.zeros(size)
    best = None
    last_residual = np.inf
    stalled = 0
    for it in range(1, 20001):
        nxt = pi @ P
        cesaro += nxt
        residual = np.abs(nxt - pi).sum()
        pi = nxt
        if residual <= 1e-13:
            best = pi
            break
        if it % 100 == 0:
            avg = cesaro / it
            avg /= avg.sum()
            avg_res = np.abs(avg @ P - avg).sum()
            if avg_res <= 1e-13:
                best = avg
                break
            if last_residual - residual < 1e-14:
                stalled += 1
                if stalled >= 1:
                    break
            last_residual = residual
    if best is None:
        A = sp.lil_matrix((P.T - sp.eye(size)).tocsr())
        A[0, :] = 1.0
        b = np.zeros(size)
        b[0] = 1.0
        best = spsolve(A.tocsr(), b)
    best = np.maximum(best, 0.0)
    best /= best.sum()
    residual = float(np.abs(best @ P - best).sum())
    if residual > 1e-10:
        raise ContractError(f"stationary residual {residual:.2e} exceeds 1e-10")
    if abs(best.sum() - 1.0) > 1e-12:
        raise ContractError("stationary vector does not sum to 1")
    nu = nu_pair_from_probabilities(best, K)
    return StationaryDistribution(
        K=K,
        eps=rates.alpha,
        method=Method.EXACT_SOLVE,
        nu_pair=nu,
        probabilities=best,
        residual=residual,
    )


def nu_pair_from_probabilities(pi: np.ndarray, K: int) -> float:
    """nu(y0 = particle, y1 = hole) read off a full state vector."""
    idx = np.arange(pi.shape[0])
    sel = ((idx >> (K - 1)) & 1 == 1) & ((idx >> K) & 1 == 0)
    return float(pi[sel].sum())


def stationary_exact_rational(K: int, eps: Fraction):
    """Exact-rational stationary vector (Gaussian elimination over Fraction).

    Only small K is practical; capped at K=3 (64 states). Returns
    (pi, nu_pair) with exact Fraction entries.
    """
    if K > 3:
        raise CapacityError("rational stationary solve capped at K=3")
    eps = Fraction(eps)
    if eps <= 0 or eps >= 1:
        raise DegenerateChainError("eps must lie strictly inside (0, 1)")
    rows, den = transition_rows_scaled(K, eps)
    size = len(rows)
    # Solve x (P - I) = 0 with sum(x) = 1: columns of P^T - I, first
    # equation replaced by normalization.
    A = [[Fraction(0)] * size for _ in range(size)]
    for s, row in enumerate(rows):
        for t, w in row:
            A[t][s] += Fraction(w, den)
        A[s][s] -= 1
    for s in range(size):
        A[0][s] = Fraction(1)
    b = [Fraction(0)] * size
    b[0] = Fraction(1)
    # plain Gaussian elimination with partial (first nonzero) pivoting
    for col in range(size):
        pivot = next(r for r in range(col, size) if A[r][col] != 0)
        A[col], A[pivot] = A[pivot], A[col]
        b[col], b[pivot] = b[pivot], b[col]
        inv = 1 / A[col][col]
        A[col] = [v * inv for v in A[col]]
        b[col] *= inv
        for r in range(size):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [vr - f * vc for vr, vc in zip(A[r], A[col])]
                b[r] -= f * b[col]
    pi = b
    assert sum(pi) == 1
    nu = sum(
        p
        for s, p in enumerate(pi)
        if (s >> (K - 1)) & 1 == 1 and (s >> K) & 1 == 0
    )
    return pi, nu


# --- simulation ---------------------------------------------------------------


def _chunk_steps(K: int) -> int:
    return max(1024, (1 << 22) // (2 * K + 1))


def run_tasep(
    state: TasepState,
    rates: TasepRates,
    steps: int,
    rng: np.random.Generator,
) -> tuple[TasepState, np.ndarray]:
    """Advance ``steps`` synchronous steps; returns (state, pair indicators).

    The indicator array marks {site 0 occupied, site 1 empty} after each
    step. Uniform draws are consumed in the documented layout, chunked.
    """
    occ = state.occupancy.copy()
    out = np.empty(steps, dtype=np.uint8)
    done = 0
    chunk = _chunk_steps(state.K)
    while done < steps:
        s = min(chunk, steps - done)
        u = rng.random((s, occ.shape[0] + 1))
        out[done : done + s] = tasep_chunk(occ, u, rates.alpha, rates.beta, rates.gamma)
        done += s
    return TasepState(occ), out


def nu_pair_simulated(
    K: int,
    eps: float,
    burn_in: int,
    samples: int,
    rng: np.random.Generator,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> StationaryDistribution:
    """Long-run estimate of nu(particle at site 0, hole at site 1).

    Starts from the step initial state, discards ``burn_in`` steps, then
    averages the pair indicator over ``samples`` steps. The standard
    error comes from batch means with blocks of ``batch_size`` steps.
    """
    if K < 1:
        raise ParameterError("K must be >= 1")
    if burn_in <= 0 or samples <= 0:
        raise ParameterError("burn_in and samples must be positive")
    rates = TasepRates.uniform(eps)
    state = step_initial_state(K)
    state, _ = run_tasep(state, rates, burn_in, rng)
    _, ind = run_tasep(state, rates, samples, rng)
    nu = float(ind.mean())
    n_batches = samples // batch_size
    if n_batches >= 2:
        means = (
            ind[: n_batches * batch_size]
            .reshape(n_batches, batch_size)
            .mean(axis=1)
        )
        stderr = float(means.std(ddof=1) / math.sqrt(n_batches))
    else:
        stderr = float(ind.std(ddof=1) / math.sqrt(samples))
    return StationaryDistribution(
        K=K,
        eps=eps,
        method=Method.SIMULATION,
        nu_pair=nu,
        stderr=stderr,
        samples=samples,
    )


# --- closed forms (matrix-ansatz identities) -----------------------------------


def a_eps(K: int, eps, exact: bool = False):
    """A_eps(K) = (1/K) sum_{k=1..K} C(K,k) C(K,k+1) (1-eps)^k.

    Exact mode returns a Fraction (eps coerced to Fraction); floating
    mode evaluates in float64 and agrees with it to 12 significant
    digits for K <= 60.
    """
    if K < 1:
        raise ParameterError("K must be >= 1")
    if exact:
        e = Fraction(eps)
        total = sum(
            math.comb(K, k) * math.comb(K, k + 1) * (1 - e) ** k
            for k in range(1, K + 1)
        )
        return Fraction(total) / K
    total = 0.0
    term = 1.0  # (1-eps)^k, built multiplicatively
    one_minus = 1.0 - float(eps)
    for k in range(1, K + 1):
        term *= one_minus
        total += math.comb(K, k) * math.comb(K, k + 1) * term
    return total / K


def nu_pair_formula(K: int, eps, exact: bool = False):
    """Closed-form nu(K, eps) = A(K) / (eps A(K) + A(K+1)), as printed.

    Known discrepancy: at K = 1 this is identically 0 while the
    brute-force stationary value is positive; nu_compare surfaces the
    disagreement instead of reconciling it.
    """
    if float(eps) == 1.0:
        raise DegenerateChainError("nu formula is 0/0 at eps = 1")
    a_k = a_eps(K, eps, exact=exact)
    a_k1 = a_eps(K + 1, eps, exact=exact)
    e = Fraction(eps) if exact else float(eps)
    return a_k / (e * a_k + a_k1)


def nu_limit_K(eps: float) -> float:
    """Large-K limit (1 - sqrt(1-eps)) / (2 eps); 1/4 by continuity at 0."""
    if not 0.0 <= eps <= 1.0:
        raise ParameterError(f"eps must be in [0, 1], got {eps}")
    if eps == 0.0:
        return 0.25
    return (1.0 - math.sqrt(1.0 - eps)) / (2.0 * eps)
