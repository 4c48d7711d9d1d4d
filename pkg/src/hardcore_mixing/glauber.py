"""Single-site Glauber dynamics: exact kernels, conductance, mixing times.

The chain on I(g): pick a uniform vertex, propose adding it with probability
lambda/(1+lambda) (else removing it), accept iff the result is independent.
Rejected proposals stay put, so the diagonal is positive and the chain is
aperiodic; it is reversible with stationary measure lambda^|I|/Z.

Exact analysis materializes the transition structure over the full state
space (rational arithmetic when lambda is rational); simulation runs the
same dynamics as a bit-parallel kernel with the package's splitmix64 stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath as mp
import numpy as np

from .errors import (
    CapExceededError,
    InvalidParameterError,
    IterationBudgetError,
    PreconditionError,
)
from .graphs import BipartiteGraph, VertexSet
from .hardcore import HardCoreModel, is_independent, iter_independent_sets
from .numerics import as_fraction
from .rng import (
    GENERATOR_VERSION,
    SplitMix64,
    derive_seed,
    probability_threshold_u64,
)

DEFAULT_MATRIX_CAP = 20_000
DEFAULT_SCAN_CAP = 22  # float full-cut scan: 2^|Omega| subsets
DEFAULT_EXACT_SCAN_CAP = 12  # rational full-cut scan
DEFAULT_MIXING_BUDGET = 1_000_000
DENSE_MIXING_CAP = 4_000  # dense per-start evolution memory bound


# -- single steps -----------------------------------------------------------


@dataclass
class GlauberChain:
    """A seeded realization of the dynamics.

    Vertex proposals draw a class-ordered index (even class first, then odd)
    uniformly over V; the map to vertex ids is a fixed bijection so the
    kernel and this object consume identical streams.
    """

    model: HardCoreModel
    rng_seed: int
    _rng: SplitMix64 = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._rng = SplitMix64(derive_seed(self.rng_seed, 0))

    def step(self, I: VertexSet) -> VertexSet:
        return glauber_step(self.model, I, self._rng)


def _add_threshold_u64(lam) -> int:
    if isinstance(lam, (Fraction, int)):
        lamf = as_fraction(lam)
        return probability_threshold_u64(lamf.numerator, lamf.numerator + lamf.denominator)
    frac = as_fraction(float(lam))
    return probability_threshold_u64(frac.numerator, frac.numerator + frac.denominator)


def glauber_step(m: HardCoreModel, I: VertexSet, rng: SplitMix64) -> VertexSet:
    """One move: uniform vertex, add with prob lambda/(1+lambda) else remove,
    accept iff independent."""
    g = m.graph
    if not is_independent(g, I):
        raise InvalidParameterError("glauber step requires an independent state")
    pos = rng.next_below(g.num_vertices)
    add = rng.next_bool(_add_threshold_u64(m.lam))
    if pos < g.half_size:
        v = g.even_class[pos]
    else:
        v = g.odd_class[pos - g.half_size]
    if add:
        if v in I:
            return I
        if g.neighbor_bits(v) & I.bits:
            return I  # blocked: proposal rejected, stay
        return I.add(v)
    return I.remove(v) if v in I else I


def transition_probability(m: HardCoreModel, I: VertexSet, J: VertexSet):
    """The four-case kernel P(I, J), exact when lambda is rational."""
    g = m.graph
    for name, S in (("I", I), ("J", J)):
        if not is_independent(g, S):
            raise InvalidParameterError(f"{name} is not independent")
    exact = m.exact
    lam = as_fraction(m.lam) if exact else float(m.lam)
    one = Fraction(1) if exact else 1.0
    n = g.num_vertices
    diff = I.bits ^ J.bits
    if diff == 0:
        return one - _offdiagonal_mass(m, I)
    if diff.bit_count() > 1:
        return one * 0
    if I.issubset(J):  # J = I + v
        return (one / n) * (lam / (1 + lam))
    return (one / n) * (one / (1 + lam))  # J = I - v


def _offdiagonal_mass(m: HardCoreModel, I: VertexSet):
    g = m.graph
    exact = m.exact
    lam = as_fraction(m.lam) if exact else float(m.lam)
    one = Fraction(1) if exact else 1.0
    n = g.num_vertices
    removals = len(I)
    addable = sum(
        1
        for v in range(n)
        if not (I.bits >> v) & 1 and g.neighbor_bits(v) & I.bits == 0
    )
    return (removals * (one / (1 + lam)) + addable * (lam / (1 + lam))) / n


def transition_diagonal_event_sum(m: HardCoreModel, I: VertexSet):
    """P(I, I) summed over rejected/no-op proposal events (the independent
    route used to cross-check the complement computation)."""
    g = m.graph
    exact = m.exact
    lam = as_fraction(m.lam) if exact else float(m.lam)
    one = Fraction(1) if exact else 1.0
    n = g.num_vertices
    total = one * 0
    for v in range(n):
        in_i = bool((I.bits >> v) & 1)
        if in_i:
            total += lam / (1 + lam)  # adding a present vertex: I' = I
        else:
            total += one / (1 + lam)  # removing an absent vertex: I' = I
            if g.neighbor_bits(v) & I.bits:
                total += lam / (1 + lam)  # blocked addition: rejected
    return total / n


# -- exact chain analysis ----------------------------------------------------


@dataclass
class ChainAnalysis:
    """Materialized transition structure over the full state space.

    states: all independent sets ordered by (size, lexicographic bitstring);
    rows: sparse off-diagonal transition rows {j: P(i,j)};
    diag: P(i,i) as 1 minus off-diagonal mass;
    weights/pi: stationary data (exact Fractions in rational mode).
    """

    model: HardCoreModel
    states: list[VertexSet]
    index: dict[int, int]
    rows: list[dict[int, object]]
    diag: list[object]
    weights: list[object]
    z: object
    pi: list[object]

    @property
    def exact(self) -> bool:
        return self.model.exact

    @property
    def size(self) -> int:
        return len(self.states)

    def transition(self, i: int, j: int):
        if i == j:
            return self.diag[i]
        return self.rows[i].get(j, self.z * 0)

    def float_matrix(self) -> np.ndarray:
        n = self.size
        p = np.zeros((n, n))
        for i, row in enumerate(self.rows):
            for j, val in row.items():
                p[i, j] = float(val)
            p[i, i] = float(self.diag[i])
        return p

    def float_pi(self) -> np.ndarray:
        return np.array([float(x) for x in self.pi])


def _state_sort_key(I: VertexSet) -> tuple:
    bits = I.bits
    n = I.universe
    return (bits.bit_count(), tuple((bits >> i) & 1 for i in range(n)))


def build_chain_analysis(
    m: HardCoreModel, cap: int = DEFAULT_MATRIX_CAP
) -> ChainAnalysis:
    """Materialize P and pi; verifies stochasticity, stationarity, and
    detailed balance on construction."""
    g = m.graph
    states = sorted(iter_independent_sets(g, max_count=cap + 1), key=_state_sort_key)
    if len(states) > cap:
        raise CapExceededError(f"state space exceeds matrix cap {cap}")
    index = {s.bits: i for i, s in enumerate(states)}
    exact = m.exact
    lam = as_fraction(m.lam) if exact else float(m.lam)
    one = Fraction(1) if exact else 1.0
    n = g.num_vertices
    p_add = (one / n) * (lam / (1 + lam))
    p_del = (one / n) * (one / (1 + lam))

    rows: list[dict[int, object]] = []
    diag: list[object] = []
    for i, I in enumerate(states):
        row: dict[int, object] = {}
        for v in range(n):
            if (I.bits >> v) & 1:
                row[index[I.bits & ~(1 << v)]] = p_del
            elif g.neighbor_bits(v) & I.bits == 0:
                row[index[I.bits | (1 << v)]] = p_add
        rows.append(row)
        off = sum(row.values(), one * 0)
        diag.append(one - off)

    weights = [lam ** len(s) for s in states]
    z = sum(weights, one * 0)
    pi = [w / z for w in weights]

    analysis = ChainAnalysis(m, states, index, rows, diag, weights, z, pi)
    _verify_on_construction(analysis)
    return analysis


def _verify_on_construction(a: ChainAnalysis) -> None:
    tol = 0 if a.exact else 1e-12
    for i in range(a.size):
        row_sum = a.diag[i] + sum(a.rows[i].values(), a.z * 0)
        if abs(row_sum - 1) > tol:
            raise InvalidParameterError(f"row {i} sums to {row_sum}, not 1")
        if a.diag[i] < 0:
            raise InvalidParameterError(f"negative diagonal at state {i}")
    # detailed balance on the sparse structure
    for i in range(a.size):
        for j, pij in a.rows[i].items():
            pji = a.rows[j].get(i, a.z * 0)
            if abs(a.pi[i] * pij - a.pi[j] * pji) > tol:
                raise InvalidParameterError(f"detailed balance fails at ({i},{j})")
    # stationarity pi P = pi
    for j in range(a.size):
        mass = a.pi[j] * a.diag[j]
        for i in range(a.size):
            pij = a.rows[i].get(j)
            if pij is not None:
                mass += a.pi[i] * pij
        if abs(mass - a.pi[j]) > tol:
            raise InvalidParameterError(f"pi P != pi at state {j}")


# -- conductance -------------------------------------------------------------


def edge_flow(a: ChainAnalysis, i: int, j: int):
    """Q(i, j) = pi(i) P(i, j)."""
    return a.pi[i] * a.transition(i, j)


def conductance_of_set(a: ChainAnalysis, S: Sequence[int]):
    """Phi(S) = Q(S, complement) / pi(S) for nonempty proper S."""
    s_set = set(S)
    if not s_set or len(s_set) >= a.size:
        raise InvalidParameterError("S must be a nonempty proper subset of states")
    if any(not 0 <= i < a.size for i in s_set):
        raise InvalidParameterError("state index out of range")
    flow = a.z * 0
    for i in s_set:
        for j, pij in a.rows[i].items():
            if j not in s_set:
                flow += a.pi[i] * pij
    pis = sum((a.pi[i] for i in s_set), a.z * 0)
    return flow / pis


def chain_conductance_exact(
    a: ChainAnalysis,
    scan_cap: int = DEFAULT_SCAN_CAP,
    exact_cap: int = DEFAULT_EXACT_SCAN_CAP,
):
    """Phi_M = min Phi(S) over 0 < pi(S) <= 1/2, by full cut scan.

    Returns (phi, argmin_states).  Rational mode scans with exact arithmetic
    (state count capped at exact_cap); float mode uses the Gray-code kernel
    up to scan_cap states.
    """
    n = a.size
    if a.exact:
        if n > exact_cap:
            raise CapExceededError(
                f"{n} states exceed exact cut-scan cap {exact_cap}; "
                "use the float scan or the bottleneck bound"
            )
        half = Fraction(1, 2)
        best = None
        best_mask = 0
        # precompute flows on the sparse structure
        qrows: list[dict[int, Fraction]] = [
            {j: a.pi[i] * pij for j, pij in a.rows[i].items()} for i in range(n)
        ]
        for mask in range(1, (1 << n) - 1):
            pis = sum(a.pi[i] for i in range(n) if (mask >> i) & 1)
            if not 0 < pis <= half:
                continue
            flow = Fraction(0)
            for i in range(n):
                if (mask >> i) & 1:
                    for j, qij in qrows[i].items():
                        if not (mask >> j) & 1:
                            flow += qij
            phi = flow / pis
            if best is None or phi < best:
                best, best_mask = phi, mask
        if best is None:
            raise InvalidParameterError("no cut with 0 < pi(S) <= 1/2 exists")
        return best, [i for i in range(n) if (best_mask >> i) & 1]

    if n > scan_cap:
        raise CapExceededError(
            f"{n} states exceed cut-scan cap {scan_cap}; use the bottleneck bound"
        )
    from .kernels import conductance_scan

    indptr = [0]
    indices: list[int] = []
    qdata: list[float] = []
    rowsum = np.zeros(n)
    fpi = a.float_pi()
    for i in range(n):
        srow = sorted(a.rows[i].items())
        for j, pij in srow:
            indices.append(j)
            qdata.append(float(a.pi[i] * pij))
        rowsum[i] = float(sum(float(a.pi[i] * pij) for _, pij in srow))
        indptr.append(len(indices))
    phi, mask, _, _ = conductance_scan(
        np.array(indptr, dtype=np.int64),
        np.array(indices, dtype=np.int64),
        np.array(qdata),
        rowsum,
        fpi,
        0.5 + 1e-15,
    )
    return phi, [i for i in range(n) if (mask >> i) & 1]


def conductance_lower_bound_on_mixing(phi) -> float:
    """(1/2 - 1/e) / phi."""
    if phi <= 0 or phi > 1:
        raise InvalidParameterError("conductance must lie in (0, 1]")
    return float((0.5 - 1 / mp.e) / phi)


# -- mixing time -------------------------------------------------------------

_TV_GUARD_DPS = 60


def _tv_exceeds_threshold(tv: Fraction, threshold: str) -> bool:
    """Exact decision of TV > 1/e (or 1/4); TV is rational so ties with 1/e
    are impossible and a precision guard enforces a safe margin."""
    if threshold == "1/4":
        return tv > Fraction(1, 4)
    with mp.workdps(_TV_GUARD_DPS):
        gap = mp.mpf(tv.numerator) / mp.mpf(tv.denominator) - 1 / mp.e
        if abs(gap) < mp.mpf(10) ** (-_TV_GUARD_DPS + 10):
            raise InvalidParameterError("TV distance indistinguishable from 1/e")
        return gap > 0


def mixing_time_exact(
    a: ChainAnalysis,
    budget: int = DEFAULT_MIXING_BUDGET,
    threshold: str = "1/e",
) -> int:
    """Worst-start mixing time: the smallest t0 with TV(t) <= 1/e for every
    t > t0 and every start.

    Per-start TV to stationarity is non-increasing (one chain step contracts
    total variation), which the evolution cross-checks each step; the run
    continues until TV falls to half the threshold, certifying no later
    excursion above it.
    """
    if a.exact:
        return _mixing_exact_rational(a, budget, threshold)
    return _mixing_float(a, budget, threshold)


def _threshold_float(threshold: str) -> float:
    if threshold == "1/4":
        return 0.25
    if threshold == "1/e":
        return float(1 / mp.e)
    raise InvalidParameterError(f"unknown TV threshold {threshold!r}")


def _mixing_exact_rational(a: ChainAnalysis, budget: int, threshold: str) -> int:
    n = a.size
    if n == 1:
        return 0
    dists = [[Fraction(1) if j == i else Fraction(0) for j in range(n)] for i in range(n)]
    pi = a.pi
    last_above = -1
    prev_tv = [None] * n

    def tv_of(dist) -> Fraction:
        return sum(abs(dist[j] - pi[j]) for j in range(n)) / 2

    # certification: stop once worst TV <= threshold/2 (monotone decrease
    # makes a later excursion above the threshold impossible)
    half_limit = Fraction(1, 8) if threshold == "1/4" else None
    for t in range(budget + 1):
        worst = Fraction(0)
        any_above = False
        for i in range(n):
            tv = tv_of(dists[i])
            if prev_tv[i] is not None and tv > prev_tv[i]:
                raise InvalidParameterError("TV increased along the evolution")
            prev_tv[i] = tv
            worst = max(worst, tv)
            if _tv_exceeds_threshold(tv, threshold):
                any_above = True
        if any_above:
            last_above = t
        done = worst <= half_limit if half_limit is not None else not _tv_exceeds_threshold(
            worst * 2, threshold
        )  # worst <= (1/e)/2  <=>  2*worst <= 1/e
        if done:
            return max(last_above, 0)
        # advance every start by one step
        new = []
        for i in range(n):
            dist = dists[i]
            nxt = [dist[j] * a.diag[j] for j in range(n)]
            for src in range(n):
                mass = dist[src]
                if mass:
                    for j, pij in a.rows[src].items():
                        nxt[j] += mass * pij
            new.append(nxt)
        dists = new
    raise IterationBudgetError(f"mixing time did not certify within {budget} steps")


def _mixing_float(a: ChainAnalysis, budget: int, threshold: str) -> int:
    n = a.size
    if n == 1:
        return 0
    if n > DENSE_MIXING_CAP:
        raise CapExceededError(
            f"{n} states exceed the dense mixing-evolution cap {DENSE_MIXING_CAP}"
        )
    thr = _threshold_float(threshold)
    p = a.float_matrix()
    pi = a.float_pi()
    dists = np.eye(n)
    last_above = -1
    prev_worst = np.inf
    for t in range(budget + 1):
        tv = 0.5 * np.abs(dists - pi).sum(axis=1)
        worst = float(tv.max())
        if worst > prev_worst + 1e-12:
            raise InvalidParameterError("TV increased along the evolution")
        prev_worst = worst
        if worst > thr:
            last_above = t
        if worst <= thr / 2:
            return max(last_above, 0)
        dists = dists @ p
    raise IterationBudgetError(f"mixing time did not certify within {budget} steps")


def mixing_curve(
    a: ChainAnalysis, budget: int = DEFAULT_MIXING_BUDGET, threshold: str = "1/e"
) -> list[tuple[int, float]]:
    """(t, worst-start TV) until the certification point of the mixing time."""
    n = a.size
    thr = _threshold_float(threshold)
    if n == 1:
        return [(0, 0.0)]
    if n > DENSE_MIXING_CAP:
        raise CapExceededError(f"{n} states exceed cap {DENSE_MIXING_CAP}")
    p = a.float_matrix()
    pi = a.float_pi()
    dists = np.eye(n)
    out = []
    for t in range(budget + 1):
        worst = float((0.5 * np.abs(dists - pi).sum(axis=1)).max())
        out.append((t, worst))
        if worst <= thr / 2:
            return out
        dists = dists @ p
    raise IterationBudgetError(f"mixing curve did not finish within {budget} steps")


# -- spectral gap ------------------------------------------------------------


def spectral_gap(
    a: ChainAnalysis, budget: int = 200_000, tol: float = 1e-13
) -> float | None:
    """1 - lambda_2 via deflated power iteration in the pi-weighted inner
    product; None for a single-state chain (no second eigenvalue).

    The kernel is symmetrized to S = D^(1/2) P D^(-1/2) and shifted to
    (I + S)/2 so the iteration converges to the second-largest eigenvalue
    even when a negative eigenvalue dominates in magnitude.
    """
    n = a.size
    if n == 1:
        return None
    p = a.float_matrix()
    pi = a.float_pi()
    rt = np.sqrt(pi)
    s = (rt[:, None] * p) / rt[None, :]
    if not np.allclose(s, s.T, atol=1e-11):
        raise InvalidParameterError("symmetrized kernel is not symmetric")
    s = 0.5 * (s + s.T)
    shifted = 0.5 * (np.eye(n) + s)
    top = rt / np.linalg.norm(rt)

    rng = np.random.default_rng(1)
    v = rng.standard_normal(n)
    v -= top * (top @ v)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise InvalidParameterError("degenerate start vector")
    v /= norm
    mu_prev = np.inf
    for _ in range(budget):
        w = shifted @ v
        w -= top * (top @ w)
        norm = np.linalg.norm(w)
        if norm < 1e-300:
            return 2.0  # deflated operator is (numerically) zero: lambda_2 = -1 shifted
        v = w / norm
        mu = float(v @ (shifted @ v))
        if abs(mu - mu_prev) <= tol:
            lam2 = 2 * mu - 1
            return float(1 - lam2)
        mu_prev = mu
    raise IterationBudgetError(f"power iteration did not converge in {budget} steps")


# -- the bottleneck bound ------------------------------------------------------


@dataclass(frozen=True)
class BottleneckBound:
    """The three-stage conductance bound through the balanced bottleneck.

    stage1: Phi(majority phase) exactly;
    stage2: w(balanced) / w(majority phase);
    stage3: w(balanced) / (1+lambda)^M  (stage2 with the denominator replaced
            by the weight of all subsets of one class, empty set included --
            on very small graphs that replacement can exceed the true phase
            weight and stage3 then drops below stage2).
    """

    side: str
    phi_phase: object
    ratio_balanced_phase: object
    ratio_balanced_power: object
    holds_12: bool
    holds_23: bool
    mode: str


def bottleneck_conductance_bound(
    m: HardCoreModel, cap: int = DEFAULT_MATRIX_CAP
) -> BottleneckBound:
    """Phi(majority phase) <= w(balanced)/w(phase) and the (1+lambda)^M form.

    The phase is the even-majority region unless its stationary mass exceeds
    1/2, in which case parities swap (without loss of generality).
    """
    g = m.graph
    exact = m.exact
    lam = as_fraction(m.lam) if exact else float(m.lam)
    one = Fraction(1) if exact else 1.0
    n = g.num_vertices
    even_bits = g.even_set().bits

    w_e = one * 0
    w_o = one * 0
    w_b = one * 0
    z = one * 0
    for I in iter_independent_sets(g, max_count=cap + 1):
        w = lam ** len(I)
        z += w
        se = (I.bits & even_bits).bit_count()
        so = len(I) - se
        if se > so:
            w_e += w
        elif so > se:
            w_o += w
        else:
            w_b += w

    side = "even"
    w_phase = w_e
    if 2 * w_e > z:
        side = "odd"
        w_phase = w_o
        if 2 * w_o > z:
            raise PreconditionError("both majority phases exceed mass 1/2")

    # Q(phase, rest): only boundary states (majority exceeding by exactly 1)
    # can leave in one step, via removing a majority vertex or adding a
    # minority vertex.
    p_add = (one / n) * (lam / (1 + lam))
    p_del = (one / n) * (one / (1 + lam))
    flow = one * 0
    for I in iter_independent_sets(g, max_count=cap + 1):
        se = (I.bits & even_bits).bit_count()
        so = len(I) - se
        maj, minr = (se, so) if side == "even" else (so, se)
        if maj != minr + 1:
            continue
        w = lam ** len(I)
        majority_members = maj
        addable_minority = 0
        minority_ids = g.odd_class if side == "even" else g.even_class
        for v in minority_ids:
            if not (I.bits >> v) & 1 and g.neighbor_bits(v) & I.bits == 0:
                addable_minority += 1
        flow += w * (majority_members * p_del + addable_minority * p_add)

    phi_phase = flow / w_phase
    ratio2 = w_b / w_phase
    power = (1 + lam) ** g.half_size
    ratio3 = w_b / power
    return BottleneckBound(
        side=side,
        phi_phase=phi_phase,
        ratio_balanced_phase=ratio2,
        ratio_balanced_power=ratio3,
        holds_12=phi_phase <= ratio2,
        holds_23=ratio2 <= ratio3,
        mode="exact-rational" if exact else "float64",
    )


# -- escape-time simulation ---------------------------------------------------


@dataclass(frozen=True)
class EscapeSummary:
    seeds: tuple[int, ...]
    hit_times: tuple[int, ...]  # -1 where censored
    max_steps: int
    censored: int
    median: int | None
    quantiles: dict
    generator: str
    base_seed: int


def escape_time_experiment(
    m: HardCoreModel,
    seeds: Sequence[int],
    max_steps: int,
    base_seed: int = 0,
    start: str = "even-full",
) -> EscapeSummary:
    """Hitting time of {|I∩even| <= |I∩odd|} from the full even class.

    Runs one independent chain per seed (stream = splitmix64 derived from
    (base_seed, seed)); censoring at max_steps is reported, never an error.
    """
    from .kernels import escape_times

    g = m.graph
    if start == "even-full":
        start_even = (1 << g.half_size) - 1
        start_odd = 0
    elif start == "empty":
        start_even = 0
        start_odd = 0
    elif start == "odd-full":
        start_even = 0
        start_odd = (1 << g.half_size) - 1
    else:
        raise InvalidParameterError(f"unknown start {start!r}")

    states = np.array(
        [derive_seed(base_seed, int(s)) for s in seeds], dtype=np.uint64
    )
    times = escape_times(
        g.class_masks("even"),
        g.class_masks("odd"),
        g.half_size,
        g.half_size,
        start_even,
        start_odd,
        _add_threshold_u64(m.lam),
        states,
        int(max_steps),
    )
    hit = [int(t) for t in times]
    censored = sum(1 for t in hit if t < 0)
    # order statistics treat censored runs as +infinity
    ordered = sorted((t if t >= 0 else None for t in hit), key=lambda x: (x is None, x))
    qs = {}
    for q in (0.25, 0.5, 0.75, 0.9):
        k = min(len(ordered) - 1, int(q * len(ordered)))
        qs[str(q)] = ordered[k]
    return EscapeSummary(
        seeds=tuple(int(s) for s in seeds),
        hit_times=tuple(hit),
        max_steps=int(max_steps),
        censored=censored,
        median=qs["0.5"],
        quantiles=qs,
        generator=GENERATOR_VERSION,
        base_seed=base_seed,
    )
