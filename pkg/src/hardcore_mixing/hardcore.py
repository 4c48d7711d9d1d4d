"""Hard-core model: weighted independent-set enumeration and region weights.

The measure puts weight lambda^|I| on each independent set I.  Exact
big-rational arithmetic is used whenever lambda is rational (the default);
the float path uses compensated summation and is cross-checked against the
rational path in the tests.

The enumeration never walks the 2^N subsets of V.  Every subset A of the
even class is independent inside its class, and once A is fixed the odd
vertices split into blocked (adjacent to A) and free ones, so all weights
aggregate over the per-class scan histogram of (|A|, |[A]|, |N(A)|):

    sum over I with I∩even = A of lambda^|I| = lambda^|A| (1+lambda)^(M-|N(A)|)

with the |I∩odd| distribution binomial over the M-|N(A)| free vertices. The
same factorization drives the container-family bookkeeping.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import mpmath as mp

from .errors import CapExceededError, InvalidParameterError
from .graphs import BipartiteGraph, VertexSet, closure, side_scan
from .numerics import as_fraction, ceil_exact, floor_exact

DEFAULT_ENUMERATION_CAP = 48  # N cap for aggregate enumeration (M = N/2 <= 24)


class RegionTag(enum.Enum):
    EVEN_MAJORITY = "even-majority"
    ODD_MAJORITY = "odd-majority"
    BALANCED = "balanced"
    TRIVIAL = "trivial"
    NONTRIVIAL = "nontrivial"
    NONTRIVIAL_SMALL_EVEN = "nontrivial-small-even"
    NONTRIVIAL_SMALL_ODD = "nontrivial-small-odd"


@dataclass(frozen=True)
class HardCoreModel:
    """A bipartite graph with an activity lambda > 0.

    lambda may be a Fraction (exact mode) or a float (fast mode).
    """

    graph: BipartiteGraph
    lam: Fraction | float

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise InvalidParameterError(f"activity must be positive, got {self.lam}")

    @property
    def exact(self) -> bool:
        return isinstance(self.lam, (Fraction, int))

    def lam_fraction(self) -> Fraction:
        return as_fraction(self.lam)


@dataclass(frozen=True)
class EnumerationSummary:
    """Aggregate weights of one full enumeration."""

    partition_function: Fraction | float
    region_weights: dict
    family_weights: dict | None
    count: int
    mode: str
    lam: Fraction | float
    alpha_m: Fraction | float


# -- pointwise operations ---------------------------------------------------


def is_independent(g: BipartiteGraph, I: VertexSet) -> bool:
    """True iff I spans no edge of g."""
    for v in I:
        if g.neighbor_bits(v) & I.bits:
            return False
    return True


def weight(I: VertexSet, lam) -> Fraction | float:
    """lambda^|I|."""
    return lam ** len(I)


def classify(g: BipartiteGraph, I: VertexSet, alpha_m) -> frozenset[RegionTag]:
    """All region tags of an independent set at threshold alpha_m.

    Majority tags partition by comparing |I∩even| and |I∩odd|; trivial
    means both intersections <= alpha_m, nontrivial means both >= alpha_m
    (overlap at exact equality is intended), and the small-on-a-class tags
    refine nontrivial via the closure-size test 2|[I∩class]| <= M.
    """
    if not is_independent(g, I):
        raise InvalidParameterError("classify requires an independent set")
    ie = I.intersection(g.even_set())
    io = I.intersection(g.odd_set())
    se, so = len(ie), len(io)
    tags = set()
    if se > so:
        tags.add(RegionTag.EVEN_MAJORITY)
    elif so > se:
        tags.add(RegionTag.ODD_MAJORITY)
    else:
        tags.add(RegionTag.BALANCED)
    if se <= alpha_m and so <= alpha_m:
        tags.add(RegionTag.TRIVIAL)
    if se >= alpha_m and so >= alpha_m:
        tags.add(RegionTag.NONTRIVIAL)
        if 2 * len(closure(g, ie)) <= g.half_size:
            tags.add(RegionTag.NONTRIVIAL_SMALL_EVEN)
        if 2 * len(closure(g, io)) <= g.half_size:
            tags.add(RegionTag.NONTRIVIAL_SMALL_ODD)
    return frozenset(tags)


# -- the scalar functions alpha, beta, gamma --------------------------------


def _to_mpf(x) -> mp.mpf:
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / mp.mpf(x.denominator)
    return mp.mpf(x)


def alpha(lam: float) -> float:
    """The activity-dependent trivial-region threshold scale, in (0, 1/44).

    All logs base 2.
    """
    if lam <= 0:
        raise InvalidParameterError("lambda must be positive")
    L = math.log2(1 + lam)
    return L / (44 * (1 + L) * math.log2(2 + 1 / L))


def alpha_mp(lam) -> mp.mpf:
    """alpha at the current mpmath working precision."""
    L = mp.log(1 + _to_mpf(lam)) / mp.log(2)
    return L / (44 * (1 + L) * (mp.log(2 + 1 / L) / mp.log(2)))


def alpha_threshold_fraction(lam) -> Fraction:
    """alpha as a stated 64-bit rational: the IEEE-double value of alpha,
    taken exactly.  Classification thresholds compare against this Fraction
    so results are reproducible bit for bit."""
    with mp.workprec(80):
        a = alpha_mp(lam)
    return as_fraction(float(a))


def beta(lam: float, d: int, delta: float) -> float:
    """log2^2(1+lam) / (log2(1+lam) + log2(d^5/delta))."""
    _check_beta_domain(lam, d, delta)
    L = math.log2(1 + lam)
    return L * L / (L + math.log2(d**5 / delta))


def beta_mp(lam, d: int, delta) -> mp.mpf:
    _check_beta_domain(float(lam), d, float(delta))
    L = mp.log(1 + _to_mpf(lam)) / mp.log(2)
    return L * L / (L + mp.log(mp.mpf(d) ** 5 / _to_mpf(delta)) / mp.log(2))


def _check_beta_domain(lam: float, d: int, delta: float) -> None:
    if lam <= 0:
        raise InvalidParameterError("lambda must be positive")
    if d < 2:
        raise InvalidParameterError("degree must be >= 2")
    if not 0 < delta <= 1:
        raise InvalidParameterError("expansion constant must lie in (0, 1]")


def gamma_of_lambda(lam: float) -> float:
    """log2(1+lam) / (1 + log2(1+lam)), strictly inside (0,1)."""
    if lam <= 0:
        raise InvalidParameterError("lambda must be positive")
    L = math.log2(1 + lam)
    return L / (1 + L)


def gamma_of_lambda_mp(lam) -> mp.mpf:
    L = mp.log(1 + _to_mpf(lam)) / mp.log(2)
    return L / (1 + L)


# -- explicit enumeration ---------------------------------------------------


def count_independent_sets(g: BipartiteGraph) -> int:
    """|I(g)| from the even-class scan histogram (no materialization)."""
    hist, *_ = side_scan(g, "even")
    m = g.half_size
    total = 0
    ms = hist.shape[0] - 1
    for s in range(ms + 1):
        for a in range(ms + 1):
            for gg in range(hist.shape[2]):
                c = int(hist[s, a, gg])
                if c:
                    total += c << (m - gg)
    return total


def iter_independent_sets(
    g: BipartiteGraph, max_count: int | None = None
) -> Iterator[VertexSet]:
    """Deterministic walk of all independent sets.

    Order: even-class mask ascending (class positions), then odd-class mask
    ascending over the free odd vertices.  Every I appears exactly once.
    """
    m = g.half_size
    even_masks = [int(x) for x in g.class_masks("even")]
    yielded = 0
    for amask in range(1 << m):
        blocked = 0
        mm = amask
        while mm:
            low = mm & -mm
            blocked |= even_masks[low.bit_length() - 1]
            mm ^= low
        free = ~blocked & ((1 << m) - 1)
        # walk subsets of `free` in ascending mask order
        sub = 0
        while True:
            if max_count is not None and yielded >= max_count:
                raise CapExceededError(
                    f"independent-set walk exceeded cap {max_count}"
                )
            yield g.set_from_class_mask("even", amask).union(
                g.set_from_class_mask("odd", sub)
            )
            yielded += 1
            if sub == free:
                break
            sub = (sub - free) & free


def enumerate_independent_sets(
    g: BipartiteGraph,
    visitor: Callable[[VertexSet], None] | None = None,
    lam=Fraction(1),
    alpha_m=None,
    by_family: bool = False,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> EnumerationSummary:
    """Enumerate I(g): aggregate weights always; visit sets only on request.

    With a visitor, each independent set is materialized exactly once in a
    deterministic order and passed to it.  Without one, only the per-class
    scan histogram is touched.
    """
    if g.num_vertices > cap:
        raise CapExceededError(
            f"graph with N={g.num_vertices} exceeds enumeration cap {cap}"
        )
    if visitor is not None:
        for I in iter_independent_sets(g):
            visitor(I)
    if alpha_m is None:
        alpha_m = alpha_threshold_fraction(lam) * g.half_size
    regions, z = region_weights(HardCoreModel(g, lam), alpha_m)
    fams = family_weights(g, "even", lam) if by_family else None
    return EnumerationSummary(
        partition_function=z,
        region_weights=regions,
        family_weights=fams,
        count=count_independent_sets(g),
        mode="exact-rational" if isinstance(lam, (Fraction, int)) else "float64",
        lam=lam,
        alpha_m=alpha_m,
    )


# -- aggregate weights from the scan histogram ------------------------------


def partition_function(m: HardCoreModel, cap: int = DEFAULT_ENUMERATION_CAP):
    """Z_lambda, exact when lambda is rational."""
    g = m.graph
    if g.num_vertices > cap:
        raise CapExceededError(
            f"graph with N={g.num_vertices} exceeds enumeration cap {cap}"
        )
    hist, *_ = side_scan(g, "even")
    lam = m.lam
    exact = m.exact
    one_plus = (1 + as_fraction(lam)) if exact else (1.0 + float(lam))
    powers = _power_table(lam, g.half_size, exact)
    terms = []
    total = Fraction(0) if exact else 0.0
    mhalf = g.half_size
    for s in range(hist.shape[0]):
        for a in range(hist.shape[1]):
            for gg in range(hist.shape[2]):
                c = int(hist[s, a, gg])
                if not c:
                    continue
                t = c * powers[s] * one_plus ** (mhalf - gg)
                if exact:
                    total += t
                else:
                    terms.append(t)
    if exact:
        return total
    return math.fsum(terms)


def _power_table(lam, top: int, exact: bool):
    if exact:
        lamf = as_fraction(lam)
        out = [Fraction(1)]
        for _ in range(top):
            out.append(out[-1] * lamf)
        return out
    out = [1.0]
    for _ in range(top):
        out.append(out[-1] * float(lam))
    return out


def region_weights(m: HardCoreModel, alpha_m) -> tuple[dict, Fraction | float]:
    """All seven region weights plus Z, from the two per-class scans.

    Exact mode sums Fractions; float mode gathers terms and compensates
    with math.fsum.
    """
    g = m.graph
    exact = m.exact
    lam = as_fraction(m.lam) if exact else float(m.lam)
    if exact:
        alpha_m = as_fraction(alpha_m)
    mhalf = g.half_size
    powers = _power_table(lam, 2 * mhalf, exact)
    kmax_triv = floor_exact(alpha_m)  # k <= alpha_m  <=>  k <= floor
    kmin_nt = ceil_exact(alpha_m)  # k >= alpha_m  <=>  k >= ceil

    acc = {
        tag: (Fraction(0) if exact else [])
        for tag in (
            RegionTag.EVEN_MAJORITY,
            RegionTag.ODD_MAJORITY,
            RegionTag.BALANCED,
            RegionTag.TRIVIAL,
            RegionTag.NONTRIVIAL,
            RegionTag.NONTRIVIAL_SMALL_EVEN,
            RegionTag.NONTRIVIAL_SMALL_ODD,
        )
    }
    z_acc = Fraction(0) if exact else []

    def bump(tag, term):
        if exact:
            acc[tag] += term
        else:
            acc[tag].append(term)

    hist_e, *_ = side_scan(g, "even")
    for s in range(hist_e.shape[0]):
        for a in range(hist_e.shape[1]):
            for gg in range(hist_e.shape[2]):
                c = int(hist_e[s, a, gg])
                if not c:
                    continue
                free = mhalf - gg
                base = c * powers[s]
                small_e = 2 * a <= mhalf
                for k in range(free + 1):
                    term = base * math.comb(free, k) * powers[k]
                    if exact:
                        z_acc += term
                    else:
                        z_acc.append(term)
                    if s > k:
                        bump(RegionTag.EVEN_MAJORITY, term)
                    elif k > s:
                        bump(RegionTag.ODD_MAJORITY, term)
                    else:
                        bump(RegionTag.BALANCED, term)
                    if s <= alpha_m and k <= kmax_triv:
                        bump(RegionTag.TRIVIAL, term)
                    if s >= alpha_m and k >= kmin_nt:
                        bump(RegionTag.NONTRIVIAL, term)
                        if small_e:
                            bump(RegionTag.NONTRIVIAL_SMALL_EVEN, term)

    # small-on-odd needs |[I∩odd]|: mirror scan with roles swapped.
    hist_o, *_ = side_scan(g, "odd")
    for s in range(hist_o.shape[0]):  # s = |I∩odd|
        for a in range(hist_o.shape[1]):  # a = |[I∩odd]|
            for gg in range(hist_o.shape[2]):
                c = int(hist_o[s, a, gg])
                if not c or 2 * a > mhalf:
                    continue
                free = mhalf - gg
                base = c * powers[s]
                for k in range(free + 1):  # k = |I∩even|
                    if s >= alpha_m and k >= kmin_nt:
                        term = base * math.comb(free, k) * powers[k]
                        bump(RegionTag.NONTRIVIAL_SMALL_ODD, term)

    if exact:
        return dict(acc), z_acc
    return {tag: math.fsum(v) for tag, v in acc.items()}, math.fsum(z_acc)


def region_weight(m: HardCoreModel, tag: RegionTag, alpha_m) -> Fraction | float:
    """Total weight of one region (see :func:`region_weights`)."""
    weights, _ = region_weights(m, alpha_m)
    return weights[tag]


def family_weights(g: BipartiteGraph, side: str, lam) -> dict[tuple[int, int], object]:
    """w(A(a,gg)) = sum of lambda^|A| over A in the (|[A]|, |N(A)|) family."""
    exact = isinstance(lam, (Fraction, int))
    hist, *_ = side_scan(g, side)
    powers = _power_table(as_fraction(lam) if exact else float(lam), hist.shape[0], exact)
    out: dict[tuple[int, int], object] = {}
    for s in range(hist.shape[0]):
        for a in range(hist.shape[1]):
            for gg in range(hist.shape[2]):
                c = int(hist[s, a, gg])
                if not c:
                    continue
                key = (a, gg)
                out[key] = out.get(key, Fraction(0) if exact else 0.0) + c * powers[s]
    return out
