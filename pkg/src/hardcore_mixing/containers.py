"""Container-style approximation machinery for even-side set families.

A(a, g) is the family of even-class sets A with closure size |[A]| = a and
neighbourhood size |N(A)| = g; t = g - a measures the expansion excess.
Each member is compressed in two stages:

  1. a covering approximation F0 ⊆ N(A) with N(F0) ⊇ [A], produced by a
     greedy cover whose size obeys the covering lemma bound;
  2. the three-step degree algorithm refining F0 into a psi-approximation
     (F, S) with F ⊆ N(A) ⊆ "approximately F" and [A] ⊆ S, all vertices of
     S having >= d - psi neighbours in F and all of O∖F having >= d - psi
     neighbours in E∖S.

The reconstruction bound then caps the total weight of all A compatible
with one (F, S).  Every lemma-level inequality is exposed as an exact,
testable comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .errors import (
    CapExceededError,
    InvalidParameterError,
    IterationBudgetError,
    PreconditionError,
)
from .graphs import BipartiteGraph, VertexSet, closure, neighborhood
from .numerics import (
    as_fraction,
    binom_sum_leq,
    floor_exact,
    floor_log2_power,
    format_fraction,
)

DEFAULT_FAMILY_CAP = 16  # class-size cap for explicit family materialization


@dataclass(frozen=True)
class FamilyKey:
    """(a, g) with a = |[A]|, g = |N(A)|; t = g - a >= 0."""

    a: int
    g: int

    def __post_init__(self) -> None:
        if not 0 <= self.a <= self.g:
            raise InvalidParameterError(f"need 0 <= a <= g, got a={self.a}, g={self.g}")

    @property
    def t(self) -> int:
        return self.g - self.a


@dataclass(frozen=True)
class CoveringApprox:
    """F0 ⊆ N(A) with N(F0) ⊇ [A]."""

    f0: VertexSet


@dataclass(frozen=True)
class PsiApprox:
    f: VertexSet
    s: VertexSet
    psi: int


@dataclass(frozen=True)
class DegreeAlgorithmTrace:
    step1_vertices: tuple[int, ...]
    step2_vertices: tuple[int, ...]
    step3_vertices: tuple[int, ...]

    @property
    def iterations(self) -> tuple[int, int, int]:
        return (
            len(self.step1_vertices),
            len(self.step2_vertices),
            len(self.step3_vertices),
        )


# -- covering approximations -------------------------------------------------


def lovasz_stein_cover(
    P: VertexSet, Q: VertexSet, g: BipartiteGraph, p: int, q: int
) -> VertexSet:
    """Greedy cover of P by vertices of Q, within the (|Q|/p)(1+ln q) bound.

    Preconditions (checked, witness reported): every x in P has at least p
    neighbours in Q; every y in Q has at most q neighbours in P.
    """
    if p < 1 or q < 1:
        raise InvalidParameterError("need p >= 1 and q >= 1")
    for x in P:
        if (g.neighbor_bits(x) & Q.bits).bit_count() < p:
            raise PreconditionError(
                f"vertex {x} of P has fewer than p={p} neighbours in Q"
            )
    for y in Q:
        if (g.neighbor_bits(y) & P.bits).bit_count() > q:
            raise PreconditionError(
                f"vertex {y} of Q has more than q={q} neighbours in P"
            )
    uncovered = P.bits
    chosen = 0
    while uncovered:
        best_y = -1
        best_gain = 0
        for y in Q:
            gain = (g.neighbor_bits(y) & uncovered).bit_count()
            if gain > best_gain:  # ties resolve to the smallest id
                best_gain = gain
                best_y = y
        if best_y < 0:
            raise PreconditionError("P is not coverable from Q")
        chosen |= 1 << best_y
        uncovered &= ~g.neighbor_bits(best_y)
    cover = VertexSet(chosen, g.num_vertices)
    bound = (len(Q) / p) * (1 + math.log(q))
    if len(cover) > bound + 1e-9:
        raise InvalidParameterError(
            f"greedy cover size {len(cover)} exceeded ({len(Q)}/p)(1+ln q) = {bound}"
        )
    return cover


def covering_approximation(g: BipartiteGraph, A: VertexSet) -> CoveringApprox:
    """Covering approximation of A ⊆ even class via the greedy cover on the
    subgraph induced by [A] ∪ N(A), with P = [A], Q = N(A), p = q = d.

    For d >= 2 the output also satisfies |F0| <= 2 g log2(d) / d, checked
    exactly via 2^(|F0| d) <= d^(2g).
    """
    if not A:
        raise InvalidParameterError("covering approximation needs a nonempty set")
    ca = closure(g, A)
    na = neighborhood(g, A)
    f0 = lovasz_stein_cover(ca, na, g, g.degree, g.degree)
    d = g.degree
    gg = len(na)
    if d >= 2 and (1 << (len(f0) * d)) > d ** (2 * gg):
        raise InvalidParameterError(
            f"cover size {len(f0)} exceeds 2 g log2(d)/d with g={gg}, d={d}"
        )
    return CoveringApprox(f0=f0)


# -- the degree algorithm ------------------------------------------------------


def _deg(g: BipartiteGraph, v: int, S: int) -> int:
    return (g.neighbor_bits(v) & S).bit_count()


def degree_algorithm(
    g: BipartiteGraph,
    f0: CoveringApprox,
    A: VertexSet,
    psi: int,
    one_step_variant: bool = False,
) -> tuple[PsiApprox, DegreeAlgorithmTrace]:
    """The three-step refinement of a covering approximation.

    Step 1 greedily adds N(u) to F while some u in [A] has more than d/2
    neighbours outside F (threshold psi instead of d/2 under
    one_step_variant), then S1 = {u even : deg_F(u) >= d - d/2}.
    Step 2 deletes N(v) from S1 while some v in O∖N(A) has more than psi
    neighbours in S1, then F2 = {v odd : deg_S2(v) > psi}.
    Step 3 adds N(w) to F2 while some w in [A] has more than psi neighbours
    of N(A) outside F2; finally S = S2 ∩ {w : deg_F(w) >= d - psi}.

    All fractional thresholds compare exactly (2 deg > d, never float).
    Ties pick the smallest vertex id.  Under one_step_variant, Step 3 is
    skipped and the output is assembled after Step 2.
    """
    d = g.degree
    if psi < 1 or 2 * psi > d:
        raise InvalidParameterError(f"need 1 <= psi <= d/2, got psi={psi}, d={d}")
    side = g.side_of(A)
    if side != "even":
        raise InvalidParameterError("the degree algorithm runs on even-class sets")
    ca = closure(g, A)
    G = neighborhood(g, A)
    if not f0.f0.issubset(G):
        raise PreconditionError("F0 is not contained in N(A)")
    if not ca.issubset(neighborhood(g, f0.f0)):
        raise PreconditionError("N(F0) does not cover [A]")

    budget = g.num_vertices + 1
    step1_threshold = psi if one_step_variant else None  # None: d/2

    f = f0.f0.bits
    step1 = []
    while True:
        pick = -1
        for u in ca:
            out_deg = (g.neighbor_bits(u) & G.bits & ~f).bit_count()
            over = (2 * out_deg > d) if step1_threshold is None else (out_deg > psi)
            if over:
                pick = u
                break
        if pick < 0:
            break
        f |= g.neighbor_bits(pick)  # N(u) ⊆ G since u ∈ [A]
        step1.append(pick)
        if len(step1) > budget:
            raise IterationBudgetError("step 1 exceeded its iteration budget")
    f1 = f
    if step1_threshold is None:
        # d_F1(u) >= d - d/2  <=>  2 deg >= d
        s1 = _select(g, g.even_class, lambda u: 2 * _deg(g, u, f1) >= d)
    else:
        s1 = _select(g, g.even_class, lambda u: _deg(g, u, f1) >= d - psi)

    step2 = []
    s = s1
    not_g = ~G.bits
    while True:
        pick = -1
        for v in g.odd_class:
            if (1 << v) & not_g and _deg(g, v, s) > psi:
                pick = v
                break
        if pick < 0:
            break
        s &= ~g.neighbor_bits(pick)
        step2.append(pick)
        if len(step2) > budget:
            raise IterationBudgetError("step 2 exceeded its iteration budget")
    s2 = s
    f2 = _select(g, g.odd_class, lambda v: _deg(g, v, s2) > psi)

    if one_step_variant:
        # Output (F1, S2): containment and the S-degree condition hold
        # (members of [A] keep >= d - psi neighbours in F1 by the Step-1
        # threshold), and odd vertices outside N(A) are controlled by
        # Step 2.  Vertices of N(A)\F1 may still violate the outside-degree
        # condition: the two-step shortcut is not a full approximation on
        # every subject, which is what makes Step 3 load-bearing.
        return (
            PsiApprox(
                f=VertexSet(f1, g.num_vertices),
                s=VertexSet(s2, g.num_vertices),
                psi=psi,
            ),
            DegreeAlgorithmTrace(tuple(step1), tuple(step2), ()),
        )

    step3 = []
    while True:
        pick = -1
        for w in ca:
            if (g.neighbor_bits(w) & G.bits & ~f2).bit_count() > psi:
                pick = w
                break
        if pick < 0:
            break
        f2 |= g.neighbor_bits(pick)
        step3.append(pick)
        if len(step3) > budget:
            raise IterationBudgetError("step 3 exceeded its iteration budget")
    f_final = f2
    s_final = s2 & _select(g, g.even_class, lambda w: _deg(g, w, f_final) >= d - psi)
    return (
        PsiApprox(
            f=VertexSet(f_final, g.num_vertices),
            s=VertexSet(s_final, g.num_vertices),
            psi=psi,
        ),
        DegreeAlgorithmTrace(tuple(step1), tuple(step2), tuple(step3)),
    )


def _select(g: BipartiteGraph, vertices, pred) -> int:
    bits = 0
    for v in vertices:
        if pred(v):
            bits |= 1 << v
    return bits


@dataclass(frozen=True)
class PsiApproxReport:
    f_in_neighborhood: bool
    s_covers_closure: bool
    s_degrees_ok: bool
    outside_degrees_ok: bool
    size_bound_ok: bool
    witnesses: dict

    @property
    def all_ok(self) -> bool:
        return (
            self.f_in_neighborhood
            and self.s_covers_closure
            and self.s_degrees_ok
            and self.outside_degrees_ok
            and self.size_bound_ok
        )


def verify_psi_approximation(
    g: BipartiteGraph, pa: PsiApprox, A: VertexSet
) -> PsiApproxReport:
    """Check the three psi-approximation conditions plus the size bound
    |S| <= |F| + 2 t psi / (d - psi) against the subject A.

    Never raises: every failure is reported with a witness vertex.
    """
    d = g.degree
    psi = pa.psi
    ca = closure(g, A)
    G = neighborhood(g, A)
    witnesses: dict = {}

    ok_f = pa.f.issubset(G)
    if not ok_f:
        witnesses["f_outside"] = next(iter(pa.f.difference(G)))
    ok_s = ca.issubset(pa.s)
    if not ok_s:
        witnesses["closure_not_in_s"] = next(iter(ca.difference(pa.s)))

    ok_sdeg = True
    for u in pa.s:
        if _deg(g, u, pa.f.bits) < d - psi:
            ok_sdeg = False
            witnesses["s_degree"] = u
            break

    ok_out = True
    es_complement = g.even_set().bits & ~pa.s.bits
    for v in g.odd_class:
        if v not in pa.f and _deg(g, v, es_complement) < d - psi:
            ok_out = False
            witnesses["outside_degree"] = v
            break

    t = len(G) - len(ca)
    # |S| <= |F| + 2 t psi/(d-psi)  <=>  (|S|-|F|)(d-psi) <= 2 t psi
    ok_size = (len(pa.s) - len(pa.f)) * (d - psi) <= 2 * t * psi
    if not ok_size:
        witnesses["size_bound"] = (len(pa.s), len(pa.f), t)

    return PsiApproxReport(ok_f, ok_s, ok_sdeg, ok_out, ok_size, witnesses)


# -- families -----------------------------------------------------------------


def enumerate_family(
    g: BipartiteGraph,
    key: FamilyKey,
    dedupe_by_closure: bool = False,
    cap: int = DEFAULT_FAMILY_CAP,
) -> list[VertexSet] | list[tuple[VertexSet, int]]:
    """All A ⊆ even class with |[A]| = key.a and |N(A)| = key.g.

    With dedupe_by_closure, returns ([A], multiplicity) pairs instead (A
    determines N(A); N(A) determines only [A]).  The empty key (0, 0)
    yields the empty set by convention.
    """
    m = g.half_size
    if m > cap:
        raise CapExceededError(f"class size {m} exceeds family-enumeration cap {cap}")
    out = []
    for mask in range(1 << m):
        A = g.set_from_class_mask("even", mask)
        if len(neighborhood(g, A)) != key.g:
            continue
        ca = closure(g, A)
        if len(ca) != key.a:
            continue
        out.append((A, ca))
    if not dedupe_by_closure:
        return [A for A, _ in out]
    by_closure: dict[int, tuple[VertexSet, int]] = {}
    for _, ca in out:
        prev = by_closure.get(ca.bits)
        by_closure[ca.bits] = (ca, (prev[1] + 1) if prev else 1)
    return list(by_closure.values())


def family_weight(fam, lam):
    """sum of lambda^|A| over the family members."""
    exact = isinstance(lam, (Fraction, int))
    lamv = as_fraction(lam) if exact else float(lam)
    total = Fraction(0) if exact else 0.0
    for A in fam:
        total += lamv ** len(A)
    return total


# -- counting and reconstruction bounds ----------------------------------------


def claim2_output_count_bound(g_: int, t: int, d: int, psi: int):
    """Exact upper bound on the number of distinct degree-algorithm outputs
    for a fixed covering approximation:

        C(n1, <= 2g/d) * C(n2, <= 2t/psi) * C(n3, <= td/((d-psi) psi))

    with ground-set sizes n1 = n3 = floor(2 g log2 d) and
    n2 = floor(2 d^3 g log2 d); upper indices floor as integer parts.
    Ground sets have integer sizes bounded by the stated real expressions,
    so flooring both positions keeps the bound valid (and slightly tighter).
    """
    if g_ < 0 or t < 0 or d < 2 or psi < 1 or 2 * psi > d:
        raise InvalidParameterError("need g,t >= 0, d >= 2, 1 <= psi <= d/2")
    n1 = floor_log2_power(d, 2 * g_)
    n2 = floor_log2_power(d, 2 * d**3 * g_)
    k1 = floor_exact(Fraction(2 * g_, d))
    k2 = floor_exact(Fraction(2 * t, psi))
    k3 = floor_exact(Fraction(t * d, (d - psi) * psi))
    return binom_sum_leq(n1, k1) * binom_sum_leq(n2, k2) * binom_sum_leq(n1, k3)


def two_step_output_count_bound(g_: int, t: int, d: int, psi: int):
    """The weaker counting bound of the two-step shortcut:

        C(n1, <= g/psi) * C(n2, <= td/((d-psi) psi))

    (Step 1 now shrinks N(A)∖F by only psi per iteration.)  Used purely for
    empirical comparison against :func:`claim2_output_count_bound`.
    """
    if g_ < 0 or t < 0 or d < 2 or psi < 1 or 2 * psi > d:
        raise InvalidParameterError("need g,t >= 0, d >= 2, 1 <= psi <= d/2")
    n1 = floor_log2_power(d, 2 * g_)
    n2 = floor_log2_power(d, 2 * d**3 * g_)
    k1 = floor_exact(Fraction(g_, psi))
    k2 = floor_exact(Fraction(t * d, (d - psi) * psi))
    return binom_sum_leq(n1, k1) * binom_sum_leq(n2, k2)


def gamma_domain(d: int, psi: int) -> tuple[Fraction, Fraction]:
    """Admissible gamma interval (-2 psi/(d-psi), 1] for the reconstruction."""
    return (Fraction(-2 * psi, d - psi), Fraction(1))


def s_is_small(s_size: int, g_: int, t: int, gamma) -> bool:
    """The reconstruction dichotomy: S is small iff |S| < g - gamma t."""
    gam = as_fraction(gamma) if isinstance(gamma, (Fraction, int)) else gamma
    return s_size < g_ - gam * t


def reconstruction_weight_bound(
    key: FamilyKey, d: int, psi: int, gamma, lam
) -> float:
    """max{ (1+lam)^(g - gamma t),  C(3dg, <= 2 t psi/(d-psi) + gamma t) (1+lam)^(g-t) }.

    Float rendering; use :func:`reconstruction_bound_holds` for the exact
    rational comparison against a family weight.
    """
    _check_reconstruction_domain(d, psi, gamma)
    g_, t = key.g, key.t
    with mp.workprec(80):
        lamv = mp.mpf(float(lam)) if not isinstance(lam, (Fraction, int)) else (
            mp.mpf(as_fraction(lam).numerator) / as_fraction(lam).denominator
        )
        gam = mp.mpf(float(gamma)) if not isinstance(gamma, (Fraction, int)) else (
            mp.mpf(as_fraction(gamma).numerator) / as_fraction(gamma).denominator
        )
        branch1 = (1 + lamv) ** (g_ - gam * t)
        idx = _reconstruction_index(key, d, psi, gamma)
        branch2 = binom_sum_leq(3 * d * g_, idx) * (1 + lamv) ** (g_ - t)
        return float(max(branch1, branch2))


def _check_reconstruction_domain(d: int, psi: int, gamma) -> None:
    if not 1 <= psi <= d / 2:
        raise InvalidParameterError(f"need 1 <= psi <= d/2, got psi={psi}, d={d}")
    lo, hi = gamma_domain(d, psi)
    gam = as_fraction(gamma) if isinstance(gamma, (Fraction, int)) else Fraction(float(gamma)).limit_denominator(10**12)
    if not lo < gam <= hi:
        raise InvalidParameterError(
            f"gamma={gamma} outside ({format_fraction(lo)}, 1]"
        )


def _reconstruction_index(key: FamilyKey, d: int, psi: int, gamma) -> int:
    gam = as_fraction(gamma)
    return floor_exact(Fraction(2 * key.t * psi, d - psi) + gam * key.t)


def reconstruction_bound_holds(
    weight: Fraction, key: FamilyKey, d: int, psi: int, gamma: Fraction, lam: Fraction
) -> bool:
    """Exact decision of weight <= reconstruction bound for rational gamma
    and lambda: weight <= max(b1, b2) iff it is <= one of them, and
    weight <= (1+lam)^(g - gamma t) is decided by raising both sides to
    gamma's denominator so every exponent is an integer."""
    _check_reconstruction_domain(d, psi, gamma)
    weight = as_fraction(weight)
    lam = as_fraction(lam)
    gamma = as_fraction(gamma)
    g_, t = key.g, key.t
    base = 1 + lam
    q = gamma.denominator
    p = gamma.numerator
    # branch 1: weight^q <= (1+lam)^(g q - p t)
    b1 = weight**q <= base ** (g_ * q - p * t)
    idx = _reconstruction_index(key, d, psi, gamma)
    b2 = weight <= binom_sum_leq(3 * d * g_, idx) * base ** (g_ - t)
    return b1 or b2


def reconstruction_compatible(
    g: BipartiteGraph, pa: PsiApprox, fam: list[VertexSet]
) -> list[VertexSet]:
    """Members A of the family with F ⊆ N(A) and S ⊇ [A]."""
    out = []
    for A in fam:
        if pa.f.issubset(neighborhood(g, A)) and closure(g, A).issubset(pa.s):
            out.append(A)
    return out


def reconstruction_candidates(
    g: BipartiteGraph, pa: PsiApprox, key: FamilyKey, gamma
) -> tuple[str, list[VertexSet]]:
    """Generate the candidate supersets of the reconstruction procedure.

    Small S: every compatible A is a subset of S (A ⊆ [A] ⊆ S).
    Large S: choose G∖F as a subset of N(S)∖F of size < 2tpsi/(d-psi)+gamma t,
    recover [A] from G, then A ⊆ [A].  Returns (branch, candidates) where
    candidates is a superset of all compatible A of the family.
    """
    d = g.degree
    psi = pa.psi
    branch = "small" if s_is_small(len(pa.s), key.g, key.t, gamma) else "large"
    cands: list[VertexSet] = []
    if branch == "small":
        ids = pa.s.ids()
        for mask in range(1 << len(ids)):
            bits = 0
            mm = mask
            while mm:
                low = mm & -mm
                bits |= 1 << ids[low.bit_length() - 1]
                mm ^= low
            cands.append(VertexSet(bits, g.num_vertices))
        return branch, cands
    # |G \ F| <= 2 t psi/(d-psi) + gamma t exactly (the set has integer
    # size, so the floor matches the weight bound's binomial index)
    limit = floor_exact(Fraction(2 * key.t * psi, d - psi) + as_fraction(gamma) * key.t)
    pool = neighborhood(g, pa.s).difference(pa.f).ids()
    for mask in range(1 << len(pool)):
        if mask.bit_count() > limit:
            continue
        extra = 0
        mm = mask
        while mm:
            low = mm & -mm
            extra |= 1 << pool[low.bit_length() - 1]
            mm ^= low
        g_bits = VertexSet(pa.f.bits | extra, g.num_vertices)
        # [A] is determined by G = N(A): the closure of any A with that
        # neighbourhood is {x even : N(x) ⊆ G}.
        ca_bits = 0
        for x in g.even_class:
            if g.neighbor_bits(x) & ~g_bits.bits == 0:
                ca_bits |= 1 << x
        ids = VertexSet(ca_bits, g.num_vertices).ids()
        for amask in range(1 << len(ids)):
            bits = 0
            mm = amask
            while mm:
                low = mm & -mm
                bits |= 1 << ids[low.bit_length() - 1]
                mm ^= low
            cands.append(VertexSet(bits, g.num_vertices))
    return branch, cands


# -- parameter choices and family-weight bound ---------------------------------


def psi_gamma_theorem_choice(lam, d: int, delta) -> tuple[int, float]:
    """The canonical (psi, gamma): psi = round(sqrt(d)) clamped into
    [1, floor(d/2)], gamma per the closed form with real sqrt(d).

    Requires d >= 4 (so sqrt(d) <= d/2) and delta in (0, 1)."""
    if d < 4:
        raise InvalidParameterError("need d >= 4")
    if not 0 < float(delta) < 1:
        raise InvalidParameterError("need delta in (0, 1)")
    if float(lam) <= 0:
        raise InvalidParameterError("need lambda > 0")
    psi = int(math.floor(math.sqrt(d) + 0.5))
    psi = max(1, min(psi, d // 2))
    rd = math.sqrt(d)
    L = math.log2(1 + float(lam))
    big = math.log2(d**5 / float(delta))
    gamma = (L - (rd / (d - rd)) * big) / (L + big)
    if not gamma > -rd / (d - rd):
        raise InvalidParameterError(
            "gamma fell outside its guaranteed range; parameter domain violated"
        )
    return psi, gamma


@dataclass(frozen=True)
class FamilyBoundReport:
    key: FamilyKey
    weight: object
    log2_weight: float | None
    log2_bound: float | None
    c: float | None
    passed: bool | None
    c_max: float | None  # fit mode: largest c for which the bound holds


def theorem2_bound_check(
    g: BipartiteGraph,
    key: FamilyKey,
    lam,
    c: float | None = None,
    delta=None,
    cap: int = DEFAULT_FAMILY_CAP,
) -> FamilyBoundReport:
    """Compare the exhaustive family weight with (1+lam)^g 2^(-c t beta).

    With c given, reports pass/fail at that c; with c=None (fit mode),
    reports the largest c for which the bound holds on this instance
    (+inf when t = 0 or the family is empty).
    """
    from .graphs import bipartite_expansion_constant
    from .hardcore import beta as beta_fn

    if delta is None:
        delta = bipartite_expansion_constant(g)
        if delta is None:
            raise InvalidParameterError(
                "graph has no nonempty small sets; supply delta explicitly"
            )
    fam = enumerate_family(g, key, cap=cap)
    w = family_weight(fam, lam)
    if w == 0:
        return FamilyBoundReport(key, w, None, None, c, True if c is not None else None, float("inf"))
    b = beta_fn(float(lam), g.degree, float(delta))
    log2_w = float(mp.log(mp.mpf(w.numerator)) / mp.log(2) - mp.log(mp.mpf(w.denominator)) / mp.log(2)) if isinstance(w, Fraction) else math.log2(w)
    log2_cap = key.g * math.log2(1 + float(lam))
    if key.t == 0:
        c_max = float("inf")
    else:
        c_max = (log2_cap - log2_w) / (key.t * b)
    if c is None:
        return FamilyBoundReport(key, w, log2_w, None, None, None, c_max)
    log2_bound = log2_cap - c * key.t * b
    return FamilyBoundReport(
        key, w, log2_w, log2_bound, c, log2_w <= log2_bound + 1e-12, c_max
    )
