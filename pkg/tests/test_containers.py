"""Covering approximations, the degree algorithm, counting and
reconstruction bounds."""

import math
from fractions import Fraction

import pytest

from hardcore_mixing.errors import (
    CapExceededError,
    InvalidParameterError,
    PreconditionError,
)
from hardcore_mixing.graphs import (
    VertexSet,
    build_even_torus,
    build_hypercube,
    closure,
    import_graph_text,
    neighborhood,
)
from hardcore_mixing.containers import (
    CoveringApprox,
    FamilyKey,
    claim2_output_count_bound,
    covering_approximation,
    degree_algorithm,
    enumerate_family,
    family_weight,
    gamma_domain,
    lovasz_stein_cover,
    psi_gamma_theorem_choice,
    reconstruction_bound_holds,
    reconstruction_candidates,
    reconstruction_compatible,
    reconstruction_weight_bound,
    s_is_small,
    theorem2_bound_check,
    verify_psi_approximation,
)

MATCHING_3 = "bipartite 1 6\n3\n4\n5\n"
K33 = "bipartite 3 6\n3 4 5\n3 4 5\n3 4 5\n"


def vs(g, ids):
    return VertexSet.from_ids(ids, g.num_vertices)


def all_even_subsets(g, nonempty=True):
    start = 1 if nonempty else 0
    for mask in range(start, 1 << g.half_size):
        yield g.set_from_class_mask("even", mask)


class TestLovaszStein:
    def test_single_vertex(self):
        g = build_hypercube(3)
        v = g.even_class[0]
        p = vs(g, [v])
        q = neighborhood(g, p)
        cover = lovasz_stein_cover(p, q, g, 3, 3)
        assert len(cover) == 1

    def test_complete_bipartite_single_cover(self):
        g = import_graph_text(K33)
        p = g.even_set()
        q = g.odd_set()
        cover = lovasz_stein_cover(p, q, g, 3, 3)
        assert len(cover) == 1
        assert 1 <= (len(q) / 3) * (1 + math.log(3))

    def test_q3_closure_cover_within_bound(self):
        g = build_hypercube(3)
        a = vs(g, [g.even_class[0]])
        cover = lovasz_stein_cover(closure(g, a), neighborhood(g, a), g, 3, 3)
        assert len(cover) == 1
        assert len(cover) <= (3 / 3) * (1 + math.log(3))

    def test_precondition_witness(self):
        g = build_hypercube(3)
        v = g.even_class[0]
        p = vs(g, [v])
        q = vs(g, [g.neighbors(v)[0]])  # only one neighbour available
        with pytest.raises(PreconditionError) as err:
            lovasz_stein_cover(p, q, g, 3, 3)
        assert str(v) in str(err.value)


class TestCoveringApproximation:
    def test_q3_singleton(self):
        g = build_hypercube(3)
        a = vs(g, [g.even_class[0]])
        f0 = covering_approximation(g, a)
        assert len(f0.f0) == 1
        assert f0.f0.issubset(neighborhood(g, a))
        assert closure(g, a).issubset(neighborhood(g, f0.f0))

    def test_q4_singleton_within_bound(self):
        g = build_hypercube(4)
        a = vs(g, [g.even_class[0]])
        f0 = covering_approximation(g, a)
        assert len(f0.f0) == 1 <= 2 * 4 * 2 / 4

    def test_matching_takes_whole_neighborhood(self):
        g = import_graph_text(MATCHING_3)
        a = vs(g, [0, 1])
        f0 = covering_approximation(g, a)
        assert f0.f0.bits == neighborhood(g, a).bits

    def test_empty_rejected(self):
        g = build_hypercube(3)
        with pytest.raises(InvalidParameterError):
            covering_approximation(g, VertexSet.empty(8))

    @pytest.mark.parametrize(
        "graph",
        [build_hypercube(3), build_hypercube(4), build_even_torus(4, 2)],
        ids=["q3", "q4", "t42"],
    )
    def test_size_bound_exhaustive(self, graph):
        """Exact form of the covering size bound: 2^(|F0| d) <= d^(2g)."""
        g = graph
        d = g.degree
        for a in all_even_subsets(g):
            f0 = covering_approximation(g, a)
            gg = len(neighborhood(g, a))
            assert (1 << (len(f0.f0) * d)) <= d ** (2 * gg)


class TestDegreeAlgorithm:
    def test_q3_hand_trace(self):
        """Singleton subject with the full neighbourhood as cover: step 2
        strips the three distance-2 even vertices through the antipodal odd
        vertex, step 3 regrows F."""
        g = build_hypercube(3)
        v = g.even_class[0]
        a = vs(g, [v])
        f0 = CoveringApprox(f0=neighborhood(g, a))
        pa, trace = degree_algorithm(g, f0, a, psi=1)
        assert pa.f.bits == neighborhood(g, a).bits
        assert pa.s.ids() == (v,)
        assert trace.iterations == (0, 1, 1)
        antipode = v ^ 0b111
        assert trace.step2_vertices == (antipode,)
        rep = verify_psi_approximation(g, pa, a)
        assert rep.all_ok

    def test_full_class_vacuous_loops(self):
        g = build_hypercube(4)
        a = g.even_set()
        f0 = CoveringApprox(f0=g.odd_set())
        pa, trace = degree_algorithm(g, f0, a, psi=2)
        assert trace.iterations == (0, 0, 0)
        assert pa.f.bits == g.odd_set().bits
        assert closure(g, a).issubset(pa.s)

    def test_psi_domain(self):
        g = build_hypercube(3)
        a = vs(g, [g.even_class[0]])
        f0 = covering_approximation(g, a)
        with pytest.raises(InvalidParameterError):
            degree_algorithm(g, f0, a, psi=2)  # 2 > 3/2
        with pytest.raises(InvalidParameterError):
            degree_algorithm(g, f0, a, psi=0)

    def test_bad_cover_rejected(self):
        g = build_hypercube(3)
        a = vs(g, [g.even_class[0]])
        with pytest.raises(PreconditionError):
            degree_algorithm(g, CoveringApprox(f0=VertexSet.empty(8)), a, psi=1)

    def test_q4_small_subjects_exhaustive(self):
        g = build_hypercube(4)
        for a in all_even_subsets(g):
            if len(a) > 3:
                continue
            for psi in (1, 2):
                f0 = covering_approximation(g, a)
                pa, _ = degree_algorithm(g, f0, a, psi)
                assert verify_psi_approximation(g, pa, a).all_ok

    @pytest.mark.parametrize(
        "graph",
        [build_hypercube(2), build_hypercube(3), build_hypercube(4), build_even_torus(4, 2)],
        ids=["q2", "q3", "q4", "t42"],
    )
    def test_output_valid_and_caps_respected_exhaustively(self, graph):
        """Every nonempty subject, every admissible psi: the output is a
        psi-approximation, per-step iteration counts respect the claimed
        caps (exact rational comparisons), and step-2 sources stay within
        the fourth neighbourhood of the cover."""
        g = graph
        d = g.degree
        for a in all_even_subsets(g):
            f0 = covering_approximation(g, a)
            gg = len(neighborhood(g, a))
            t = gg - len(closure(g, a))
            fourth = f0.f0
            for _ in range(4):
                fourth = neighborhood(g, fourth, allow_mixed=True)
            for psi in range(1, d // 2 + 1):
                pa, trace = degree_algorithm(g, f0, a, psi)
                assert verify_psi_approximation(g, pa, a).all_ok
                i1, i2, i3 = trace.iterations
                assert i1 * d <= 2 * gg
                assert i2 * psi <= 2 * t
                assert i3 * (d - psi) * psi <= t * d
                for v in trace.step2_vertices:
                    assert v in fourth

    def test_one_step_variant_partial_guarantees(self):
        """The two-step shortcut keeps containment and S-degrees but loses
        the outside-degree condition on some subjects (ruling out the
        shortcut as a drop-in: Step 3 is what completes the approximation).
        """
        g = build_hypercube(4)
        any_outside_failure = False
        for a in all_even_subsets(g):
            for psi in (1, 2):
                f0 = covering_approximation(g, a)
                pa, trace = degree_algorithm(g, f0, a, psi, one_step_variant=True)
                assert trace.step3_vertices == ()
                rep = verify_psi_approximation(g, pa, a)
                assert rep.f_in_neighborhood
                assert rep.s_covers_closure
                assert rep.s_degrees_ok
                if not rep.outside_degrees_ok:
                    any_outside_failure = True
                    # failures can only sit inside N(A) \ F
                    w = rep.witnesses["outside_degree"]
                    assert w in neighborhood(g, a)
        assert any_outside_failure

    def test_two_step_bound_weaker_than_three_step(self):
        from hardcore_mixing.containers import two_step_output_count_bound

        for g_, t, d, psi in [(3, 2, 3, 1), (4, 2, 4, 2), (8, 4, 4, 1), (6, 3, 6, 2)]:
            assert claim2_output_count_bound(g_, t, d, psi) <= two_step_output_count_bound(
                g_, t, d, psi
            )


class TestVerification:
    def test_exact_approximation_passes(self):
        g = build_hypercube(3)
        a = vs(g, [g.even_class[0], g.even_class[1]])
        from hardcore_mixing.containers import PsiApprox

        pa = PsiApprox(f=neighborhood(g, a), s=closure(g, a), psi=1)
        assert verify_psi_approximation(g, pa, a).all_ok

    def test_corruption_detected_with_witness(self):
        g = build_hypercube(4)
        v = g.even_class[0]
        a = vs(g, [v])
        f0 = CoveringApprox(f0=neighborhood(g, a))
        pa, _ = degree_algorithm(g, f0, a, psi=1)
        far_even = v ^ 0b0011  # distance 2: only 2 < d - psi neighbours in F
        from hardcore_mixing.containers import PsiApprox

        bad = PsiApprox(f=pa.f, s=pa.s.add(far_even), psi=1)
        rep = verify_psi_approximation(g, bad, a)
        assert not rep.s_degrees_ok
        assert rep.witnesses["s_degree"] == far_even


class TestFamilies:
    def test_q3_singleton_family(self):
        g = build_hypercube(3)
        fam = enumerate_family(g, FamilyKey(1, 3))
        assert sorted(tuple(a) for a in fam) == sorted((v,) for v in g.even_class)

    def test_q3_full_class_family(self):
        g = build_hypercube(3)
        fam = enumerate_family(g, FamilyKey(4, 4))
        assert any(a.bits == g.even_set().bits for a in fam)
        assert len(fam) == 11  # subsets of >= 2 even vertices dominate all odds

    def test_empty_key_convention(self):
        g = build_hypercube(3)
        fam = enumerate_family(g, FamilyKey(0, 0))
        assert len(fam) == 1 and len(fam[0]) == 0

    def test_dedupe_multiplicities(self):
        g = build_hypercube(3)
        fam = enumerate_family(g, FamilyKey(4, 4), dedupe_by_closure=True)
        assert len(fam) == 1
        (ca, mult) = fam[0]
        assert ca.bits == g.even_set().bits
        assert mult == 11

    def test_family_cap(self):
        g = build_hypercube(3)
        with pytest.raises(CapExceededError):
            enumerate_family(g, FamilyKey(1, 3), cap=2)

    def test_family_weight_values(self):
        g = build_hypercube(3)
        fam = enumerate_family(g, FamilyKey(1, 3))
        assert family_weight(fam, Fraction(1)) == 4
        assert family_weight(fam, Fraction(1, 2)) == 2
        assert family_weight([], Fraction(1)) == 0

    def test_key_validation(self):
        with pytest.raises(InvalidParameterError):
            FamilyKey(3, 2)


class TestCountBound:
    def test_t_zero_reduces_to_first_factor(self):
        from hardcore_mixing.numerics import binom_sum_leq, floor_log2_power

        g_, d = 4, 4
        n1 = floor_log2_power(d, 2 * g_)
        expected = binom_sum_leq(n1, (2 * g_) // d)
        assert claim2_output_count_bound(g_, 0, d, 2) == expected

    def test_frozen_value(self):
        # 46 * sum_{i<=4} C(256, i) * 130, all factors exact
        assert claim2_output_count_bound(3, 2, 3, 1) == 1_061_982_560_860

    def test_monotone_in_t_and_g(self):
        base = claim2_output_count_bound(4, 1, 4, 2)
        assert claim2_output_count_bound(4, 2, 4, 2) >= base
        assert claim2_output_count_bound(5, 1, 4, 2) >= base

    def test_distinct_outputs_within_bound_q3(self):
        """Fixed cover per closure class: distinct (F, S) outputs over all
        compatible family members never exceed the counting bound."""
        g = build_hypercube(3)
        d = g.degree
        for a_sz, gg in ((1, 3), (4, 4)):
            key = FamilyKey(a_sz, gg)
            fam = enumerate_family(g, key)
            closures = {closure(g, a).bits for a in fam}
            for cb in closures:
                ca = VertexSet(cb, g.num_vertices)
                f0 = covering_approximation(g, ca)
                outputs = set()
                for a in fam:
                    if f0.f0.issubset(neighborhood(g, a)) and closure(g, a).issubset(
                        neighborhood(g, f0.f0)
                    ):
                        pa, _ = degree_algorithm(g, f0, a, psi=1)
                        outputs.add((pa.f.bits, pa.s.bits))
                assert len(outputs) <= claim2_output_count_bound(gg, key.t, d, 1)


class TestReconstruction:
    def test_t_zero_branches_coincide(self):
        key = FamilyKey(3, 3)
        for gamma in (Fraction(-1, 4), Fraction(1, 2), Fraction(1)):
            b = reconstruction_weight_bound(key, 4, 2, gamma, 1.0)
            assert b == pytest.approx(2.0**3, rel=1e-12)

    def test_direct_two_branch_evaluation(self):
        key = FamilyKey(3, 4)  # t = 1
        d, psi, gamma, lam = 4, 2, Fraction(1, 2), 1.0
        b1 = 2.0 ** (4 - 0.5)
        idx = math.floor(2 * 1 * 2 / (4 - 2) + 0.5 * 1)  # = 2
        b2 = sum(math.comb(3 * 4 * 4, i) for i in range(idx + 1)) * 2.0 ** (4 - 1)
        assert reconstruction_weight_bound(key, d, psi, gamma, lam) == pytest.approx(
            max(b1, b2), rel=1e-12
        )

    def test_gamma_domain(self):
        assert gamma_domain(4, 2) == (Fraction(-2), Fraction(1))
        with pytest.raises(InvalidParameterError):
            reconstruction_weight_bound(FamilyKey(2, 3), 4, 2, Fraction(-3), 1.0)
        with pytest.raises(InvalidParameterError):
            reconstruction_weight_bound(FamilyKey(2, 3), 4, 2, Fraction(3, 2), 1.0)

    def test_exact_comparator_matches_float(self):
        key = FamilyKey(2, 4)
        for gamma in (Fraction(-1, 4), Fraction(0), Fraction(1, 2), Fraction(1)):
            for lam in (Fraction(1, 2), Fraction(1), Fraction(2)):
                bound = reconstruction_weight_bound(key, 4, 2, gamma, lam)
                below = Fraction(int(bound * 0.99 * 10**6), 10**6)
                above = Fraction(int(bound * 1.01 * 10**6) + 1, 10**6)
                assert reconstruction_bound_holds(below, key, 4, 2, gamma, lam)
                assert not reconstruction_bound_holds(above, key, 4, 2, gamma, lam)

    def test_small_s_dichotomy(self):
        assert s_is_small(2, 4, 2, Fraction(1, 2))  # 2 < 4 - 1
        assert not s_is_small(3, 4, 2, Fraction(1, 2))

    @pytest.mark.parametrize("lam", [Fraction(1, 2), Fraction(1), Fraction(2)])
    def test_bound_dominates_compatible_weight_q3(self, lam):
        """For each degree-algorithm output, the total weight of compatible
        family members stays below the reconstruction bound, for every
        admissible gamma on a rational grid; exact comparisons."""
        g = build_hypercube(3)
        d = g.degree
        psi = 1
        gammas = [Fraction(-1, 4), Fraction(-1, 8), Fraction(0), Fraction(1, 2), Fraction(1)]
        from hardcore_mixing.graphs import side_scan

        hist, *_ = side_scan(g, "even")
        keys = set()
        for s in range(hist.shape[0]):
            for a in range(hist.shape[1]):
                for gg in range(hist.shape[2]):
                    if hist[s, a, gg]:
                        keys.add((a, gg))
        for a_sz, gg in sorted(keys):
            if a_sz == 0:
                continue
            key = FamilyKey(a_sz, gg)
            fam = enumerate_family(g, key)
            for subject in fam:
                f0 = covering_approximation(g, subject)
                pa, _ = degree_algorithm(g, f0, subject, psi)
                compat = reconstruction_compatible(g, pa, fam)
                w = family_weight(compat, lam)
                for gamma in gammas:
                    assert reconstruction_bound_holds(w, key, d, psi, gamma, lam)

    def test_candidates_cover_all_compatible_q3(self):
        g = build_hypercube(3)
        for a_sz, gg in ((1, 3), (4, 4)):
            key = FamilyKey(a_sz, gg)
            fam = enumerate_family(g, key)
            for subject in fam[:4]:
                f0 = covering_approximation(g, subject)
                pa, _ = degree_algorithm(g, f0, subject, psi=1)
                compat = reconstruction_compatible(g, pa, fam)
                for gamma in (Fraction(0), Fraction(1, 2), Fraction(1)):
                    branch, cands = reconstruction_candidates(g, pa, key, gamma)
                    cand_bits = {c.bits for c in cands}
                    for a in compat:
                        assert a.bits in cand_bits, (branch, sorted(a))


class TestParameterChoice:
    def test_perfect_square(self):
        psi, _ = psi_gamma_theorem_choice(1.0, 16, 0.1)
        assert psi == 4

    def test_rounding_and_clamp(self):
        psi5, _ = psi_gamma_theorem_choice(1.0, 5, 0.5)
        assert psi5 == 2  # round(sqrt 5) = 2 = floor(5/2)
        psi6, _ = psi_gamma_theorem_choice(1.0, 6, 0.5)
        assert psi6 == 2  # round(2.449) = 2
        for d in range(4, 200):
            psi, _ = psi_gamma_theorem_choice(1.0, d, 0.5)
            assert 1 <= psi <= d // 2
            assert abs(psi - math.sqrt(d)) <= 1

    def test_gamma_always_above_guarantee(self):
        for d in (4, 16, 100, 1024):
            for lam in (0.1, 1.0, 100.0):
                for delta in (0.9, 0.1, 1e-6):
                    _, gamma = psi_gamma_theorem_choice(lam, d, delta)
                    rd = math.sqrt(d)
                    assert gamma > -rd / (d - rd)

    def test_domain(self):
        with pytest.raises(InvalidParameterError):
            psi_gamma_theorem_choice(1.0, 3, 0.5)
        with pytest.raises(InvalidParameterError):
            psi_gamma_theorem_choice(1.0, 16, 1.5)


class TestFamilyBound:
    def test_t_zero_always_passes(self):
        g = build_hypercube(3)
        rep = theorem2_bound_check(g, FamilyKey(4, 4), Fraction(1), c=100.0)
        assert rep.passed
        assert rep.c_max == float("inf")

    def test_c_zero_degenerate(self):
        g = build_hypercube(3)
        rep = theorem2_bound_check(g, FamilyKey(1, 3), Fraction(1), c=0.0)
        assert rep.passed

    def test_fit_mode_value(self):
        """c_max for the singleton family of the 3-cube: the bound
        (1+lam)^g 2^(-c t beta) meets weight 4 at c = (g - 2)/(t beta)."""
        from hardcore_mixing.hardcore import beta as beta_fn

        g = build_hypercube(3)
        rep = theorem2_bound_check(g, FamilyKey(1, 3), Fraction(1))
        b = beta_fn(1.0, 3, 2 / 3)
        assert rep.c_max == pytest.approx((3 - 2) / (2 * b), rel=1e-9)

    def test_pass_iff_c_below_cmax(self):
        g = build_hypercube(3)
        fit = theorem2_bound_check(g, FamilyKey(1, 3), Fraction(1))
        below = theorem2_bound_check(g, FamilyKey(1, 3), Fraction(1), c=fit.c_max * 0.99)
        above = theorem2_bound_check(g, FamilyKey(1, 3), Fraction(1), c=fit.c_max * 1.01)
        assert below.passed and not above.passed

    def test_small_family_expansion_identity(self):
        """t >= delta g for every nonempty small-closure family (the
        expansion constant is the minimum of t/g over exactly these)."""
        from hardcore_mixing.graphs import bipartite_expansion_constant, side_scan

        for g in (build_hypercube(3), build_hypercube(4)):
            delta = bipartite_expansion_constant(g)
            hist, *_ = side_scan(g, "even")
            for s in range(1, hist.shape[0]):
                for a in range(hist.shape[1]):
                    for gg in range(hist.shape[2]):
                        if hist[s, a, gg] and 2 * a <= g.half_size:
                            assert Fraction(gg - a) >= delta * gg
