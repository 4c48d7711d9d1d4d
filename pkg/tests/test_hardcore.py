"""Hard-core measure: enumeration, region weights, and the scalar functions."""

import math
from fractions import Fraction

import mpmath as mp
import pytest

from hardcore_mixing.errors import CapExceededError, InvalidParameterError
from hardcore_mixing.graphs import (
    VertexSet,
    build_even_torus,
    build_hypercube,
    closure,
    import_graph_text,
)
from hardcore_mixing.hardcore import (
    HardCoreModel,
    RegionTag,
    alpha,
    alpha_mp,
    alpha_threshold_fraction,
    beta,
    classify,
    count_independent_sets,
    enumerate_independent_sets,
    family_weights,
    gamma_of_lambda,
    gamma_of_lambda_mp,
    is_independent,
    iter_independent_sets,
    partition_function,
    region_weights,
    weight,
)

LAMBDAS = [Fraction(1, 2), Fraction(1), Fraction(2)]


def brute_force_count(g) -> int:
    """Independent oracle: walk all 2^N subsets, check edges directly."""
    n = g.num_vertices
    count = 0
    for mask in range(1 << n):
        ok = True
        m = mask
        while m and ok:
            low = m & -m
            v = low.bit_length() - 1
            if g.neighbor_bits(v) & mask:
                ok = False
            m ^= low
        count += ok
    return count


def brute_force_region_weights(g, lam: Fraction, alpha_m: Fraction):
    even_bits = g.even_set().bits
    out = {tag: Fraction(0) for tag in RegionTag}
    z = Fraction(0)
    for I in iter_independent_sets(g):
        w = lam ** len(I)
        z += w
        for tag in classify(g, I, alpha_m):
            out[tag] += w
    return out, z


class TestPointwise:
    def test_empty_always_independent(self):
        for g in (build_hypercube(1), build_hypercube(3)):
            assert is_independent(g, VertexSet.empty(g.num_vertices))

    def test_q1_both_endpoints_dependent(self):
        g = build_hypercube(1)
        assert not is_independent(g, VertexSet.from_ids([0, 1], 2))

    def test_q2_even_pair_independent(self):
        g = build_hypercube(2)
        assert is_independent(g, g.even_set())

    def test_weight(self):
        assert weight(VertexSet.empty(4), Fraction(1, 2)) == 1
        assert weight(VertexSet.from_ids([0, 1, 2], 4), 0.5) == pytest.approx(0.125)
        assert weight(VertexSet.from_ids([0, 3], 4), Fraction(1)) == 1


class TestEnumeration:
    @pytest.mark.parametrize("d,expected", [(1, 3), (2, 7), (3, 35), (4, 743)])
    def test_counts_match_brute_force(self, d, expected):
        g = build_hypercube(d)
        assert count_independent_sets(g) == expected
        assert brute_force_count(g) == expected

    def test_explicit_walk_is_exact(self):
        g = build_hypercube(3)
        seen = set()
        for I in iter_independent_sets(g):
            assert is_independent(g, I)
            assert I.bits not in seen
            seen.add(I.bits)
        assert len(seen) == 35

    def test_walk_cap(self):
        g = build_hypercube(3)
        with pytest.raises(CapExceededError):
            list(iter_independent_sets(g, max_count=10))

    def test_visitor_protocol(self):
        g = build_hypercube(2)
        visited = []
        summary = enumerate_independent_sets(g, visitor=visited.append, lam=Fraction(1))
        assert len(visited) == 7
        assert summary.count == 7
        assert summary.partition_function == 7

    def test_enumeration_cap(self):
        g = build_hypercube(3)
        with pytest.raises(CapExceededError):
            enumerate_independent_sets(g, cap=4)

    def test_summary_region_sum_is_z(self):
        g = build_hypercube(3)
        s = enumerate_independent_sets(g, lam=Fraction(2), by_family=True)
        total = (
            s.region_weights[RegionTag.EVEN_MAJORITY]
            + s.region_weights[RegionTag.ODD_MAJORITY]
            + s.region_weights[RegionTag.BALANCED]
        )
        assert total == s.partition_function
        assert s.family_weights[(1, 3)] == 4 * Fraction(2)


class TestPartitionFunction:
    @pytest.mark.parametrize("lam", LAMBDAS)
    def test_q1_closed_form(self, lam):
        g = build_hypercube(1)
        assert partition_function(HardCoreModel(g, lam)) == 1 + 2 * lam

    @pytest.mark.parametrize("lam", LAMBDAS)
    def test_q2_closed_form(self, lam):
        g = build_hypercube(2)
        assert partition_function(HardCoreModel(g, lam)) == 1 + 4 * lam + 2 * lam**2

    def test_q2_uniform_is_count(self):
        g = build_hypercube(2)
        assert partition_function(HardCoreModel(g, Fraction(1))) == 7

    def test_float_path_agrees(self):
        g = build_hypercube(3)
        exact = partition_function(HardCoreModel(g, Fraction(3, 2)))
        fast = partition_function(HardCoreModel(g, 1.5))
        assert fast == pytest.approx(float(exact), rel=1e-14)


class TestRegions:
    def test_classify_empty(self):
        g = build_hypercube(2)
        tags = classify(g, VertexSet.empty(4), Fraction(1, 2))
        assert RegionTag.BALANCED in tags
        assert RegionTag.TRIVIAL in tags
        assert RegionTag.EVEN_MAJORITY not in tags

    def test_classify_even_pair(self):
        g = build_hypercube(2)
        tags = classify(g, g.even_set(), Fraction(1, 2))
        assert tags == frozenset({RegionTag.EVEN_MAJORITY})

    def test_classify_full_even_class_q3(self):
        g = build_hypercube(3)
        tags = classify(g, g.even_set(), Fraction(1))
        assert tags == frozenset({RegionTag.EVEN_MAJORITY})

    def test_classify_requires_independent(self):
        g = build_hypercube(1)
        with pytest.raises(InvalidParameterError):
            classify(g, VertexSet.from_ids([0, 1], 2), Fraction(1))

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    @pytest.mark.parametrize("lam", LAMBDAS)
    def test_aggregates_match_per_set_classification(self, d, lam):
        g = build_hypercube(d)
        alpha_m = alpha_threshold_fraction(lam) * g.half_size
        expected, z_expected = brute_force_region_weights(g, lam, alpha_m)
        got, z = region_weights(HardCoreModel(g, lam), alpha_m)
        assert z == z_expected
        for tag in RegionTag:
            assert got[tag] == expected[tag], tag

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    @pytest.mark.parametrize("lam", LAMBDAS)
    def test_partition_by_majority(self, d, lam):
        g = build_hypercube(d)
        w, z = region_weights(HardCoreModel(g, lam), Fraction(1, 2))
        assert (
            w[RegionTag.EVEN_MAJORITY] + w[RegionTag.ODD_MAJORITY] + w[RegionTag.BALANCED]
            == z
        )

    @pytest.mark.parametrize("d", [2, 3, 4])
    @pytest.mark.parametrize("lam", LAMBDAS)
    def test_hypercube_parity_symmetry(self, d, lam):
        g = build_hypercube(d)
        w, _ = region_weights(HardCoreModel(g, lam), Fraction(1, 2))
        assert w[RegionTag.EVEN_MAJORITY] == w[RegionTag.ODD_MAJORITY]

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    @pytest.mark.parametrize("lam", LAMBDAS)
    def test_even_phase_weight_identity(self, d, lam):
        """All subsets of the even class weigh (1+lam)^M; removing the empty
        set gives the provable floor for the even-majority phase.  The
        unqualified floor (1+lam)^M itself first holds at d = 4, where
        even-majority sets containing odd vertices appear."""
        g = build_hypercube(d)
        w, _ = region_weights(HardCoreModel(g, lam), Fraction(1, 2))
        m = g.half_size
        assert w[RegionTag.EVEN_MAJORITY] >= (1 + lam) ** m - 1
        if d <= 3:
            # every even-majority set is a subset of the even class: exact gap 1
            assert w[RegionTag.EVEN_MAJORITY] == (1 + lam) ** m - 1
        else:
            assert w[RegionTag.EVEN_MAJORITY] > (1 + lam) ** m

    def test_q1_region_examples(self):
        g = build_hypercube(1)
        w, _ = region_weights(HardCoreModel(g, Fraction(1)), Fraction(1, 2))
        assert w[RegionTag.BALANCED] == 1
        assert w[RegionTag.EVEN_MAJORITY] == 1

    def test_q2_balanced_example(self):
        g = build_hypercube(2)
        w, _ = region_weights(HardCoreModel(g, Fraction(1)), Fraction(1, 2))
        assert w[RegionTag.BALANCED] == 1

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_every_set_small_on_one_side(self, d):
        g = build_hypercube(d)
        m = g.half_size
        for I in iter_independent_sets(g):
            ie = I.intersection(g.even_set())
            io = I.difference(ie)
            small_e = 2 * len(closure(g, ie)) <= m
            small_o = 2 * len(closure(g, io)) <= m
            assert small_e or small_o

    @pytest.mark.parametrize("d", [3, 4])
    @pytest.mark.parametrize("lam", LAMBDAS)
    def test_balanced_inside_trivial_union_nontrivial(self, d, lam):
        g = build_hypercube(d)
        alpha_m = alpha_threshold_fraction(lam) * g.half_size
        for I in iter_independent_sets(g):
            tags = classify(g, I, alpha_m)
            if RegionTag.BALANCED in tags:
                assert RegionTag.TRIVIAL in tags or RegionTag.NONTRIVIAL in tags

    @pytest.mark.parametrize("d", [3, 4])
    @pytest.mark.parametrize("lam", LAMBDAS)
    def test_nontrivial_two_sided_split(self, d, lam):
        g = build_hypercube(d)
        alpha_m = alpha_threshold_fraction(lam) * g.half_size
        w, _ = region_weights(HardCoreModel(g, lam), alpha_m)
        assert w[RegionTag.NONTRIVIAL] <= 2 * max(
            w[RegionTag.NONTRIVIAL_SMALL_EVEN], w[RegionTag.NONTRIVIAL_SMALL_ODD]
        )

    @pytest.mark.parametrize("d", [3, 4])
    @pytest.mark.parametrize("lam", LAMBDAS)
    def test_family_decomposition_bound(self, d, lam):
        """w over sets with I∩even in the (a,g) family is at most
        w(A(a,g)) (1+lam)^(M-g), per family key."""
        g = build_hypercube(d)
        m = g.half_size
        per_family_actual: dict = {}
        for I in iter_independent_sets(g):
            ie = I.intersection(g.even_set())
            key = (len(closure(g, ie)), len(ie) and len(set().union(*[g.neighbors(v) for v in ie])) or 0)
            per_family_actual[key] = per_family_actual.get(key, Fraction(0)) + lam ** len(I)
        fams = family_weights(g, "even", lam)
        for key, actual in per_family_actual.items():
            a, gg = key
            assert actual <= fams[(a, gg)] * (1 + lam) ** (m - gg)

    def test_region_weights_float_agrees_with_exact(self):
        g = build_hypercube(3)
        am = alpha_threshold_fraction(Fraction(3, 2)) * g.half_size
        we, ze = region_weights(HardCoreModel(g, Fraction(3, 2)), am)
        wf, zf = region_weights(HardCoreModel(g, 1.5), float(am))
        assert zf == pytest.approx(float(ze), rel=1e-13)
        for tag in RegionTag:
            assert wf[tag] == pytest.approx(float(we[tag]), rel=1e-12, abs=1e-12)


class TestScalarFunctions:
    def test_alpha_at_one(self):
        # exact closed form at lambda = 1: 1/(88 log2 3)
        expected = 1 / (88 * math.log2(3))
        assert alpha(1.0) == pytest.approx(expected, rel=1e-15)
        with mp.workprec(80):
            assert float(alpha_mp(1)) == pytest.approx(expected, rel=1e-15)

    def test_alpha_range_and_limit(self):
        prev = 0.0
        for lam in [2.0**k for k in range(-10, 40)]:
            a = alpha(lam)
            assert 0 < a < 1 / 44
            assert a > prev
            prev = a
        assert alpha(2.0**500) == pytest.approx(1 / 44, rel=5e-3)

    def test_alpha_below_threshold_on_grid(self):
        for d in (4, 16, 64, 256, 1024):
            for mult in (1.0, 2.0, 10.0):
                lam = mult / math.sqrt(d)
                assert alpha(lam) < 1 / 44

    def test_alpha_gamma_identity(self):
        # alpha = gamma / (44 log2(1 + 1/gamma))
        for lam in (0.25, 1.0, 3.0, 100.0):
            gam = gamma_of_lambda(lam)
            assert alpha(lam) == pytest.approx(
                gam / (44 * math.log2(1 + 1 / gam)), rel=1e-12
            )

    def test_alpha_threshold_is_dyadic(self):
        f = alpha_threshold_fraction(Fraction(1))
        assert f == Fraction(*float(alpha(1.0)).as_integer_ratio())

    def test_beta_examples(self):
        assert beta(1.0, 2, 0.5) == pytest.approx(1 / 7, rel=1e-15)
        assert beta(3.0, 2, 1.0) == pytest.approx(4 / 7, rel=1e-15)

    def test_beta_monotonicity(self):
        assert beta(2.0, 8, 0.5) > beta(1.0, 8, 0.5)
        assert beta(1.0, 8, 0.5) > beta(1.0, 8, 0.25)

    def test_beta_small_lambda_vanishes(self):
        assert beta(1e-9, 8, 0.5) < 1e-17

    def test_beta_domain(self):
        with pytest.raises(InvalidParameterError):
            beta(1.0, 1, 0.5)
        with pytest.raises(InvalidParameterError):
            beta(0.0, 4, 0.5)
        with pytest.raises(InvalidParameterError):
            beta(1.0, 4, 1.5)

    def test_gamma_examples(self):
        assert gamma_of_lambda(1.0) == pytest.approx(0.5, rel=1e-15)
        assert gamma_of_lambda(3.0) == pytest.approx(2 / 3, rel=1e-15)
        assert float(gamma_of_lambda_mp(Fraction(3))) == pytest.approx(2 / 3, rel=1e-15)

    def test_gamma_range(self):
        for lam in (1e-9, 0.1, 1.0, 10.0, 1e9):
            assert 0 < gamma_of_lambda(lam) < 1
        assert gamma_of_lambda(1e-9) < 1e-8


class TestTorusModels:
    @pytest.mark.parametrize("lam", LAMBDAS)
    def test_torus_partition_function(self, lam):
        g = build_even_torus(4, 1)  # the 4-cycle: same graph family as Q_2
        q2 = build_hypercube(2)
        assert partition_function(HardCoreModel(g, lam)) == partition_function(
            HardCoreModel(q2, lam)
        )

    def test_matching_partition_function(self):
        g = import_graph_text("bipartite 1 6\n3\n4\n5\n")
        lam = Fraction(2)
        # three independent edges: Z = (1 + 2 lam)^3
        assert partition_function(HardCoreModel(g, lam)) == (1 + 2 * lam) ** 3
