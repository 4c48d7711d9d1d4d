"""Graph construction, closures, and the expansion constant."""

from fractions import Fraction
from itertools import combinations

import pytest

from hardcore_mixing.errors import (
    CapExceededError,
    InvalidParameterError,
    MixedParityError,
)
from hardcore_mixing.graphs import (
    BipartiteGraph,
    VertexSet,
    bipartite_expansion_constant,
    build_even_torus,
    build_hypercube,
    closure,
    export_graph_text,
    hypercube_delta_lower_bound,
    import_graph_text,
    is_small,
    neighborhood,
    parse_graph_spec,
)

MATCHING_3 = "bipartite 1 6\n3\n4\n5\n"


def matching_graph():
    return import_graph_text(MATCHING_3)


def vs(g, ids):
    return VertexSet.from_ids(ids, g.num_vertices)


def delta_oracle(g):
    """Independent brute force straight from the definition: min of
    (|N(A)|-|[A]|)/|N(A)| over nonempty small A of either class."""
    best = None
    for cls in (g.even_class, g.odd_class):
        for r in range(1, len(cls) + 1):
            for subset in combinations(cls, r):
                na = set()
                for v in subset:
                    na.update(g.neighbors(v))
                ca = [x for x in cls if set(g.neighbors(x)) <= na]
                if 2 * len(ca) <= g.half_size:
                    cand = Fraction(len(na) - len(ca), len(na))
                    if best is None or cand < best:
                        best = cand
    return best


class TestHypercube:
    def test_d1_single_edge(self):
        g = build_hypercube(1)
        assert g.num_vertices == 2
        assert g.half_size == 1
        assert g.neighbors(0) == (1,)

    def test_d2_four_cycle(self):
        g = build_hypercube(2)
        assert g.num_vertices == 4
        assert all(len(g.neighbors(v)) == 2 for v in range(4))

    def test_d3_adjacency_matches_coordinate_definition(self):
        g = build_hypercube(3)
        assert g.num_vertices == 8
        edges = {(v, w) for v in range(8) for w in g.neighbors(v) if v < w}
        assert len(edges) == 12
        for v in range(8):
            for w in range(8):
                differ_one = bin(v ^ w).count("1") == 1
                assert (w in g.neighbors(v)) == differ_one

    def test_parity_classes(self):
        g = build_hypercube(4)
        for v in g.even_class:
            assert bin(v).count("1") % 2 == 0
        assert len(g.even_class) == len(g.odd_class) == 8

    def test_invalid_dimension(self):
        with pytest.raises(InvalidParameterError):
            build_hypercube(0)
        with pytest.raises(InvalidParameterError):
            build_hypercube(64)


class TestTorus:
    def test_l2_equals_hypercube(self):
        for d in range(1, 5):
            q = build_hypercube(d)
            t = build_even_torus(2, d)
            assert t.degree == q.degree
            assert t.even_class == q.even_class
            for v in range(q.num_vertices):
                assert t.neighbors(v) == q.neighbors(v)

    def test_l2_isomorphic_under_relabeling(self):
        # canonical relabeling check: permute coordinates of the torus ids
        # and confirm the adjacency is carried over
        q = build_hypercube(3)
        t = build_even_torus(2, 3)
        perm = [0, 2, 1]  # swap two coordinate axes

        def relabel(v):
            bits = [(v >> (2 - i)) & 1 for i in range(3)]
            return sum(bits[perm[i]] << (2 - i) for i in range(3))

        for v in range(8):
            assert sorted(relabel(w) for w in t.neighbors(v)) == sorted(
                q.neighbors(relabel(v))
            )

    def test_l4_d1_is_four_cycle(self):
        g = build_even_torus(4, 1)
        assert g.num_vertices == 4
        assert all(len(g.neighbors(v)) == 2 for v in range(4))
        assert g.neighbors(0) == (1, 3)

    def test_l4_d2_degree_audit(self):
        g = build_even_torus(4, 2)
        assert g.num_vertices == 16
        assert g.degree == 4
        for v in range(16):
            assert len(set(g.neighbors(v))) == 4

    def test_odd_side_rejected(self):
        with pytest.raises(InvalidParameterError):
            build_even_torus(3, 2)

    def test_bad_dimension(self):
        with pytest.raises(InvalidParameterError):
            build_even_torus(4, 0)


class TestNeighborhoodClosure:
    def test_neighborhood_singleton(self):
        g = build_hypercube(3)
        v = g.even_class[0]
        assert neighborhood(g, vs(g, [v])).ids() == g.neighbors(v)

    def test_neighborhood_empty(self):
        g = build_hypercube(3)
        assert len(neighborhood(g, VertexSet.empty(8))) == 0

    def test_neighborhood_distance_two_pair(self):
        g = build_hypercube(3)
        a, b = 0, 3  # hamming distance 2, both even
        n = neighborhood(g, vs(g, [a, b]))
        assert len(n) == 4

    def test_neighborhood_mixed_parity(self):
        g = build_hypercube(2)
        with pytest.raises(MixedParityError):
            neighborhood(g, vs(g, [0, 1]))
        assert len(neighborhood(g, vs(g, [0, 1]), allow_mixed=True)) == 4

    def test_closure_q3_singleton(self):
        g = build_hypercube(3)
        v = g.even_class[0]
        assert closure(g, vs(g, [v])).ids() == (v,)

    def test_closure_q2_singleton_is_whole_class(self):
        g = build_hypercube(2)
        c = closure(g, vs(g, [g.even_class[0]]))
        assert c.ids() == g.even_class

    def test_closure_empty(self):
        g = build_hypercube(3)
        assert len(closure(g, VertexSet.empty(8))) == 0

    def test_closure_mixed_parity_rejected(self):
        g = build_hypercube(2)
        with pytest.raises(MixedParityError):
            closure(g, vs(g, [0, 1]))

    @pytest.mark.parametrize(
        "graph",
        [build_hypercube(2), build_hypercube(3), build_hypercube(4), build_even_torus(4, 2)],
        ids=["q2", "q3", "q4", "t42"],
    )
    def test_closure_idempotent_and_neighborhood_preserving(self, graph):
        g = graph
        for mask in range(1 << g.half_size):
            a = g.set_from_class_mask("even", mask)
            ca = closure(g, a)
            assert a.issubset(ca)
            assert closure(g, ca).bits == ca.bits
            assert neighborhood(g, ca).bits == neighborhood(g, a).bits

    @pytest.mark.parametrize(
        "graph",
        [build_hypercube(3), build_hypercube(4), matching_graph()],
        ids=["q3", "q4", "matching"],
    )
    def test_regularity_expansion(self, graph):
        g = graph
        for mask in range(1, 1 << g.half_size):
            a = g.set_from_class_mask("even", mask)
            assert len(a) <= len(neighborhood(g, a))


class TestSmall:
    def test_q3_singleton_small(self):
        g = build_hypercube(3)
        assert is_small(g, vs(g, [g.even_class[0]]))

    def test_q2_singleton_not_small(self):
        g = build_hypercube(2)
        assert not is_small(g, vs(g, [g.even_class[0]]))

    def test_empty_small(self):
        g = build_hypercube(3)
        assert is_small(g, VertexSet.empty(8))


class TestExpansionConstant:
    def test_q3_exact(self):
        g = build_hypercube(3)
        assert bipartite_expansion_constant(g) == Fraction(2, 3)

    def test_q2_sentinel(self):
        assert bipartite_expansion_constant(build_hypercube(2)) is None

    def test_matching_zero(self):
        assert bipartite_expansion_constant(matching_graph()) == Fraction(0)

    @pytest.mark.parametrize(
        "graph",
        [build_hypercube(3), build_hypercube(4), build_even_torus(4, 2), matching_graph()],
        ids=["q3", "q4", "t42", "matching"],
    )
    def test_matches_independent_oracle(self, graph):
        assert bipartite_expansion_constant(graph) == delta_oracle(graph)

    @pytest.mark.parametrize(
        "graph",
        [build_hypercube(3), build_hypercube(4), build_even_torus(4, 2)],
        ids=["q3", "q4", "t42"],
    )
    def test_range(self, graph):
        d = bipartite_expansion_constant(graph)
        assert 0 <= d < 1

    def test_argmin_attains_minimum(self):
        g = build_hypercube(3)
        delta, arg = bipartite_expansion_constant(g, want_argmin=True)
        na = neighborhood(g, arg)
        ca = closure(g, arg)
        assert 2 * len(ca) <= g.half_size
        assert Fraction(len(na) - len(ca), len(na)) == delta

    def test_cap(self):
        g = build_hypercube(4)
        with pytest.raises(CapExceededError):
            bipartite_expansion_constant(g, scan_cap=4)

    def test_delta_lower_bound_shape(self):
        assert hypercube_delta_lower_bound(4, 1.0) == pytest.approx(0.5)
        assert hypercube_delta_lower_bound(100, 1.0) == pytest.approx(0.1)
        lb = hypercube_delta_lower_bound(3, 1.0)
        assert lb == pytest.approx(0.5773502691896258)
        assert Fraction(2, 3) > Fraction(lb).limit_denominator(10**12)


class TestTextFormat:
    def test_round_trip(self):
        for g in (build_hypercube(3), build_even_torus(4, 2), matching_graph()):
            text = export_graph_text(g)
            h = import_graph_text(text)
            assert h.degree == g.degree
            assert h.num_vertices == g.num_vertices
            # exported labels are canonical: even 0..M-1, odd M..N-1
            assert h.even_class == tuple(range(g.half_size))
            assert export_graph_text(h) == text

    def test_header_errors(self):
        with pytest.raises(InvalidParameterError):
            import_graph_text("")
        with pytest.raises(InvalidParameterError):
            import_graph_text("bipartite x 4\n")
        with pytest.raises(InvalidParameterError):
            import_graph_text("wrong 1 2\n0\n")

    def test_wrong_line_count(self):
        with pytest.raises(InvalidParameterError):
            import_graph_text("bipartite 1 6\n3\n4\n")

    def test_neighbor_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            import_graph_text("bipartite 1 4\n1\n3\n")

    def test_graph_spec_parsing(self):
        assert parse_graph_spec("hypercube:d=3").num_vertices == 8
        assert parse_graph_spec("torus:L=4,d=2").num_vertices == 16
        with pytest.raises(InvalidParameterError):
            parse_graph_spec("ring:n=4")
        with pytest.raises(InvalidParameterError):
            parse_graph_spec("hypercube:dim=3")


class TestVertexSet:
    def test_algebra(self):
        a = VertexSet.from_ids([0, 2], 4)
        b = VertexSet.from_ids([2, 3], 4)
        assert a.union(b).ids() == (0, 2, 3)
        assert a.intersection(b).ids() == (2,)
        assert a.difference(b).ids() == (0,)
        assert len(a) == 2
        assert 2 in a and 1 not in a

    def test_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            VertexSet.from_ids([4], 4)

    def test_graph_validation(self):
        with pytest.raises(InvalidParameterError):
            BipartiteGraph([[1], [0], [3], [2]], [0, 1])  # same-parity edge
        with pytest.raises(InvalidParameterError):
            BipartiteGraph([[1, 2], [0], [0]], [0])  # odd vertex count
