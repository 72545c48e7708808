import itertools
import random

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from sklearn.metrics import normalized_mutual_info_score

from adhoc_cd.graph import Partition, Snapshot
from adhoc_cd.metrics import (
    NoPairs,
    ObjectiveWeights,
    ZeroWeightGraph,
    average_ber,
    average_modularity,
    modularity,
    modularity_terms,
    nmi,
    objective,
    variation,
)

from conftest import partitions_of, two_cliques, weighted_graphs
from oracles import brute_modularity, brute_variation, floyd_warshall_pairs, labels_of, scripted_objective, set_partitions

TRIANGLE = Snapshot.from_weights([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


def test_one_community_has_zero_modularity():
    g = two_cliques()
    assert modularity(g, {n: 0 for n in g.nodes}) == pytest.approx(0.0, abs=1e-15)


def test_triangle_singletons():
    assert modularity(TRIANGLE, Partition.singletons(range(3))) == pytest.approx(-1 / 3)
    assert brute_modularity(TRIANGLE, {0: 0, 1: 1, 2: 2}) == pytest.approx(-1 / 3)


def test_two_cliques_value():
    g = two_cliques()
    p = Partition.from_communities([[0, 1, 2], [3, 4, 5]])
    assert modularity(g, p) == pytest.approx(6 / 7 - 1 / 2, abs=1e-15)
    terms = modularity_terms(g, p)
    assert terms.e_ii.tolist() == pytest.approx([3 / 7, 3 / 7])
    assert terms.a_i.tolist() == pytest.approx([1 / 2, 1 / 2])
    assert terms.Q == pytest.approx(0.35714285714285715)


def test_zero_weight_graph_errors():
    with pytest.raises(ZeroWeightGraph):
        modularity(Snapshot.from_weights([], nodes=[0, 1]), {0: 0, 1: 0})


@settings(max_examples=150)
@given(weighted_graphs(min_nodes=2, min_edges=1), st.data())
def test_modularity_matches_pairwise_sum(g, data):
    p = data.draw(partitions_of(g.nodes))
    assert modularity(g, p) == pytest.approx(brute_modularity(g, p.assignment), abs=1e-12)


@given(weighted_graphs(min_nodes=2, min_edges=1), st.data(), st.floats(0.05, 20))
def test_modularity_scale_invariant(g, data, c):
    p = data.draw(partitions_of(g.nodes))
    scaled = Snapshot.from_weights([(u, v, e.weight * c) for (u, v), e in g.edges.items()], nodes=g.nodes)
    assert modularity(scaled, p) == pytest.approx(modularity(g, p), abs=1e-12)


def test_modularity_range_on_small_graphs():
    rng = random.Random(5)
    for _ in range(20):
        n = rng.randint(2, 6)
        edges = [(u, v, rng.uniform(0.1, 1)) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.6]
        if not edges:
            continue
        g = Snapshot.from_weights(edges, nodes=range(n))
        for blocks in set_partitions(range(n)):
            q = modularity(g, labels_of(blocks))
            assert -0.5 - 1e-12 <= q < 1


def test_average_modularity():
    g = two_cliques()
    p = Partition.from_communities([[0, 1, 2], [3, 4, 5]])
    assert average_modularity([g, g, g], p) == pytest.approx(modularity(g, p))
    empty = Snapshot(0, g.nodes, {})
    assert average_modularity([g, empty], p) == pytest.approx(modularity(g, p))
    with pytest.raises(ZeroWeightGraph):
        average_modularity([empty], p)


def test_average_modularity_is_arithmetic_mean():
    a = two_cliques()
    b = TRIANGLE
    pa = Partition.from_communities([[0, 1, 2], [3, 4, 5]])
    pb = Partition({0: 0, 1: 0, 2: 1})
    qa, qb = modularity(a, pa), modularity(b, pb)
    assert average_modularity([a, b], [pa, pb]) == pytest.approx((qa + qb) / 2)


def test_variation_examples():
    p = Partition({0: 0, 1: 0, 2: 0, 3: 1, 4: 1})
    assert variation(p, p) == (0, 0.0)
    q = Partition({0: 0, 1: 0, 2: 1, 3: 1, 4: 1})
    assert variation(p, q) == (1, 0.2)
    assert brute_variation(p, q) == 1
    single = Partition.singletons(range(4))
    whole = Partition({n: 0 for n in range(4)})
    assert variation(single, whole)[0] == 3
    assert brute_variation(single, whole) == 3


def test_variation_restricts_to_shared_nodes():
    p = Partition({0: 0, 1: 0, 9: 1})
    q = Partition({0: 0, 1: 1, 7: 0})
    assert variation(p, q) == (1, 0.5)
    assert variation(Partition({0: 0}), Partition({1: 0})) == (0, 0.0)


@given(st.integers(1, 10).flatmap(lambda n: st.tuples(partitions_of(range(n)), partitions_of(range(n)))))
def test_variation_matches_brute_force(pair):
    p, q = pair
    assert variation(p, q)[0] == brute_variation(p, q)


@given(st.integers(1, 9).flatmap(lambda n: st.tuples(*[partitions_of(range(n))] * 3)), st.permutations(range(5)))
def test_variation_metric_properties(triple, perm):
    p, q, r = triple
    assert variation(p, q) == variation(q, p)
    assert variation(p, r)[0] <= variation(p, q)[0] + variation(q, r)[0]
    relabelled = Partition({n: perm[c] for n, c in p.assignment.items()})
    assert variation(relabelled, q) == variation(p, q)


def test_average_ber_examples():
    path = Snapshot.from_bers([(0, 1, 0.1), (1, 2, 0.1)])
    one = Partition({0: 0, 1: 0, 2: 0})
    assert average_ber([path], one) == pytest.approx((0.1 + 0.1 + 0.2) / 3)
    edge = Snapshot.from_bers([(0, 1, 0.25)])
    assert average_ber([edge], Partition({0: 0, 1: 0})) == pytest.approx(0.25)
    two = Snapshot.from_bers([(0, 1, 0.1), (2, 3, 0.3), (1, 2, 0.05)])
    p = Partition({0: 0, 1: 0, 2: 1, 3: 1})
    assert average_ber([two], p) == pytest.approx(0.2)


def test_average_ber_keeps_zero_ber_links():
    g = Snapshot.from_bers([(0, 1, 0.0), (1, 2, 0.2)])
    assert average_ber([g], Partition({0: 0, 1: 0, 2: 0})) == pytest.approx((0.0 + 0.2 + 0.2) / 3)


def test_average_ber_no_pairs():
    g = Snapshot.from_bers([(0, 1, 0.1)])
    with pytest.raises(NoPairs):
        average_ber([g], Partition({0: 0, 1: 1}))


@given(weighted_graphs(min_nodes=2, min_edges=1), st.data())
def test_average_ber_matches_floyd_warshall(g, data):
    p = data.draw(partitions_of(g.nodes, max_labels=2))
    pairs = floyd_warshall_pairs(g, p.assignment)
    if not pairs:
        with pytest.raises(NoPairs):
            average_ber([g], p)
    else:
        assert average_ber([g], p) == pytest.approx(sum(pairs) / len(pairs), abs=1e-12)


@given(weighted_graphs(min_nodes=2, min_edges=1), st.data(), st.floats(0.0, 1.0))
def test_average_ber_monotone_in_edge_ber(g, data, frac):
    p = data.draw(partitions_of(g.nodes, max_labels=2))
    assume(floyd_warshall_pairs(g, p.assignment))
    key = data.draw(st.sampled_from(sorted(g.edges)))
    edges = [(u, v, e.mean_ber * (frac if (u, v) == key else 1.0)) for (u, v), e in g.edges.items()]
    lowered = Snapshot.from_bers(edges, nodes=g.nodes)
    assert average_ber([lowered], p) <= average_ber([g], p) + 1e-12


def test_objective_degenerate_weights():
    g = two_cliques()
    p = Partition.from_communities([[0, 1, 2], [3, 4, 5]])
    assert objective([g], p, ObjectiveWeights(0, 0)) == pytest.approx(modularity(g, p))
    ber = average_ber([g], p)
    assert objective([g], p, ObjectiveWeights(3.0, -2.0)) == pytest.approx(modularity(g, p) - 2 * ber)


def test_objective_split_community_toy():
    # community {0,1,2,3} is split on this graph: 0-1 and 2-3 only
    g = Snapshot.from_bers([(0, 1, 0.1), (2, 3, 0.2), (1, 4, 0.4), (4, 5, 0.3), (3, 4, 0.5)])
    p = Partition({0: 0, 1: 0, 2: 0, 3: 0, 4: 1, 5: 1})
    # N_cc = 3 ({0,1}, {2,3}, {4,5}), N_community = 2
    q = brute_modularity(g, p.assignment)
    ber = (0.1 + 0.2 + 0.3) / 3
    assert objective([g], p, ObjectiveWeights(0.5, 2.0)) == pytest.approx(q + 0.5 * 1 + 2.0 * ber, abs=1e-12)
    assert objective([g], p, ObjectiveWeights(0.5, 2.0)) == pytest.approx(
        scripted_objective([g], p.assignment, 0.5, 2.0), abs=1e-12
    )


def test_objective_rejects_negative_lambda():
    with pytest.raises(ValueError):
        ObjectiveWeights(-1.0, 0.0)


def test_nmi_examples():
    p = Partition({0: 0, 1: 0, 2: 1, 3: 1})
    assert nmi(p, Partition({0: 5, 1: 5, 2: 2, 3: 2})) == 1.0
    whole = Partition({n: 0 for n in range(4)})
    assert nmi(whole, p) == 0.0
    assert nmi(whole, whole) == 1.0
    assert nmi(p, Partition({0: 0, 2: 0, 1: 1, 3: 1})) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        nmi(Partition({0: 0}), Partition({1: 0}))


@given(st.integers(2, 10).flatmap(lambda n: st.tuples(partitions_of(range(n)), partitions_of(range(n)))))
def test_nmi_matches_sklearn(pair):
    p, q = pair
    a = [p[n] for n in sorted(p.nodes)]
    b = [q[n] for n in sorted(q.nodes)]
    if p.n_communities == 1 or q.n_communities == 1:
        expected = 1.0 if p.n_communities == q.n_communities == 1 else 0.0
    else:
        expected = normalized_mutual_info_score(a, b, average_method="arithmetic")
    assert nmi(p, q) == pytest.approx(expected, abs=1e-12)


def test_nmi_one_iff_equal_exhaustive():
    for n in range(1, 6):
        blocks = list(set_partitions(range(n)))
        for b1, b2 in itertools.product(blocks, repeat=2):
            p, q = Partition(labels_of(b1)), Partition(labels_of(b2))
            v = nmi(p, q)
            assert 0.0 <= v <= 1.0
            assert (v == 1.0) == (p == q)


def test_terms_sum_of_fractions_is_one():
    g = two_cliques(bridge=0.4)
    p = Partition({0: 0, 1: 0, 2: 1, 3: 1, 4: 2, 5: 2})
    terms = modularity_terms(g, p)
    assert np.sum(terms.a_i) == pytest.approx(1.0)
