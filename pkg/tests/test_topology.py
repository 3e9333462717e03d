import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dsba.topology import (
    Graph,
    TopologyError,
    bfs_distances,
    build_mixing,
    check_adjacency,
    check_mixing_conditions,
    condition_numbers,
    gen_random_graph,
    graph_from_text,
    graph_to_text,
    is_connected,
    laplacian,
    make_adjacency,
    relay_parents,
)


def test_make_adjacency_shapes():
    for kind, n in [("complete", 5), ("ring", 6), ("path", 4), ("star", 7)]:
        A = make_adjacency(kind, n)
        assert A.shape == (n, n)
        assert np.array_equal(A, A.T)
        assert np.all(np.diag(A) == 0)
        assert is_connected(A)


def test_ring_and_path_degrees():
    ring = make_adjacency("ring", 6)
    assert np.all(ring.sum(axis=1) == 2)
    path = make_adjacency("path", 6)
    assert sorted(path.sum(axis=1)) == [1, 1, 2, 2, 2, 2]


def test_star_degrees():
    star = make_adjacency("star", 5)
    assert sorted(star.sum(axis=1)) == [1, 1, 1, 1, 4]


def test_erdos_renyi_connected_and_seeded():
    a = make_adjacency("erdos_renyi", 9, p=0.3, seed=4)
    b = make_adjacency("erdos_renyi", 9, p=0.3, seed=4)
    assert np.array_equal(a, b)
    assert is_connected(a)


def test_check_adjacency_rejects_bad_input():
    with pytest.raises(TopologyError):
        check_adjacency(np.ones((3, 3)))  # self-loops
    with pytest.raises(TopologyError):
        check_adjacency(np.triu(np.ones((3, 3)), 1))  # asymmetric


def test_bfs_distances_path():
    A = make_adjacency("path", 5)
    D = bfs_distances(A)
    assert D[0, 4] == 4
    assert D[2, 2] == 0
    assert np.array_equal(D, D.T)


def test_laplacian_rows_sum_to_zero():
    A = make_adjacency("erdos_renyi", 8, p=0.5, seed=1)
    L = laplacian(A)
    assert np.all(L.sum(axis=1) == 0)
    assert np.all(np.diag(L) == A.sum(axis=1))


@settings(deadline=None, max_examples=25)
@given(st.integers(2, 10), st.integers(0, 100))
def test_mixing_conditions_hold(n, seed):
    A = make_adjacency("erdos_renyi", n, p=0.5, seed=seed)
    mix = build_mixing(A)
    assert all(check_mixing_conditions(mix).values())


def test_mixing_rejects_small_tau():
    A = make_adjacency("ring", 5)
    with pytest.raises(TopologyError):
        build_mixing(A, tau=0.1)


def test_mixing_tau_scale():
    A = make_adjacency("ring", 5)
    L = laplacian(A)
    lmax = float(np.linalg.eigvalsh(L)[-1])
    mix = build_mixing(A, tau=2.0 * lmax)
    assert np.allclose(mix.W, np.eye(5) - L / (2.0 * lmax))
    assert mix.tau == pytest.approx(2.0 * lmax)


def test_mixing_single_node():
    mix = build_mixing(np.zeros((1, 1)))
    assert mix.W[0, 0] == 1.0
    assert mix.gamma == 1.0


def test_mixing_rejects_disconnected():
    A = np.zeros((4, 4))
    A[0, 1] = A[1, 0] = 1.0
    A[2, 3] = A[3, 2] = 1.0
    with pytest.raises(TopologyError):
        build_mixing(A)


def test_condition_numbers():
    mix = build_mixing(make_adjacency("ring", 6))
    kappa, graph_cond = condition_numbers(mix, L=2.0, mu=0.5)
    assert kappa == pytest.approx(4.0)
    assert graph_cond == pytest.approx(1.0 / mix.gamma)


def test_graph_text_roundtrip():
    g = gen_random_graph(7, 0.4, seed=11)
    assert isinstance(g, Graph)
    text = graph_to_text(g)
    g2 = graph_from_text(text)
    assert np.array_equal(g.adjacency, g2.adjacency)


def test_relay_parents_are_bfs_optimal():
    A = make_adjacency("erdos_renyi", 8, p=0.4, seed=3)
    D = bfs_distances(A)
    parents = relay_parents(A)
    n = len(A)
    for origin in range(n):
        for node in range(n):
            if node == origin:
                continue
            par = parents[origin, node]
            assert A[node, par] == 1
            assert D[origin, par] == D[origin, node] - 1


def test_eccentricity_and_diameter():
    mix = build_mixing(make_adjacency("path", 5))
    assert mix.diameter == 4
    assert mix.eccentricities.max() == 4
    assert mix.eccentricities.min() == 2
