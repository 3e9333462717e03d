"""Network topologies and gossip mixing matrices.

A topology is an undirected connected graph on N nodes. The mixing matrix is
built from the graph Laplacian as W = I - L/tau with tau = lambda_max(L), so
that W is symmetric, doubly stochastic, positive semidefinite, and respects
the sparsity pattern of the graph. The averaged matrix is Wt = (W + I)/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class TopologyError(ValueError):
    pass


def adjacency_complete(n: int) -> np.ndarray:
    A = np.ones((n, n)) - np.eye(n)
    return A


def adjacency_ring(n: int) -> np.ndarray:
    if n < 3:
        raise TopologyError("ring needs n >= 3")
    A = np.zeros((n, n))
    for i in range(n):
        A[i, (i + 1) % n] = A[(i + 1) % n, i] = 1.0
    return A


def adjacency_path(n: int) -> np.ndarray:
    A = np.zeros((n, n))
    for i in range(n - 1):
        A[i, i + 1] = A[i + 1, i] = 1.0
    return A


def adjacency_star(n: int) -> np.ndarray:
    if n < 2:
        raise TopologyError("star needs n >= 2")
    A = np.zeros((n, n))
    A[0, 1:] = A[1:, 0] = 1.0
    return A


def adjacency_erdos_renyi(n: int, p: float, seed: int, max_tries: int = 1000) -> np.ndarray:
    """Random G(n, p) graph, resampled until connected."""
    if not (0.0 < p <= 1.0):
        raise TopologyError("edge probability must be in (0, 1]")
    if n == 1:
        return np.zeros((1, 1))
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        U = rng.random((n, n)) < p
        A = np.triu(U, 1).astype(np.float64)
        A = A + A.T
        if is_connected(A):
            return A
    raise TopologyError(f"no connected G({n},{p}) graph after {max_tries} tries "
                        "(edge probability too small for this size)")


_NAMED = {
    "complete": adjacency_complete,
    "ring": adjacency_ring,
    "path": adjacency_path,
    "star": adjacency_star,
}


def make_adjacency(kind: str, n: int, p: float = 0.4, seed: int = 0) -> np.ndarray:
    if kind in _NAMED:
        return _NAMED[kind](n)
    if kind in ("erdos_renyi", "random"):
        return adjacency_erdos_renyi(n, p, seed)
    raise TopologyError(f"unknown topology {kind!r}")


def check_adjacency(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise TopologyError("adjacency must be square")
    if not np.array_equal(A, A.T):
        raise TopologyError("adjacency must be symmetric")
    if np.any(np.diag(A) != 0):
        raise TopologyError("adjacency must have zero diagonal")
    if not np.isin(A, (0.0, 1.0)).all():
        raise TopologyError("adjacency must be 0/1")
    return A


def bfs_distances(A: np.ndarray) -> np.ndarray:
    """All-pairs hop distances; unreachable pairs get -1."""
    n = len(A)
    nbrs = [np.flatnonzero(A[i]) for i in range(n)]
    D = -np.ones((n, n), dtype=np.int64)
    for s in range(n):
        D[s, s] = 0
        frontier = [s]
        dist = 0
        while frontier:
            dist += 1
            nxt = []
            for u in frontier:
                for v in nbrs[u]:
                    if D[s, v] < 0:
                        D[s, v] = dist
                        nxt.append(v)
            frontier = nxt
    return D


def is_connected(A: np.ndarray) -> bool:
    return bool((bfs_distances(A) >= 0).all())


def laplacian(A: np.ndarray) -> np.ndarray:
    return np.diag(A.sum(axis=1)) - A


@dataclass(frozen=True)
class Graph:
    """Undirected connected graph on nodes 0..n-1."""

    adjacency: np.ndarray

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def edges(self) -> list[tuple[int, int]]:
        iu, ju = np.nonzero(np.triu(self.adjacency, 1))
        return [(int(i), int(j)) for i, j in zip(iu, ju)]

    def neighbors(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[v])

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(np.int64)


def gen_random_graph(n_nodes: int, edge_prob: float, seed: int) -> Graph:
    if n_nodes < 1:
        raise TopologyError("need at least one node")
    return Graph(adjacency_erdos_renyi(n_nodes, edge_prob, seed))


def graph_to_text(g: Graph) -> str:
    lines = [str(g.n)]
    lines += [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> Graph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise TopologyError("empty graph text")
    n = int(lines[0])
    A = np.zeros((n, n))
    for ln in lines[1:]:
        u, v = (int(x) for x in ln.split())
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise TopologyError(f"bad edge {ln!r}")
        A[u, v] = A[v, u] = 1.0
    return Graph(A)


def mixing_to_csv(mix: "MixingMatrix") -> str:
    return "\n".join(",".join(f"{x:.17g}" for x in row) for row in mix.W) + "\n"


@dataclass
class MixingMatrix:
    """Gossip matrix pair for a connected graph."""

    adjacency: np.ndarray
    W: np.ndarray
    Wt: np.ndarray  # (W + I)/2
    gamma: float    # smallest nonzero eigenvalue of (I - W)/2
    distances: np.ndarray = field(repr=False)
    tau: float = 1.0  # Laplacian scale: W = I - L/tau

    @property
    def n(self) -> int:
        return len(self.W)

    @property
    def eccentricities(self) -> np.ndarray:
        return self.distances.max(axis=1)

    @property
    def diameter(self) -> int:
        return int(self.distances.max())

    @property
    def graph_condition(self) -> float:
        return 1.0 / self.gamma


def build_mixing(A, tau: float | None = None) -> MixingMatrix:
    """W = I - L/tau. By default tau = lambda_max(L), which makes W psd while
    keeping the required null-space and sparsity structure."""
    if isinstance(A, Graph):
        A = A.adjacency
    A = check_adjacency(A)
    if len(A) == 1:
        one = np.ones((1, 1))
        return MixingMatrix(A, one.copy(), one.copy(), 1.0, np.zeros((1, 1), dtype=np.int64))
    if not is_connected(A):
        raise TopologyError("graph must be connected")
    L = laplacian(A)
    lmax = float(np.linalg.eigvalsh(L)[-1])
    if tau is None:
        tau = lmax
    elif tau < lmax:
        raise TopologyError(f"tau must be >= lambda_max(L) = {lmax:.6g} for psd W")
    W = np.eye(len(A)) - L / tau
    Wt = 0.5 * (W + np.eye(len(A)))
    evals = np.linalg.eigvalsh(0.5 * (np.eye(len(A)) - W))
    nonzero = evals[evals > 1e-10]
    if len(nonzero) != len(A) - 1:
        raise TopologyError("(I - W)/2 must have a simple zero eigenvalue")
    gamma = float(nonzero[0])
    return MixingMatrix(A, W, Wt, gamma, bfs_distances(A), tau=float(tau))


def check_mixing_conditions(mix: MixingMatrix, tol: float = 1e-10) -> dict:
    """The four gossip-matrix conditions:
    (i) sparsity: W_nm nonzero only on edges and the diagonal;
    (ii) symmetric and doubly stochastic;
    (iii) null(I - W) = span(1);
    (iv) 0 <= W <= I and 1/2 I <= Wt <= I in the psd order.
    """
    W, A = mix.W, mix.adjacency
    n = len(W)
    off = ~np.eye(n, dtype=bool)
    ok_sparsity = bool(np.all(np.abs(W[off & (A == 0)]) <= tol))
    ok_sym = bool(np.all(np.abs(W - W.T) <= tol))
    ok_stoch = bool(np.all(np.abs(W.sum(axis=1) - 1.0) <= tol))
    evals = np.linalg.eigvalsh(W)
    ok_null = int(np.sum(np.abs(np.linalg.eigvalsh(np.eye(n) - W)) <= 1e-8)) == 1
    ok_spectrum = bool(evals[0] >= -tol and evals[-1] <= 1.0 + tol)
    evt = np.linalg.eigvalsh(mix.Wt)
    ok_spectrum_t = bool(evt[0] >= 0.5 - tol and evt[-1] <= 1.0 + tol)
    return {
        "sparsity": ok_sparsity,
        "symmetric": ok_sym,
        "doubly_stochastic": ok_stoch,
        "simple_consensus_eigenvalue": ok_null,
        "spectrum_W": ok_spectrum,
        "spectrum_Wt": ok_spectrum_t,
    }


def condition_numbers(mix: MixingMatrix, L: float, mu: float) -> tuple[float, float]:
    """Operator and graph condition numbers (L/mu, 1/gamma)."""
    if mu <= 0 or L < mu:
        raise TopologyError("need L >= mu > 0")
    return L / mu, 1.0 / mix.gamma


def relay_parents(A: np.ndarray) -> np.ndarray:
    """Deterministic shortest-path forwarding table.

    parents[o, u] is the neighbor of u on a shortest path from origin o,
    choosing the smallest-index candidate; parents[o, o] = -1. Every node
    therefore receives each origin's broadcast exactly once per round it was
    emitted, after exactly d(o, u) hops.
    """
    A = check_adjacency(A)
    D = bfs_distances(A)
    n = len(A)
    parents = -np.ones((n, n), dtype=np.int64)
    for o in range(n):
        for u in range(n):
            if u == o:
                continue
            cands = np.flatnonzero(A[u] * (D[o] == D[o, u] - 1))
            if len(cands) == 0:
                raise TopologyError("graph must be connected")
            parents[o, u] = int(cands[0])
    return parents
