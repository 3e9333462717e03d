"""Run orchestration: problems, engines, reference solutions and metrics.

A run is fully determined by a RunConfig: dataset (synthetic or LIBSVM file),
graph, operator family, method variant, communication mode and seeds. Every
engine draws exactly one sample index per node per round from per-node
`default_rng([seed, node])` streams, so dense, sparse and vectorized
executions of the same configuration follow the same sample path.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import dataset as ds
from .algorithms import (NodeState, dsa_node_step, dsba_node_step, extra_round,
                         local_mean_operator, make_node, pointsaga_step,
                         step_size_bound)
from .operators import OperatorSpec, eval_component, lipschitz_bound, make_operator
from .sparsecomm import run_sparse
from .topology import MixingMatrix, build_mixing, laplacian, make_adjacency

VARIANTS = ("dsba", "dsa", "extra", "pointsaga")


class ConfigError(ValueError):
    pass


class SolverError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# problem assembly


@dataclass(frozen=True)
class SyntheticSpec:
    """Self-contained data generator: planted linear model, optionally
    sparsified rows, unit-normalized."""

    kind: str = "ridge"          # ridge (real labels) | classification (+-1)
    d: int = 50
    n_samples: int = 200
    nnz: int | None = None       # nonzeros per sample; None = dense rows
    noise: float = 0.1
    margin: float = 0.0          # classification: reject |cos(a, w*)| < margin
    seed: int = 0


def synthetic_samples(spec: SyntheticSpec) -> list[ds.Sample]:
    if spec.kind not in ("ridge", "classification"):
        raise ConfigError(f"unknown synthetic kind {spec.kind!r}")
    nnz = spec.nnz or spec.d
    if not (1 <= nnz <= spec.d):
        raise ConfigError("nnz must be in [1, d]")
    rng = np.random.default_rng(spec.seed)
    w = rng.normal(size=spec.d)
    w /= np.linalg.norm(w)
    samples: list[ds.Sample] = []
    while len(samples) < spec.n_samples:
        if nnz < spec.d:
            idx = np.sort(rng.choice(spec.d, size=nnz, replace=False)).astype(np.int64)
        else:
            idx = np.arange(spec.d, dtype=np.int64)
        val = rng.normal(size=nnz)
        val /= np.linalg.norm(val)
        score = float(val @ w[idx])
        if spec.kind == "ridge":
            y = score + spec.noise * rng.normal()
        else:
            if abs(score) < spec.margin:
                continue
            y = 1.0 if score > 0 else -1.0
        samples.append(ds.Sample(idx, val, float(y), len(samples)))
    return samples


@dataclass
class Problem:
    family: str
    shards: ds.Shards
    lam: float
    ops: list[list[OperatorSpec]]   # per node
    dim: int

    @property
    def n_nodes(self) -> int:
        return len(self.ops)


def build_problem(shards: ds.Shards, family: str, lam: float) -> Problem:
    if family in ("logistic", "auc"):
        for shard in shards.per_node:
            for s in shard:
                if s.label not in (-1.0, 1.0):
                    raise ConfigError(f"{family} needs labels in {{-1,+1}} "
                                      f"(line {s.line_no})")
    p = shards.p if family == "auc" else None
    if family == "auc" and not (0.0 < shards.p < 1.0):
        raise ConfigError("auc needs both classes present")
    ops = [[make_operator(family, s, lam, shards.d, p) for s in shard]
           for shard in shards.per_node]
    dim = shards.d + 3 if family == "auc" else shards.d
    return Problem(family, shards, lam, ops, dim)


def global_operator(problem: Problem):
    """The root-finding target: sum_n (1/q_n) sum_i B_{n,i}(z) + N*lam*z."""
    N = problem.n_nodes

    def apply(z: np.ndarray) -> np.ndarray:
        out = (N * problem.lam) * np.asarray(z, dtype=np.float64)
        for ops_n in problem.ops:
            scale = 1.0 / len(ops_n)
            for op in ops_n:
                eval_component(op, z).add_into(out, scale)
        return out

    return apply


def reference_solution(problem: Problem, tol: float = 1e-12,
                       max_iters: int = 100) -> tuple[np.ndarray, float]:
    """High-accuracy root of the global operator plus residual certificate.

    Ridge and auc operators are affine, so the exact root comes from column
    probing and a single linear solve; logistic uses damped Newton.
    """
    dim = problem.dim
    F = global_operator(problem)
    if problem.family in ("ridge", "auc"):
        F0 = F(np.zeros(dim))
        M = np.empty((dim, dim))
        e = np.zeros(dim)
        for j in range(dim):
            e[j] = 1.0
            M[:, j] = F(e) - F0
            e[j] = 0.0
        z = np.linalg.solve(M, -F0)
    else:
        N = problem.n_nodes
        z = np.zeros(dim)
        r = F(z)
        for _ in range(max_iters):
            rn = np.linalg.norm(r)
            if rn <= tol:
                break
            J = (N * problem.lam) * np.eye(dim)
            for ops_n in problem.ops:
                scale = 1.0 / len(ops_n)
                for op in ops_n:
                    s = op.sample
                    m = s.label * (s.values @ z[s.indices])
                    sig = 1.0 / (1.0 + np.exp(-m))
                    J[np.ix_(s.indices, s.indices)] += (
                        scale * sig * (1.0 - sig)) * np.outer(s.values, s.values)
            step = np.linalg.solve(J, r)
            damp = 1.0
            while damp > 1e-6:
                r_try = F(z - damp * step)
                if np.linalg.norm(r_try) < rn:
                    break
                damp *= 0.5
            z = z - damp * step
            r = F(z)
    return z, float(np.linalg.norm(F(z)))


def objective(problem: Problem, z: np.ndarray) -> float:
    """Global objective value (ridge/logistic); auc problems report AUC
    through auc_score instead."""
    N = problem.n_nodes
    reg = 0.5 * N * problem.lam * float(z @ z)
    total = 0.0
    for ops_n in problem.ops:
        scale = 1.0 / len(ops_n)
        for op in ops_n:
            s = op.sample
            m = float(s.values @ z[s.indices])
            if problem.family == "ridge":
                total += scale * 0.5 * (m - s.label) ** 2
            elif problem.family == "logistic":
                total += scale * float(np.logaddexp(0.0, -s.label * m))
            else:
                raise ConfigError("objective undefined for auc; use auc_score")
    return total + reg


def auc_score(w: np.ndarray, samples: list[ds.Sample]) -> float:
    """Pairwise ranking score of the linear scorer w, ties counted 1/2.

    Computed by rank statistics in O(Q log Q)."""
    from scipy.stats import rankdata

    scores = np.array([s.values @ w[s.indices] for s in samples])
    labels = np.array([s.label for s in samples])
    n_pos = int(np.sum(labels > 0))
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ConfigError("auc_score needs both classes")
    ranks = rankdata(scores)
    pos_rank_sum = float(ranks[labels > 0].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def max_lipschitz(problem: Problem) -> float:
    return max(lipschitz_bound(op) for ops_n in problem.ops for op in ops_n)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    family: str = "ridge"
    variant: str = "dsba"
    comm: str = "dense"             # dense | sparse
    engine: str = "auto"            # auto | generic | fast
    n_nodes: int = 10
    topology: str = "random"
    edge_prob: float = 0.4
    graph_seed: int = 0
    tau_scale: float = 1.0          # multiplies lambda_max(L)
    synthetic: SyntheticSpec | None = None
    dataset_path: str | None = None
    alpha: float | None = None      # None -> 1/(24 L)
    lam: float | None = None        # None -> 1/(10 Q)
    rounds: int = 1000
    seed: int = 0
    metric_every: int | None = None  # None -> one effective pass (q_min)
    stop_subopt: float | None = None
    newton_iters: int = 20
    track_lyapunov: bool = False
    lyapunov_every: int = 10
    record_trajectory: bool = False
    compute_score: bool = True   # objective/AUC column is skippable work

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if self.family not in ("ridge", "logistic", "auc"):
            raise ConfigError("family must be ridge|logistic|auc")
        if self.comm not in ("dense", "sparse"):
            raise ConfigError("comm must be dense|sparse")
        if self.engine not in ("auto", "generic", "fast"):
            raise ConfigError("engine must be auto|generic|fast")
        if (self.synthetic is None) == (self.dataset_path is None):
            raise ConfigError("exactly one of synthetic or dataset_path is required")
        if self.rounds < 0:
            raise ConfigError("rounds must be nonnegative")
        if self.n_nodes < 1:
            raise ConfigError("n_nodes must be positive")
        if self.variant == "pointsaga" and self.n_nodes != 1:
            raise ConfigError("pointsaga requires n_nodes = 1")
        if self.comm == "sparse" and self.variant not in ("dsba", "dsa"):
            raise ConfigError("sparse communication supports dsba and dsa only")
        if self.tau_scale < 1.0:
            raise ConfigError("tau_scale below 1 violates the mixing spectrum bound")
        if self.track_lyapunov and self.variant == "extra":
            raise ConfigError("lyapunov tracking needs per-sample tables "
                              "(dsba/dsa/pointsaga)")


@dataclass
class MetricsRow:
    round: int
    effective_passes: float
    subopt: float
    score: float
    c_max: int
    wall_time: float


@dataclass
class MetricsLog:
    rows: list[MetricsRow] = field(default_factory=list)

    CSV_HEADER = "round,effective_passes,subopt,score,c_max,wall_time"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(f"{r.round},{r.effective_passes:.10g},{r.subopt:.10g},"
                         f"{r.score:.10g},{r.c_max},{r.wall_time:.6f}")
        return "\n".join(lines) + "\n"

    @property
    def final(self) -> MetricsRow:
        return self.rows[-1]

    def passes_to(self, subopt: float) -> float | None:
        for r in self.rows:
            if r.subopt <= subopt:
                return r.effective_passes
        return None


@dataclass
class RunResult:
    config: RunConfig
    metrics: MetricsLog
    z_final: np.ndarray             # (N, dim)
    z_star: np.ndarray
    z_star_residual: float
    alpha: float
    lam: float
    mix: MixingMatrix
    problem: Problem
    manifest: dict
    lyapunov: list[tuple[int, float]] | None = None
    trajectory: list[np.ndarray] | None = None
    comm_per_round: dict[int, np.ndarray] | None = None
    received_doubles: np.ndarray | None = None


# ---------------------------------------------------------------------------
# Lyapunov diagnostic


class LyapunovTracker:
    """H^t of the convergence analysis:
    ||Z^t - Z*||^2_Wt + ||Q^t - Q*||^2 + c * D^t, with Q^t the running sum of
    U Z^k, U = (I-W)^{1/2}, Q* = -alpha U^+ B(Z*), c = q/(96 L^2), and D^t
    the table-vs-optimum discrepancy sum_n (2/q_n) sum_i |phi - B_{n,i}(z*)|^2.
    """

    def __init__(self, mix: MixingMatrix, problem: Problem, z_star: np.ndarray,
                 alpha: float, L: float, every: int = 10):
        self.Wt = mix.Wt
        self.every = every
        evals, vecs = np.linalg.eigh(np.eye(mix.n) - mix.W)
        evals = np.clip(evals, 0.0, None)
        self.U = vecs @ np.diag(np.sqrt(evals)) @ vecs.T
        inv = np.where(evals > 1e-12, 1.0 / np.sqrt(np.where(evals > 1e-12, evals, 1.0)), 0.0)
        U_pinv = vecs @ np.diag(inv) @ vecs.T
        B_star = np.stack([local_mean_operator(ops_n, z_star, problem.lam)
                           for ops_n in problem.ops])
        self.Q_star = -alpha * (U_pinv @ B_star)
        self.z_star = z_star
        self.targets = [[eval_component(op, z_star) for op in ops_n]
                        for ops_n in problem.ops]
        q = problem.shards.q_min
        self.c = q / (96.0 * L * L)
        self.sum_Z: np.ndarray | None = None
        self.history: list[tuple[int, float]] = []

    def update(self, t: int, Z: np.ndarray, states: list[NodeState]) -> None:
        self.sum_Z = Z.copy() if self.sum_Z is None else self.sum_Z + Z
        if t % self.every:
            return
        dZ = Z - self.z_star
        term_z = float(np.sum(dZ * (self.Wt @ dZ)))
        dQ = self.U @ self.sum_Z - self.Q_star
        term_q = float(np.sum(dQ * dQ))
        D = sum((2.0 / st.q) * st.table.distance_to(tg)
                for st, tg in zip(states, self.targets))
        self.history.append((t, term_z + term_q + self.c * D))


# ---------------------------------------------------------------------------
# engines


def _make_states(problem: Problem, alpha: float, seed: int, z0: np.ndarray,
                 newton_iters: int) -> list[NodeState]:
    return [make_node(n, ops_n, alpha, problem.lam, z0, seed, newton_iters)
            for n, ops_n in enumerate(problem.ops)]


def _run_dense_generic(states: list[NodeState], mix: MixingMatrix, rounds: int,
                       variant: str, on_round) -> np.ndarray:
    step = dsba_node_step if variant == "dsba" else dsa_node_step
    Z = np.stack([s.z for s in states])
    Zp = Z.copy()
    for t in range(rounds):
        mixed_all = mix.W @ Z if t == 0 else mix.Wt @ (2.0 * Z - Zp)
        Znew = np.empty_like(Z)
        for n, state in enumerate(states):
            Znew[n], _, _ = step(state, mixed_all[n])
        Zp, Z = Z, Znew
        if on_round(t, Z):
            break
    return Z


def _run_pointsaga(state: NodeState, rounds: int, on_round) -> np.ndarray:
    for t in range(rounds):
        z_next, _, _ = pointsaga_step(state)
        if on_round(t, z_next[None, :]):
            break
    return state.z[None, :]


def _run_extra(problem: Problem, mix: MixingMatrix, rounds: int, alpha: float,
               z0: np.ndarray, on_round, fast: bool) -> np.ndarray:
    N = problem.n_nodes
    Z = np.tile(z0, (N, 1))
    if fast:
        X = np.stack([np.stack([_densify(s, problem.dim) for s in shard])
                      for shard in problem.shards.per_node])
        Y = np.stack([np.array([s.label for s in shard])
                      for shard in problem.shards.per_node])
        M = np.einsum("nqi,nqj->nij", X, X) / X.shape[1]
        b = np.einsum("nqi,nq->ni", X, Y) / X.shape[1]

        def G_of(Zm):
            return np.matmul(M, Zm[:, :, None])[:, :, 0] - b + problem.lam * Zm
    else:
        def G_of(Zm):
            return np.stack([local_mean_operator(ops_n, Zm[n], problem.lam)
                             for n, ops_n in enumerate(problem.ops)])
    G = G_of(Z)
    Zp, Gp = Z, G
    for t in range(rounds):
        Znew = extra_round(Z, Zp, G, Gp, mix.W, mix.Wt, alpha, t)
        Zp, Z = Z, Znew
        Gp, G = G, G_of(Z)
        if on_round(t, Z):
            break
    return Z


def _densify(s: ds.Sample, dim: int) -> np.ndarray:
    out = np.zeros(dim)
    out[s.indices] = s.values
    return out


def _run_fast_ridge(problem: Problem, mix: MixingMatrix, rounds: int,
                    alpha: float, seed: int, z0: np.ndarray, variant: str,
                    on_round) -> np.ndarray:
    """Vectorized dense engine for ridge: one numpy round over all nodes.

    Follows the same per-node rng streams and update order as the generic
    engine.  The whole round is computed in extended precision with a mixing
    matrix rebuilt from the integer Laplacian, so that its row sums hold to
    extended accuracy: a 1e-16 row-sum defect acts as a constant forcing on
    the weakly damped consensus direction and grows linearly with the round
    count, capping the attainable suboptimality orders of magnitude above
    the extended-precision floor."""
    f = np.longdouble
    N, d, lam = problem.n_nodes, problem.dim, f(problem.lam)
    q = problem.shards.q_min
    X = np.stack([np.stack([_densify(s, d) for s in shard])
                  for shard in problem.shards.per_node]).astype(f)
    Y = np.stack([np.array([s.label for s in shard])
                  for shard in problem.shards.per_node]).astype(f)
    na2 = np.einsum("nqd,nqd->nq", X, X)
    deg = mix.adjacency.sum(axis=1)
    Lap = (np.diag(deg) - mix.adjacency).astype(f)
    W = np.eye(N, dtype=f) - Lap / f(mix.tau)
    Wt = (W + np.eye(N, dtype=f)) / 2.0
    al = f(alpha)
    rngs = [np.random.default_rng([seed, n]) for n in range(N)]
    Z = np.tile(z0.astype(f), (N, 1))
    Zp = Z.copy()
    # table of scalar coefficients: phi_{n,i} = coef[n,i] * a_{n,i}
    coef = np.einsum("nqd,d->nq", X, Z[0]) - Y
    phibar = np.einsum("nq,nqd->nd", coef, X) / q
    dprev = np.zeros((N, d), dtype=f)
    rho = f(1) / (f(1) + lam * al)
    aa = rho * al
    rows = np.arange(N)
    for t in range(rounds):
        i = np.array([rng.integers(q) for rng in rngs])
        A = X[rows, i]
        y = Y[rows, i]
        c = coef[rows, i]
        n2 = na2[rows, i]
        mixv = W @ Z if t == 0 else Wt @ (2.0 * Z - Zp)
        if variant == "dsba":
            if t == 0:
                psi = mixv + al * (c[:, None] * A - phibar)
            else:
                psi = (mixv + al * ((q - 1.0) / q * dprev + c[:, None] * A)
                       + (al * lam) * Z)
            ps = rho * psi
            s = (np.einsum("nd,nd->n", ps, A) + aa * n2 * y) / (1.0 + aa * n2)
            Znew = ps - (aa * (s - y))[:, None] * A
            newcoef = np.einsum("nd,nd->n", Znew, A) - y
            delta = (newcoef - c)[:, None] * A
        else:  # dsa
            newcoef = np.einsum("nd,nd->n", Z, A) - y
            delta = (newcoef - c)[:, None] * A
            if t == 0:
                Znew = mixv - al * (phibar + lam * Z)
            else:
                Znew = (mixv + al * ((q - 1.0) / q * dprev - delta)
                        - (al * lam) * (Z - Zp))
        phibar += delta / q
        coef[rows, i] = newcoef
        dprev = delta
        Zp, Z = Z, Znew
        if on_round(t, Z.astype(np.float64)):
            break
    return Z.astype(np.float64)


# ---------------------------------------------------------------------------
# run


def _load_shards(config: RunConfig) -> ds.Shards:
    if config.dataset_path is not None:
        with open(config.dataset_path, "rb") as fh:
            samples, d = ds.parse_libsvm(fh)
        samples = ds.normalize_rows(samples)
        return ds.partition(samples, config.n_nodes, config.seed, d=d)
    samples = synthetic_samples(config.synthetic)
    return ds.partition(samples, config.n_nodes, config.seed, d=config.synthetic.d)


def _pick_engine(config: RunConfig, problem: Problem) -> str:
    shard_sizes = {len(ops) for ops in problem.ops}
    fast_ok = (config.comm == "dense" and problem.family == "ridge"
               and config.variant in ("dsba", "dsa") and len(shard_sizes) == 1
               and not config.track_lyapunov)
    if config.engine == "fast":
        if not fast_ok:
            raise ConfigError("fast engine requires dense ridge dsba/dsa with "
                              "equal shards and no lyapunov tracking")
        return "fast"
    if config.engine == "generic":
        return "generic"
    return "fast" if fast_ok else "generic"


def run(config: RunConfig) -> RunResult:
    config.validate()
    t_start = time.perf_counter()
    shards = _load_shards(config)
    lam = config.lam if config.lam is not None else ds.default_lambda(shards)
    problem = build_problem(shards, config.family, lam)
    adjacency = make_adjacency(config.topology, config.n_nodes,
                               p=config.edge_prob, seed=config.graph_seed)
    tau = None
    if config.tau_scale != 1.0:
        tau = config.tau_scale * float(np.linalg.eigvalsh(laplacian(adjacency))[-1])
    mix = build_mixing(adjacency, tau)
    L = max_lipschitz(problem)
    alpha = config.alpha if config.alpha is not None else step_size_bound(L)
    z_star, z_resid = reference_solution(problem)
    z0 = np.zeros(problem.dim)

    Z_star_tile = np.tile(z_star, (config.n_nodes, 1))
    Z0 = np.tile(z0, (config.n_nodes, 1))
    denom = max(float(np.linalg.norm(Z0 - Z_star_tile)), 1e-300)
    metric_every = config.metric_every or shards.q_min
    metrics = MetricsLog()
    trajectory: list[np.ndarray] | None = None
    if config.record_trajectory:
        trajectory = [Z0.copy()]
    net_holder: dict = {}

    def c_max_at(t: int) -> int:
        if "net" in net_holder:
            return int(net_holder["net"].received_doubles().max())
        degrees = adjacency.sum(axis=1)
        if config.n_nodes == 1:
            return 0
        return int(degrees.max() * problem.dim * (t + 1))

    def passes(t: int) -> float:
        if config.variant == "extra":
            return float(t + 1)
        return (t + 1) / shards.q_min

    def record(t: int, Z: np.ndarray) -> None:
        subopt = float(np.linalg.norm(Z - Z_star_tile)) / denom
        if not config.compute_score:
            score = float("nan")
        elif problem.family == "auc":
            w_mean = Z.mean(axis=0)[: shards.d]
            try:
                score = auc_score(w_mean, [s for sh in shards.per_node for s in sh])
            except ConfigError:
                score = float("nan")
        else:
            score = objective(problem, Z.mean(axis=0))
        metrics.rows.append(MetricsRow(t + 1, passes(t), subopt, score,
                                       c_max_at(t), time.perf_counter() - t_start))

    # initialization row (round 0)
    init_score = float("nan")
    if config.compute_score and problem.family != "auc":
        init_score = objective(problem, z0)
    metrics.rows.append(MetricsRow(
        0, 0.0, 1.0 if denom > 1e-299 else 0.0, init_score,
        0, time.perf_counter() - t_start))

    states: list[NodeState] = []
    tracker: LyapunovTracker | None = None
    if config.track_lyapunov:
        tracker = LyapunovTracker(mix, problem, z_star, alpha, L,
                                  every=config.lyapunov_every)

    stop = config.stop_subopt

    def on_round(t: int, Z: np.ndarray) -> bool:
        if trajectory is not None:
            trajectory.append(Z.copy())
        if tracker is not None:
            tracker.update(t + 1, Z, states)
        last = t + 1 == config.rounds
        if (t + 1) % metric_every == 0 or last:
            record(t, Z)
            if stop is not None and metrics.rows[-1].subopt <= stop:
                return True
        return False

    engine = _pick_engine(config, problem)

    def start_states() -> list[NodeState]:
        nonlocal states
        states = _make_states(problem, alpha, config.seed, z0, config.newton_iters)
        if tracker is not None:
            tracker.update(0, Z0, states)
        return states

    if config.rounds == 0:
        Z_final = Z0
    elif config.comm == "sparse":
        Z_final, net = run_sparse(start_states(), mix, config.rounds,
                                  variant=config.variant, on_round=on_round,
                                  net_hook=lambda n: net_holder.__setitem__("net", n))
    elif config.variant == "extra":
        fast = problem.family == "ridge" and engine != "generic" \
            and len({len(ops) for ops in problem.ops}) == 1
        Z_final = _run_extra(problem, mix, config.rounds, alpha, z0, on_round, fast)
    elif config.variant == "pointsaga":
        Z_final = _run_pointsaga(start_states()[0], config.rounds, on_round)
    elif engine == "fast":
        Z_final = _run_fast_ridge(problem, mix, config.rounds, alpha,
                                  config.seed, z0, config.variant, on_round)
    else:
        Z_final = _run_dense_generic(start_states(), mix, config.rounds,
                                     config.variant, on_round)

    gamma = mix.gamma
    manifest = {
        "config": _config_dict(config),
        "engine": engine,
        "alpha": alpha,
        "lambda": lam,
        "lipschitz": L,
        "gamma": gamma,
        "graph_edges": int(adjacency.sum() // 2),
        "q_min": shards.q_min,
        "Q": shards.Q,
        "p_positive": shards.p,
        "rho": shards.rho,
        "z_star_residual": z_resid,
        "shards": ds.shard_manifest(shards),
        "numpy": np.__version__,
    }
    return RunResult(
        config=config, metrics=metrics, z_final=Z_final, z_star=z_star,
        z_star_residual=z_resid, alpha=alpha, lam=lam, mix=mix, problem=problem,
        manifest=manifest,
        lyapunov=tracker.history if tracker else None,
        trajectory=trajectory,
        comm_per_round=net_holder["net"].round_values if "net" in net_holder else None,
        received_doubles=(net_holder["net"].received_doubles()
                          if "net" in net_holder else None),
    )


def _config_dict(config: RunConfig) -> dict:
    out = asdict(config)
    return out


def manifest_json(result: RunResult) -> str:
    return json.dumps(result.manifest, indent=2, sort_keys=True)
