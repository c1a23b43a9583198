"""Random-walk corpora (DeepWalk / Node2Vec) and skip-gram embeddings.

Walks follow out-edges of the homogeneous graph unless ``undirected`` is set.
Each start node draws from its own generator seeded by ``(seed, node index)``,
so the corpus does not depend on iteration order or worker count.

The trainer is word2vec-style SGNS: dynamic window, unigram^0.75 negative
table, linear learning-rate decay. It runs in a numba kernel; the single
worker path is bitwise reproducible for a fixed seed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import EmptyCorpus
from .graph import IN, OUT, HomGraph
from .matrix import FeatureMatrix
from .records import EdgeType

PQ_GRID = (0.5, 1.0, 2.0)


@dataclass
class WalkConfig:
    walks_per_node: int = 5
    walk_length: int = 50
    strategy: str = "uniform"
    p: float = 1.0
    q: float = 1.0
    seed: int = 0
    undirected: bool = False

    def __post_init__(self):
        self.strategy = {"deepwalk": "uniform"}.get(self.strategy.lower(), self.strategy.lower())
        if self.strategy not in ("uniform", "node2vec"):
            raise ValueError(f"unknown walk strategy {self.strategy!r}")
        if self.walks_per_node < 1 or self.walk_length < 1:
            raise ValueError("walks_per_node and walk_length must be >= 1")
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")


@dataclass
class SkipGramConfig:
    dim: int = 128
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.negatives < 1 or self.epochs < 1:
            raise ValueError("dim, window, negatives and epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def _neighbor_lists(g: HomGraph, undirected: bool) -> list[np.ndarray]:
    out = []
    for i in range(g.n_nodes):
        nb = g.neighbor_index(i, EdgeType.TRANS, OUT)
        if undirected:
            nb = np.union1d(nb, g.neighbor_index(i, EdgeType.TRANS, IN))
        out.append(nb)
    return out


def _node2vec_weights(prev_nbrs: np.ndarray, prev: int, cur_nbrs: np.ndarray, p: float, q: float) -> np.ndarray:
    w = np.full(len(cur_nbrs), 1.0 / q)
    w[np.isin(cur_nbrs, prev_nbrs, assume_unique=True)] = 1.0
    w[cur_nbrs == prev] = 1.0 / p
    return w


def generate_walks(g: HomGraph, cfg: WalkConfig) -> list[list[str]]:
    """``walks_per_node`` walks from every node, grouped by pass then node index.

    Walks stop early at a node with no outgoing edge; an isolated node yields
    the one-node walk ``[node]``.
    """
    nbrs = _neighbor_lists(g, cfg.undirected)
    # node2vec "distance 1" test: x adjacent to the previous node in either direction
    adj = nbrs if cfg.undirected or cfg.strategy == "uniform" else _neighbor_lists(g, True)
    n = g.n_nodes
    per_node: list[list[list[int]]] = []
    for start in range(n):
        rng = np.random.default_rng([cfg.seed, start])
        walks = []
        for _ in range(cfg.walks_per_node):
            u = rng.random(cfg.walk_length)
            walk = [start]
            for step in range(1, cfg.walk_length):
                cur = walk[-1]
                cand = nbrs[cur]
                if len(cand) == 0:
                    break
                if cfg.strategy == "uniform" or len(walk) == 1:
                    nxt = cand[int(u[step] * len(cand))]
                else:
                    w = _node2vec_weights(adj[walk[-2]], walk[-2], cand, cfg.p, cfg.q)
                    cum = np.cumsum(w)
                    nxt = cand[min(int(np.searchsorted(cum, u[step] * cum[-1], side="right")), len(cand) - 1)]
                walk.append(int(nxt))
            walks.append(walk)
        per_node.append(walks)
    ids = g.ids
    return [[ids[j] for j in per_node[s][r]] for r in range(cfg.walks_per_node) for s in range(n)]


# -- skip-gram ---------------------------------------------------------------

_TABLE_SIZE = 1_000_000


@numba.njit(cache=True)
def _lcg(state):
    return state * np.uint64(25214903917) + np.uint64(11)


@numba.njit(cache=True)
def _sgns_pass(tokens, starts, ends, syn0, syn1, table, window, negatives,
               lr0, done0, total, seed, losses):
    """One epoch over walks ``[starts[k], ends[k])``; returns tokens processed."""
    dim = syn0.shape[1]
    state = np.uint64(seed)
    grad = np.zeros(dim)
    done = done0
    loss_sum = 0.0
    n_pairs = 0
    for k in range(len(starts)):
        s, e = starts[k], ends[k]
        for pos in range(s, e):
            lr = lr0 * max(1.0 - done / (total + 1.0), 0.0001)
            done += 1
            center = tokens[pos]
            state = _lcg(state)
            b = np.int64((state >> np.uint64(16)) % np.uint64(window))
            lo = max(s, pos - window + b)
            hi = min(e, pos + window - b + 1)
            for cpos in range(lo, hi):
                if cpos == pos:
                    continue
                ctx = tokens[cpos]
                grad[:] = 0.0
                for d in range(negatives + 1):
                    if d == 0:
                        target = center
                        label = 1.0
                    else:
                        state = _lcg(state)
                        target = table[np.int64((state >> np.uint64(16)) % np.uint64(len(table)))]
                        if target == center:
                            continue
                        label = 0.0
                    f = 0.0
                    for j in range(dim):
                        f += syn0[ctx, j] * syn1[target, j]
                    if f > 30.0:
                        sig = 1.0
                    elif f < -30.0:
                        sig = 0.0
                    else:
                        sig = 1.0 / (1.0 + np.exp(-f))
                    if label == 1.0:
                        loss_sum -= np.log(max(sig, 1e-12))
                    else:
                        loss_sum -= np.log(max(1.0 - sig, 1e-12))
                    g = (label - sig) * lr
                    for j in range(dim):
                        grad[j] += g * syn1[target, j]
                        syn1[target, j] += g * syn0[ctx, j]
                for j in range(dim):
                    syn0[ctx, j] += grad[j]
                n_pairs += 1
    losses[0] += loss_sum
    losses[1] += n_pairs
    return done


@numba.njit(cache=True, parallel=True)
def _sgns_parallel(tokens, starts, ends, syn0, syn1, table, window, negatives,
                   lr0, done0, total, seed, losses, workers):
    chunk = (len(starts) + workers - 1) // workers
    part = np.zeros((workers, 2))
    for w in numba.prange(workers):
        lo = w * chunk
        hi = min(len(starts), lo + chunk)
        if lo < hi:
            _sgns_pass(tokens, starts[lo:hi], ends[lo:hi], syn0, syn1, table, window,
                       negatives, lr0, done0, total, seed + np.uint64(w) * np.uint64(7919), part[w])
    losses[0] += part[:, 0].sum()
    losses[1] += part[:, 1].sum()
    return done0 + (ends - starts).sum()


@dataclass
class SkipGramModel:
    embeddings: FeatureMatrix
    loss_history: list[float] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.loss_history[-1] if self.loss_history else float("nan")


def train_skipgram(corpus, cfg: SkipGramConfig = SkipGramConfig()) -> SkipGramModel:
    """Train SGNS embeddings; one row per distinct token, in first-seen order."""
    vocab: dict[str, int] = {}
    flat: list[int] = []
    bounds: list[int] = [0]
    for walk in corpus:
        for tok in walk:
            flat.append(vocab.setdefault(tok, len(vocab)))
        bounds.append(len(flat))
    if not flat:
        raise EmptyCorpus("cannot train on an empty corpus")
    tokens = np.asarray(flat, dtype=np.int64)
    b = np.asarray(bounds, dtype=np.int64)
    starts, ends = b[:-1], b[1:]
    counts = np.bincount(tokens, minlength=len(vocab)).astype(float)
    freq = counts**0.75
    cum = np.cumsum(freq / freq.sum())
    table = np.searchsorted(cum, (np.arange(_TABLE_SIZE) + 0.5) / _TABLE_SIZE).astype(np.int64)
    table = np.minimum(table, len(vocab) - 1)
    rng = np.random.default_rng(cfg.seed)
    syn0 = (rng.random((len(vocab), cfg.dim)) - 0.5) / cfg.dim
    syn1 = np.zeros((len(vocab), cfg.dim))
    total = float(len(tokens) * cfg.epochs)
    done = 0
    history = []
    for epoch in range(cfg.epochs):
        losses = np.zeros(2)
        seed = np.uint64((cfg.seed * 1_000_003 + epoch * 7_777_777 + 1) % (2**63))
        if cfg.workers > 1:
            done = _sgns_parallel(tokens, starts, ends, syn0, syn1, table, cfg.window, cfg.negatives,
                                  cfg.learning_rate, done, total, seed, losses, cfg.workers)
        else:
            done = _sgns_pass(tokens, starts, ends, syn0, syn1, table, cfg.window, cfg.negatives,
                              cfg.learning_rate, done, total, seed, losses)
        history.append(losses[0] / max(losses[1], 1.0))
    ids = [None] * len(vocab)
    for tok, j in vocab.items():
        ids[j] = tok
    return SkipGramModel(FeatureMatrix(ids, syn0, "e"), history)


def embed_graph(g: HomGraph, walk_cfg: WalkConfig, sg_cfg: SkipGramConfig,
                normalize: bool = False) -> tuple[FeatureMatrix, dict]:
    """Walk + train, returning one row per graph node (zeros for nodes absent from the corpus)."""
    corpus = generate_walks(g, walk_cfg)
    model = train_skipgram(corpus, sg_cfg)
    values = np.zeros((g.n_nodes, sg_cfg.dim))
    emb = model.embeddings
    missing = []
    for i, a in enumerate(g.ids):
        if a in emb:
            values[i] = emb.row(a)
        else:
            missing.append(a)
    if normalize:
        norms = np.linalg.norm(values, axis=1, keepdims=True)
        values = np.divide(values, norms, out=np.zeros_like(values), where=norms > 0)
    diag = {"n_walks": len(corpus), "missing": missing, "loss_history": model.loss_history}
    return FeatureMatrix(list(g.ids), values, "e"), diag


def select_best(table: list[dict]) -> tuple[float, float]:
    """Argmax of ``score``; ties go to the smaller p, then the smaller q."""
    best = None
    for row in sorted(table, key=lambda r: (r["p"], r["q"])):
        if best is None or row["score"] > best["score"]:
            best = row
    return best["p"], best["q"]


def grid_pq(g: HomGraph, ids, y, walk_cfg: WalkConfig, sg_cfg: SkipGramConfig,
            evaluate, grid=PQ_GRID) -> tuple[tuple[float, float], list[dict]]:
    """Node2Vec grid over ``grid x grid``.

    ``evaluate(FeatureMatrix restricted to ids, y) -> float`` scores each
    embedding, typically the mean CV micro-F1 from :mod:`hfaug.mlkit`.
    """
    table = []
    for p, q in itertools.product(grid, grid):
        wc = WalkConfig(walk_cfg.walks_per_node, walk_cfg.walk_length, "node2vec", p, q,
                        walk_cfg.seed, walk_cfg.undirected)
        emb, _ = embed_graph(g, wc, sg_cfg)
        table.append({"p": p, "q": q, "score": float(evaluate(emb.select(ids), y))})
    return select_best(table), table
