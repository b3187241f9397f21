"""Five node-importance metrics over weighted interaction graphs.

Closeness and betweenness read edge weight as path length, so they reward
nodes reachable through light edges; degree, PageRank and eigenvector read
weight as volume, rewarding heavy edges.  Closeness, betweenness, degree
and eigenvector operate on the symmetrized graph, PageRank on the directed
one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Iterable, Sequence

from .errors import ConvergenceError, DomainError, GridhotError
from .graph import WeightedGraph, symmetrize

METRICS = ("closeness", "betweenness", "degree", "pagerank", "eigenvector")

PAGERANK_VARIANTS = ("weighted", "literal")

# two path lengths within this relative tolerance count as equal
PATH_TIE_REL_TOL = 1e-9

INF = math.inf


@dataclass(frozen=True)
class CentralityParams:
    """Solver settings shared by the iterative metrics."""

    damping: float = 0.85
    tol: float = 1e-12
    max_iter: int = 10_000
    pagerank_variant: str = "weighted"


@dataclass(frozen=True)
class CentralityScores:
    """Per-node scores for one metric, plus the parameters that produced them."""

    metric: str
    scores: dict[int, float]
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ShortestPathTable:
    """All-pairs shortest distances and shortest-path counts.

    Unreachable pairs carry ``dist == inf`` and ``sigma == 0``.
    """

    dist: dict[tuple[int, int], float]
    sigma: dict[tuple[int, int], int]


def _tie(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=PATH_TIE_REL_TOL)


def _require_undirected(g: WeightedGraph, metric: str) -> None:
    if g.directed:
        raise DomainError(f"{metric} needs an undirected graph; symmetrize first")


def _single_source(
    adj: dict[int, list[tuple[int, float]]], source: int
) -> tuple[dict[int, float], dict[int, int], dict[int, list[int]], list[int]]:
    """Dijkstra with shortest-path counting from one source.

    Returns (dist, sigma, predecessors, settle order).  Lengths within
    ``PATH_TIE_REL_TOL`` relative tolerance are treated as equal.
    """
    dist = {v: INF for v in adj}
    sigma = {v: 0 for v in adj}
    preds: dict[int, list[int]] = {v: [] for v in adj}
    dist[source] = 0.0
    sigma[source] = 1
    order: list[int] = []
    settled: set[int] = set()
    heap: list[tuple[float, int]] = [(0.0, source)]
    while heap:
        d, u = heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        order.append(u)
        for v, weight in adj[u]:
            if v in settled:
                continue
            candidate = d + weight
            if candidate < dist[v] and not _tie(candidate, dist[v]):
                dist[v] = candidate
                sigma[v] = sigma[u]
                preds[v] = [u]
                heappush(heap, (candidate, v))
            elif _tie(candidate, dist[v]):
                sigma[v] += sigma[u]
                preds[v].append(u)
    return dist, sigma, preds, order


def shortest_paths(g: WeightedGraph) -> ShortestPathTable:
    """All-pairs weighted shortest paths, treating edge weight as length.

    Each pair's entry comes from the run rooted at its smaller endpoint and
    is mirrored, so the table is exactly symmetric despite floating-point
    accumulation order differing between sources.
    """
    _require_undirected(g, "shortest_paths")
    adj = g.adjacency()
    dist: dict[tuple[int, int], float] = {}
    sigma: dict[tuple[int, int], int] = {}
    for source in g.nodes:
        d, s, _, _ = _single_source(adj, source)
        for v in g.nodes:
            if source <= v:
                dist[(source, v)] = dist[(v, source)] = d[v]
                sigma[(source, v)] = sigma[(v, source)] = s[v]
    return ShortestPathTable(dist=dist, sigma=sigma)


def closeness(g: WeightedGraph) -> CentralityScores:
    """Reciprocal of the summed shortest-path distances to all other nodes.

    On a disconnected graph each node's sum runs over its reachable set and
    the result is flagged ``on_component``; a node reaching nothing scores 0.
    """
    _require_undirected(g, "closeness")
    if g.n < 2:
        raise DomainError("closeness needs at least 2 nodes")
    adj = g.adjacency()
    scores: dict[int, float] = {}
    on_component = False
    for x in g.nodes:
        dist, _, _, _ = _single_source(adj, x)
        reachable = [d for v, d in dist.items() if v != x and d < INF]
        if len(reachable) < g.n - 1:
            on_component = True
        scores[x] = 0.0 if not reachable else 1.0 / math.fsum(reachable)
    return CentralityScores(
        metric="closeness",
        scores=scores,
        params={"on_component": on_component, "tie_rel_tol": PATH_TIE_REL_TOL},
    )


def betweenness(g: WeightedGraph) -> CentralityScores:
    """Sum over node pairs of the fraction of shortest paths through a node.

    Each unordered pair {s, t} counts once and only interior vertices score;
    unreachable pairs contribute nothing.  Uses stack-based dependency
    accumulation over the shortest-path DAG of every source.
    """
    _require_undirected(g, "betweenness")
    if g.n < 3:
        raise DomainError("betweenness needs at least 3 nodes")
    adj = g.adjacency()
    scores = {v: 0.0 for v in g.nodes}
    for s in g.nodes:
        _, sigma, preds, order = _single_source(adj, s)
        delta = {v: 0.0 for v in g.nodes}
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                scores[w] += delta[w]
    # each unordered pair was accumulated from both endpoints
    scores = {v: value / 2.0 for v, value in scores.items()}
    return CentralityScores(
        metric="betweenness", scores=scores, params={"tie_rel_tol": PATH_TIE_REL_TOL}
    )


def degree(g: WeightedGraph) -> CentralityScores:
    """Weighted degree: the sum of incident edge weights (node strength)."""
    _require_undirected(g, "degree")
    adj = g.adjacency()
    scores = {v: math.fsum(weight for _, weight in adj[v]) for v in g.nodes}
    return CentralityScores(metric="degree", scores=scores, params={})


def _pagerank_structure(g: WeightedGraph, variant: str):
    out_weight = {u: 0.0 for u in g.nodes}
    out_count = {u: 0 for u in g.nodes}
    for (u, _), weight in g.edges.items():
        out_weight[u] += weight
        out_count[u] += 1
    in_shares: dict[int, list[tuple[int, float]]] = {u: [] for u in g.nodes}
    for (u, v), weight in sorted(g.edges.items()):
        share = weight / out_weight[u] if variant == "weighted" else 1.0 / out_count[u]
        in_shares[v].append((u, share))
    dangling = tuple(u for u in g.nodes if out_count[u] == 0)
    return in_shares, dangling


def pagerank_iterates(
    g: WeightedGraph, damping: float = 0.85, variant: str = "weighted"
) -> Iterable[dict[int, float]]:
    """Yield successive score maps of the damped random-walk update.

    Every iterate sums to 1: teleportation contributes ``(1 - damping) / n``
    per node and dangling nodes spread their mass uniformly.
    """
    if not 0.0 < damping < 1.0:
        raise DomainError(f"damping must lie strictly in (0, 1), got {damping}")
    if variant not in PAGERANK_VARIANTS:
        raise DomainError(f"pagerank variant must be one of {PAGERANK_VARIANTS}, got {variant!r}")
    n = g.n
    if n == 0:
        raise DomainError("pagerank needs a nonempty graph")
    in_shares, dangling = _pagerank_structure(g, variant)
    ranks = {u: 1.0 / n for u in g.nodes}
    while True:
        dangling_mass = math.fsum(ranks[u] for u in dangling)
        base = (1.0 - damping) / n + damping * dangling_mass / n
        ranks = {
            x: base + damping * math.fsum(ranks[y] * share for y, share in in_shares[x])
            for x in g.nodes
        }
        yield ranks


def pagerank(
    g: WeightedGraph,
    damping: float = 0.85,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    variant: str = "weighted",
) -> CentralityScores:
    """Damped random-walk scores with teleportation, normalized to sum 1.

    The ``weighted`` variant spreads a node's mass over its successors in
    proportion to outgoing edge weight; the ``literal`` variant splits it
    evenly across out-neighbours.  Stops when the L1 change drops to ``tol``;
    raises :class:`ConvergenceError` after ``max_iter`` iterations.
    """
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    previous = {u: 1.0 / g.n for u in g.nodes} if g.n else {}
    iterations = 0
    residual = INF
    for ranks in pagerank_iterates(g, damping=damping, variant=variant):
        iterations += 1
        residual = math.fsum(abs(ranks[u] - previous[u]) for u in g.nodes)
        previous = ranks
        if residual <= tol:
            return CentralityScores(
                metric="pagerank",
                scores=ranks,
                params={
                    "damping": damping,
                    "tol": tol,
                    "max_iter": max_iter,
                    "variant": variant,
                    "iterations": iterations,
                },
            )
        if iterations >= max_iter:
            break
    raise ConvergenceError(
        f"pagerank did not converge within {max_iter} iterations (residual {residual:.3e})",
        residual=residual,
        iterations=iterations,
    )


def _is_connected(g: WeightedGraph) -> bool:
    if g.n <= 1:
        return True
    adj = g.adjacency()
    seen = {g.nodes[0]}
    stack = [g.nodes[0]]
    while stack:
        u = stack.pop()
        for v, _ in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == g.n


def eigenvector(
    g: WeightedGraph, tol: float = 1e-12, max_iter: int = 10_000
) -> CentralityScores:
    """Principal eigenvector of the weighted adjacency matrix (norm 1).

    Power iteration from the uniform vector on the unit-shifted matrix
    ``A + I``: the shift keeps the principal eigenvector while making it
    strictly dominant, so near-bipartite graphs do not oscillate.  The
    reported ``lambda`` is the Rayleigh quotient of ``A`` at the result.
    """
    _require_undirected(g, "eigenvector")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if g.n == 0:
        raise DomainError("eigenvector needs a nonempty graph")
    if not _is_connected(g):
        raise DomainError(
            "eigenvector centrality needs a connected graph; got multiple components"
        )
    adj = g.adjacency()
    x = {u: 1.0 / math.sqrt(g.n) for u in g.nodes}
    iterations = 0
    delta = INF
    while iterations < max_iter:
        iterations += 1
        y = {u: x[u] + math.fsum(weight * x[v] for v, weight in adj[u]) for u in g.nodes}
        norm = math.sqrt(math.fsum(value * value for value in y.values()))
        new_x = {u: y[u] / norm for u in g.nodes}
        delta = math.sqrt(math.fsum((new_x[u] - x[u]) ** 2 for u in g.nodes))
        x = new_x
        if delta <= tol:
            ax = {u: math.fsum(weight * x[v] for v, weight in adj[u]) for u in g.nodes}
            lam = math.fsum(x[u] * ax[u] for u in g.nodes)
            return CentralityScores(
                metric="eigenvector",
                scores=x,
                params={"lambda": lam, "tol": tol, "max_iter": max_iter, "iterations": iterations},
            )
    raise ConvergenceError(
        f"eigenvector iteration did not converge within {max_iter} iterations (delta {delta:.3e})",
        residual=delta,
        iterations=iterations,
    )


def compute_all(
    g: WeightedGraph,
    params: CentralityParams | None = None,
    metrics: Sequence[str] | None = None,
) -> tuple[dict[str, CentralityScores], dict[str, GridhotError]]:
    """Compute the requested metrics, symmetrizing internally where needed.

    Returns ``(results, failures)``: metrics whose preconditions fail (for
    example betweenness on a 2-node graph) land in ``failures`` keyed by
    metric name while the rest still succeed.
    """
    params = params or CentralityParams()
    requested = tuple(metrics) if metrics is not None else METRICS
    for name in requested:
        if name not in METRICS:
            raise DomainError(f"unknown metric {name!r}; expected one of {METRICS}")
    undirected = symmetrize(g) if g.directed else g
    results: dict[str, CentralityScores] = {}
    failures: dict[str, GridhotError] = {}
    for name in METRICS:
        if name not in requested:
            continue
        try:
            if name == "closeness":
                results[name] = closeness(undirected)
            elif name == "betweenness":
                results[name] = betweenness(undirected)
            elif name == "degree":
                results[name] = degree(undirected)
            elif name == "pagerank":
                results[name] = pagerank(
                    g,
                    damping=params.damping,
                    tol=params.tol,
                    max_iter=params.max_iter,
                    variant=params.pagerank_variant,
                )
            else:
                results[name] = eigenvector(
                    undirected, tol=params.tol, max_iter=params.max_iter
                )
        except (DomainError, ConvergenceError) as exc:
            failures[name] = exc
    return results, failures


def rank(scores: CentralityScores) -> list[tuple[int, float]]:
    """Order nodes by descending score, ties broken by ascending cell id."""
    return sorted(scores.scores.items(), key=lambda item: (-item[1], item[0]))


def scores_csv_rows(all_scores: Iterable[CentralityScores]) -> list[tuple[int, str, float]]:
    """Flatten score maps into (cell_id, metric, score) rows."""
    rows = []
    for result in all_scores:
        for cell in sorted(result.scores):
            rows.append((cell, result.metric, result.scores[cell]))
    return rows


def scores_json_obj(all_scores: Iterable[CentralityScores]) -> dict:
    """JSON-ready representation with parameters echoed per metric."""
    return {
        "metrics": [
            {
                "metric": result.metric,
                "params": dict(result.params),
                "scores": {str(cell): result.scores[cell] for cell in sorted(result.scores)},
            }
            for result in all_scores
        ]
    }
