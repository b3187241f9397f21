"""Independent reference implementations used only to check results.

Deliberately different algorithm families from the package: Floyd-Warshall
plus exhaustive path enumeration instead of Dijkstra/dependency
accumulation, a dense linear solve instead of power iteration for
PageRank, and a dense eigendecomposition for the eigenvector metric.
"""

from __future__ import annotations

import math
import random

import numpy as np

from gridhot.graph import WeightedGraph

INF = math.inf
TIE_REL_TOL = 1e-9


def undirected_graph(nodes, weighted_pairs) -> WeightedGraph:
    edges = {}
    for u, v, w in weighted_pairs:
        edges[(u, v)] = w
        edges[(v, u)] = w
    return WeightedGraph(nodes=tuple(sorted(nodes)), edges=edges, directed=False)


def random_connected_graph(rng: random.Random, n: int, extra_edge_prob: float = 0.4,
                           w_lo: float = 0.1, w_hi: float = 10.0) -> WeightedGraph:
    """Random spanning tree plus extra edges, weights uniform in [w_lo, w_hi]."""
    nodes = list(range(1, n + 1))
    rng.shuffle(nodes)
    pairs = []
    for i in range(1, n):
        pairs.append((nodes[i], nodes[rng.randrange(i)], rng.uniform(w_lo, w_hi)))
    present = {(min(u, v), max(u, v)) for u, v, _ in pairs}
    for i in range(n):
        for j in range(i + 1, n):
            key = (min(nodes[i], nodes[j]), max(nodes[i], nodes[j]))
            if key not in present and rng.random() < extra_edge_prob:
                pairs.append((key[0], key[1], rng.uniform(w_lo, w_hi)))
    return undirected_graph(range(1, n + 1), pairs)


def random_directed_graph(rng: random.Random, n: int, edge_prob: float = 0.35,
                          w_lo: float = 0.1, w_hi: float = 10.0) -> WeightedGraph:
    nodes = tuple(range(1, n + 1))
    edges = {}
    for u in nodes:
        for v in nodes:
            if u != v and rng.random() < edge_prob:
                edges[(u, v)] = rng.uniform(w_lo, w_hi)
    return WeightedGraph(nodes=nodes, edges=edges, directed=True)


def floyd_warshall(g: WeightedGraph) -> dict[tuple[int, int], float]:
    dist = {(u, v): INF for u in g.nodes for v in g.nodes}
    for u in g.nodes:
        dist[(u, u)] = 0.0
    for (u, v), w in g.edges.items():
        dist[(u, v)] = min(dist[(u, v)], w)
    for k in g.nodes:
        for i in g.nodes:
            for j in g.nodes:
                through = dist[(i, k)] + dist[(k, j)]
                if through < dist[(i, j)]:
                    dist[(i, j)] = through
    return dist


def all_shortest_paths(g: WeightedGraph, s: int, t: int,
                       dist: dict[tuple[int, int], float]) -> list[tuple[int, ...]]:
    """Enumerate every simple path from s to t whose length ties the optimum.

    DFS pruned with the Floyd-Warshall lower bound, so only near-optimal
    branches are explored.
    """
    best = dist[(s, t)]
    if best == INF:
        return []
    slack = best * TIE_REL_TOL
    adj = g.adjacency()
    paths = []

    def walk(node, length, path, visited):
        if node == t:
            if math.isclose(length, best, rel_tol=TIE_REL_TOL):
                paths.append(tuple(path))
            return
        for nxt, w in adj[node]:
            if nxt in visited:
                continue
            extended = length + w
            if extended + dist[(nxt, t)] > best + 2 * slack + 1e-300:
                continue
            visited.add(nxt)
            path.append(nxt)
            walk(nxt, extended, path, visited)
            path.pop()
            visited.remove(nxt)

    walk(s, 0.0, [s], {s})
    return paths


def closeness_oracle(g: WeightedGraph) -> dict[int, float]:
    dist = floyd_warshall(g)
    scores = {}
    for x in g.nodes:
        reachable = [dist[(x, y)] for y in g.nodes if y != x and dist[(x, y)] < INF]
        scores[x] = 0.0 if not reachable else 1.0 / sum(reachable)
    return scores


def betweenness_oracle(g: WeightedGraph) -> dict[int, float]:
    """Interior-vertex fractions summed over unordered pairs, by enumeration."""
    dist = floyd_warshall(g)
    scores = {x: 0.0 for x in g.nodes}
    nodes = list(g.nodes)
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            s, t = nodes[i], nodes[j]
            paths = all_shortest_paths(g, s, t, dist)
            if not paths:
                continue
            sigma = len(paths)
            counts = {x: 0 for x in g.nodes}
            for path in paths:
                for x in path[1:-1]:
                    counts[x] += 1
            for x in g.nodes:
                scores[x] += counts[x] / sigma
    return scores


def sigma_oracle(g: WeightedGraph) -> dict[tuple[int, int], int]:
    dist = floyd_warshall(g)
    sigma = {}
    for s in g.nodes:
        for t in g.nodes:
            if s == t:
                sigma[(s, t)] = 1
            else:
                sigma[(s, t)] = len(all_shortest_paths(g, s, t, dist))
    return sigma


def pagerank_dense(g: WeightedGraph, damping: float = 0.85,
                   variant: str = "weighted") -> dict[int, float]:
    """Exact stationary scores via a dense linear solve."""
    nodes = list(g.nodes)
    n = len(nodes)
    idx = {u: i for i, u in enumerate(nodes)}
    out_weight = {u: 0.0 for u in nodes}
    out_count = {u: 0 for u in nodes}
    for (u, _), w in g.edges.items():
        out_weight[u] += w
        out_count[u] += 1
    P = np.zeros((n, n))
    for (u, v), w in g.edges.items():
        P[idx[u], idx[v]] = w / out_weight[u] if variant == "weighted" else 1.0 / out_count[u]
    for u in nodes:
        if out_count[u] == 0:
            P[idx[u], :] = 1.0 / n
    solution = np.linalg.solve(np.eye(n) - damping * P.T, np.full(n, (1.0 - damping) / n))
    return {u: float(solution[idx[u]]) for u in nodes}


def eigenvector_dense(g: WeightedGraph) -> tuple[dict[int, float], float]:
    """Principal eigenvector and eigenvalue from a dense eigendecomposition."""
    nodes = list(g.nodes)
    n = len(nodes)
    idx = {u: i for i, u in enumerate(nodes)}
    A = np.zeros((n, n))
    for (u, v), w in g.edges.items():
        A[idx[u], idx[v]] = w
    eigenvalues, vectors = np.linalg.eigh(A)
    principal = vectors[:, -1]
    if principal.sum() < 0:
        principal = -principal
    return {u: float(principal[idx[u]]) for u in nodes}, float(eigenvalues[-1])
