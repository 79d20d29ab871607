"""Shared generators and fixed instances for the test suite."""

from __future__ import annotations

import random

from catgraph.graphs import AdjacencyGraph

TAPE_PROFILES = ("zeros", "ones", "random")


def random_graph(rng: random.Random, n: int, p: float = 0.35) -> AdjacencyGraph:
    edges = [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < p]
    return AdjacencyGraph.from_edges(n, edges)


def random_dag(rng: random.Random, n: int, max_edges: int | None = None) -> AdjacencyGraph:
    order = list(range(n))
    rng.shuffle(order)
    possible = [
        (order[i], order[j]) for i in range(n) for j in range(i + 1, n)
    ]
    cap = max_edges if max_edges is not None else 2 * n
    rng.shuffle(possible)
    return AdjacencyGraph.from_edges(n, possible[: min(cap, len(possible))])


def out_regular_graph(rng: random.Random, n: int, d: int) -> AdjacencyGraph:
    edges = []
    for u in range(n):
        targets = rng.sample([v for v in range(n) if v != u], d)
        edges.extend((u, v) for v in targets)
    return AdjacencyGraph.from_edges(n, edges)


def ergodic_graph(rng: random.Random, n: int, extra: int = 1) -> AdjacencyGraph:
    """Strongly connected and aperiodic: a cycle, a self-loop, extra edges."""
    edges = {(v, (v + 1) % n) for v in range(n)}
    edges.add((0, 0))
    for u in range(n):
        for _ in range(extra):
            v = rng.randrange(n)
            edges.add((u, v))
    return AdjacencyGraph.from_edges(n, sorted(edges))


def figure_dag() -> AdjacencyGraph:
    """Layered 8-vertex DAG: one source, two sinks, all interior out-degree 2."""
    edges = [
        (0, 1), (0, 2),
        (1, 3), (1, 4), (2, 4), (2, 5),
        (3, 6), (3, 7), (4, 6), (4, 7), (5, 6), (5, 7),
    ]
    return AdjacencyGraph.from_edges(8, edges)


def structured_graphs(n: int) -> list[AdjacencyGraph]:
    """Deterministic small-instance families used by the counting pool."""
    out = []
    out.append(AdjacencyGraph.from_edges(n, []))
    out.append(AdjacencyGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)]))
    if n >= 2:
        out.append(
            AdjacencyGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])
        )
        out.append(
            AdjacencyGraph.from_edges(
                n, [(u, v) for u in range(n) for v in range(n) if u != v]
            )
        )
    if n >= 3:
        out.append(AdjacencyGraph.from_edges(n, [(0, v) for v in range(1, n)]))
        out.append(AdjacencyGraph.from_edges(n, [(v, n - 1) for v in range(n - 1)]))
    if n >= 4:
        # two disjoint paths from 0 re-merging at 3
        out.append(AdjacencyGraph.from_edges(n, [(0, 1), (0, 2), (1, 3), (2, 3)]))
    return out


def counting_pool(per_n: int = 25, max_n: int = 6) -> list[AdjacencyGraph]:
    rng = random.Random(20240901)
    pool = []
    for n in range(1, max_n + 1):
        pool.extend(structured_graphs(n))
        for _ in range(per_n):
            pool.append(random_graph(rng, n, p=rng.choice((0.2, 0.4, 0.6))))
    return pool


def enumerate_digraphs(n: int):
    """All simple digraphs (no self-loops) on n labelled vertices."""
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    for bits in range(1 << len(pairs)):
        yield AdjacencyGraph.from_edges(
            n, [e for k, e in enumerate(pairs) if bits >> k & 1]
        )
