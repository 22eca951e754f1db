from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from ..errors import ValidationFailed


def validate_adjacency(adjacency: Sequence[Sequence[int]]) -> np.ndarray:
    """Return the adjacency as an int8 array, or raise if it is not a usable SFT."""
    if len(adjacency) == 0:
        raise ValidationFailed("adjacency matrix is empty", "adjacency")
    try:
        matrix = np.asarray(adjacency, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise ValidationFailed("adjacency entries must be integers in rows of equal length", "adjacency") from exc
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationFailed("adjacency matrix must be square", "adjacency")
    if not np.isin(matrix, (0, 1)).all():
        raise ValidationFailed("adjacency entries must be 0 or 1", "adjacency")
    for i in range(matrix.shape[0]):
        if not matrix[i].any():
            raise ValidationFailed(f"row {i} has no allowed successor", "adjacency")
        if not matrix[:, i].any():
            raise ValidationFailed(f"column {i} has no allowed predecessor", "adjacency")
    return matrix.astype(np.int8)


def transition_graph(adjacency: Sequence[Sequence[int]]) -> nx.DiGraph:
    matrix = validate_adjacency(adjacency)
    graph = nx.DiGraph()
    graph.add_nodes_from(range(matrix.shape[0]))
    graph.add_edges_from(zip(*np.nonzero(matrix)))
    return graph


def check_transitive(adjacency: Sequence[Sequence[int]]) -> bool:
    """True iff every cylinder reaches every cylinder, i.e. the transition graph is strongly connected."""
    return nx.is_strongly_connected(transition_graph(adjacency))


def first_violation(word: Sequence[int], adjacency: np.ndarray) -> Optional[Tuple[int, int, int]]:
    """(position, a, b) of the first forbidden transition a -> b in `word`, or None."""
    if len(word) < 2:
        return None
    w = np.asarray(word, dtype=np.int64)
    allowed = adjacency[w[:-1], w[1:]]
    bad = np.flatnonzero(allowed == 0)
    if len(bad) == 0:
        return None
    i = int(bad[0])
    return i, int(w[i]), int(w[i + 1])


def connector(graph: nx.DiGraph, a: int, b: int) -> List[int]:
    """Symbols to place strictly between a and b so that the junction is admissible."""
    if graph.has_edge(a, b):
        return []
    try:
        path = nx.shortest_path(graph, a, b)
    except nx.NetworkXNoPath as exc:
        raise ValidationFailed(f"no admissible path from {a} to {b}", "adjacency") from exc
    if len(path) < 2:
        # a == b without a self-loop: go round the shortest cycle through a
        best: Optional[List[int]] = None
        for succ in graph.successors(a):
            try:
                back = nx.shortest_path(graph, succ, a)
            except nx.NetworkXNoPath:
                continue
            if best is None or len(back) < len(best):
                best = back
        if best is None:
            raise ValidationFailed(f"no admissible cycle through {a}", "adjacency")
        return best[:-1]
    return list(path[1:-1])


def admissible_words(length: int, adjacency: np.ndarray) -> List[Tuple[int, ...]]:
    """All admissible words of the given length, lexicographic."""
    size = adjacency.shape[0]
    words: List[Tuple[int, ...]] = [(s,) for s in range(size)]
    for _ in range(length - 1):
        words = [w + (s,) for w in words for s in range(size) if adjacency[w[-1], s]]
    return words
