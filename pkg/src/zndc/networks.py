"""Benchmark systems: complete graphs, the mixed-spectrum example, empty
graphs, and the 7-node line / star / circle networks.

Network conventions: node 1 (index 0) carries the only input; edges have
weight 1 in both directions and every node has a self-loop of weight -1.
The line is numbered from its midpoint (``4-3-2-1-5-6-7``) so that the input
sits on the symmetry axis, which is what makes it uncontrollable.
"""

import numpy as np

from .model import AffineSystem, LinearSystem

NETWORK_KINDS = ("line", "star", "circle")


def complete_graph(n):
    """``(1_{n x n}, 1_{n x 1})``."""
    return LinearSystem(np.ones((n, n)), np.ones((n, 1)))


def mixed_spectrum_example():
    """6-state single-input pair with spectrum {-1, -1, 3, 4, 4, 4}."""
    a = np.array(
        [
            [-1, 0, 1, 0, 0, 0],
            [0, -1, 0, 0, 0, 0],
            [0, 0, 3, 0, 0, 0],
            [0, 0, 1, 4, 0, 0],
            [0, 0, 0, 0, 4, 0],
            [0, 0, 0, 0, 0, 4],
        ],
        dtype=float,
    )
    b = np.array([[0], [1], [1], [0], [0], [1]], dtype=float)
    return LinearSystem(a, b)


def zero_system(n, m=1):
    return LinearSystem(np.zeros((n, n)), np.zeros((n, m)))


def network_edges(kind, n=7):
    """Undirected edges (0-based, ``i < j``) of a named topology."""
    if kind == "line":
        half = (n - 1) // 2
        left = list(range(1, half + 1))
        right = list(range(half + 1, n))
        edges = []
        for arm in (left, right):
            prev = 0
            for v in arm:
                edges.append((prev, v))
                prev = v
    elif kind == "star":
        edges = [(0, j) for j in range(1, n)]
    elif kind == "circle":
        edges = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    else:
        raise ValueError(f"unknown network kind {kind!r}; choose from {NETWORK_KINDS}")
    return sorted((min(e), max(e)) for e in edges)


def edge_order(edges):
    """Upper-triangular nonzeros listed column by column (then by row)."""
    return sorted(edges, key=lambda e: (e[1], e[0]))


def adjacency(kind, n=7):
    adj = np.zeros((n, n))
    for i, j in network_edges(kind, n):
        adj[i, j] = adj[j, i] = 1.0
    return adj


def input_matrix(n=7):
    b = np.zeros((n, 1))
    b[0, 0] = 1.0
    return b


def network_system(kind, n=7):
    """Numeric pair ``(Adj - I, e_1)``."""
    return LinearSystem(adjacency(kind, n) - np.eye(n), input_matrix(n))


def undirected_network(kind, n=7):
    """Affine family with one symmetric weight direction per edge."""
    sys = network_system(kind, n)
    dirs = []
    for i, j in edge_order(network_edges(kind, n)):
        d = np.zeros((n, n))
        d[i, j] = d[j, i] = 1.0
        dirs.append((d, np.zeros((n, 1))))
    return AffineSystem(sys.A, sys.B, tuple(dirs))


def laplacian(kind, n=7):
    adj = adjacency(kind, n)
    return np.diag(adj.sum(axis=1)) - adj


def laplacian_network(kind, n=7):
    """Affine family ``-L(w)`` with one direction per symmetric edge weight."""
    dirs = []
    for i, j in edge_order(network_edges(kind, n)):
        e = np.zeros(n)
        e[i], e[j] = 1.0, -1.0
        dirs.append((-np.outer(e, e), np.zeros((n, 1))))
    return AffineSystem(-laplacian(kind, n), input_matrix(n), tuple(dirs))
