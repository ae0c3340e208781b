"""Exact Euclidean minimum spanning tree length for small point sets."""
from __future__ import annotations

import math


def _as_points(points):
    pts = [tuple(map(float, p)) for p in points]
    if len(pts) < 2:
        raise ValueError("need at least two points")
    if any(len(p) != 2 for p in pts):
        raise ValueError("points must be 2-D")
    return pts


def mst_edges(points) -> list[tuple[int, int, float]]:
    """Prim's algorithm on the complete graph; returns (i, j, length) edges."""
    pts = _as_points(points)
    n = len(pts)
    best = [math.inf] * n
    parent = [-1] * n
    used = [False] * n
    best[0] = 0.0
    edges = []
    for _ in range(n):
        u = min((i for i in range(n) if not used[i]), key=lambda i: best[i])
        used[u] = True
        if parent[u] >= 0:
            edges.append((parent[u], u, best[u]))
        for v in range(n):
            if not used[v]:
                d = math.dist(pts[u], pts[v])
                if d < best[v]:
                    best[v], parent[v] = d, u
    return edges


def mst_length(points, max_points: int = 8) -> float:
    """Total edge length of the Euclidean MST, summed with ``math.fsum``."""
    pts = _as_points(points)
    if len(pts) > max_points:
        raise ValueError(f"at most {max_points} points supported")
    return math.fsum(e[2] for e in mst_edges(pts))
