"""Incremental (Bowyer-Watson) Delaunay triangulation in the plane.

No super-triangle is used. The outside of the hull is covered by "ghost"
triangles ``(a, b, GHOST)``, one per hull edge ``b -> a``; a point conflicts
with a ghost when it lies strictly outside that hull edge, or on the open
edge itself. This keeps the hull exact and the cavity always star-shaped.

Points are inserted in the given order (after the seed triangle), so
co-circular ties resolve the same way on every run.
"""

from __future__ import annotations

import numpy as np

GHOST = -1
EPS = 1e-9


class DegenerateInputError(ValueError):
    """Fewer than three distinct points, or all points collinear."""


def orient(ax, ay, bx, by, cx, cy) -> float:
    """Twice the signed area of (a, b, c); positive when counter-clockwise."""
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def incircle(ax, ay, bx, by, cx, cy, px, py) -> float:
    """Positive when p is inside the circumcircle of the CCW triangle (a, b, c)."""
    adx, ady = ax - px, ay - py
    bdx, bdy = bx - px, by - py
    cdx, cdy = cx - px, cy - py
    return ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
            + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
            + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))


class _Mesh:
    def __init__(self, xs, ys, eps):
        self.xs = xs
        self.ys = ys
        self.eps = eps
        self.tris = {}
        self.owner = {}  # directed edge -> triangle id
        self.next_id = 0
        self.last = None  # a recent real triangle to start walks from

    def add(self, a, b, c):
        tid = self.next_id
        self.next_id += 1
        self.tris[tid] = (a, b, c)
        self.owner[(a, b)] = tid
        self.owner[(b, c)] = tid
        self.owner[(c, a)] = tid
        if c != GHOST:
            self.last = tid
        return tid

    def remove(self, tid):
        a, b, c = self.tris.pop(tid)
        for e in ((a, b), (b, c), (c, a)):
            if self.owner.get(e) == tid:
                del self.owner[e]

    def conflicts(self, tid, px, py) -> bool:
        a, b, c = self.tris[tid]
        xs, ys = self.xs, self.ys
        if c == GHOST:
            o = orient(xs[a], ys[a], xs[b], ys[b], px, py)
            if o > self.eps:
                return True
            if o < -self.eps:
                return False
            # collinear with the hull edge: conflict only strictly inside the segment
            dot1 = (px - xs[a]) * (xs[b] - xs[a]) + (py - ys[a]) * (ys[b] - ys[a])
            dot2 = (px - xs[b]) * (xs[a] - xs[b]) + (py - ys[b]) * (ys[a] - ys[b])
            return dot1 > 0 and dot2 > 0
        return incircle(xs[a], ys[a], xs[b], ys[b], xs[c], ys[c], px, py) > self.eps

    def locate(self, px, py) -> int:
        """Visibility walk to a triangle in conflict with p (real or ghost)."""
        xs, ys = self.xs, self.ys
        tid = self.last
        for _ in range(4 * len(self.tris) + 10):
            a, b, c = self.tris[tid]
            if c == GHOST:
                return tid
            for u, v in ((a, b), (b, c), (c, a)):
                if orient(xs[u], ys[u], xs[v], ys[v], px, py) < -self.eps:
                    tid = self.owner[(v, u)]
                    break
            else:
                return tid
        # the walk cannot cycle on a Delaunay mesh; this is a numerical safety net
        for tid in self.tris:
            if self.conflicts(tid, px, py):
                return tid
        raise RuntimeError("point location failed")

    def insert(self, p):
        px, py = self.xs[p], self.ys[p]
        start = self.locate(px, py)
        bad = {start}
        stack = [start]
        boundary = []
        while stack:
            tid = stack.pop()
            a, b, c = self.tris[tid]
            for u, v in ((a, b), (b, c), (c, a)):
                nb = self.owner[(v, u)]
                if nb in bad:
                    continue
                if self.conflicts(nb, px, py):
                    bad.add(nb)
                    stack.append(nb)
                else:
                    boundary.append((u, v))
        # an edge may have been recorded before its neighbour turned bad
        boundary = [(u, v) for u, v in boundary if self.owner[(v, u)] not in bad]
        for tid in sorted(bad):
            self.remove(tid)
        for u, v in boundary:
            if u == GHOST:
                self.add(v, p, GHOST)
            elif v == GHOST:
                self.add(p, u, GHOST)
            else:
                self.add(u, v, p)


def triangulate(points, eps: float = EPS) -> np.ndarray:
    """Delaunay triangles of ``points`` (``(N, 2)``) as CCW index triples.

    Raises :class:`DegenerateInputError` for fewer than 3 points or collinear
    input and ``ValueError`` for duplicate points.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"points must have shape (N, 2), got {pts.shape}")
    n = len(pts)
    if n < 3:
        raise DegenerateInputError(f"need at least 3 points, got {n}")
    if len(np.unique(pts, axis=0)) != n:
        raise ValueError("duplicate points")
    xs = pts[:, 0].tolist()
    ys = pts[:, 1].tolist()

    a, b = 0, 1
    c = None
    for k in range(2, n):
        if abs(orient(xs[a], ys[a], xs[b], ys[b], xs[k], ys[k])) > eps:
            c = k
            break
    if c is None:
        raise DegenerateInputError("all points are collinear")
    if orient(xs[a], ys[a], xs[b], ys[b], xs[c], ys[c]) < 0:
        b, c = c, b

    mesh = _Mesh(xs, ys, eps)
    mesh.add(b, a, GHOST)
    mesh.add(c, b, GHOST)
    mesh.add(a, c, GHOST)
    mesh.add(a, b, c)
    seeded = {a, b, c}
    for p in range(n):
        if p not in seeded:
            mesh.insert(p)

    real = [t for _, t in sorted(mesh.tris.items()) if t[2] != GHOST]
    return np.array(real, dtype=np.int64).reshape(-1, 3)
