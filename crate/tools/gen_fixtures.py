#!/usr/bin/env python3
"""Generate the MSH 2.2 mesh fixtures shipped in crates/core/fixtures.

Requires numpy and the `triangle` package (Shewchuk's Triangle bindings).
Boundary vertices are placed by this script and never moved or split by the
mesher (switch Y), so points on arcs lie on the exact circles.

    python3 tools/gen_fixtures.py [output_dir]
"""

import math
import os
import sys

import numpy as np
import triangle

HERE = os.path.dirname(os.path.abspath(__file__))
DEFAULT_OUT = os.path.join(HERE, "..", "crates", "core", "fixtures")


def subdivide(curve, t0, t1, size, min_pieces=1):
    """Points along curve(t) for t in [t0, t1) with spacing close to size(p)."""
    # Integrate arc length / local size to get the piece count and positions.
    n_fine = 2000
    ts = np.linspace(t0, t1, n_fine + 1)
    pts = np.array([curve(t) for t in ts])
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    mid = 0.5 * (pts[1:] + pts[:-1])
    dens = seg / np.array([size(p) for p in mid])
    cum = np.concatenate([[0.0], np.cumsum(dens)])
    pieces = max(min_pieces, int(math.ceil(cum[-1])))
    targets = np.linspace(0.0, cum[-1], pieces + 1)[:-1]
    return [curve(float(np.interp(c, cum, ts))) for c in targets]


class Builder:
    def __init__(self):
        self.points = []
        self.segments = []
        self.markers = []

    def loop(self, pieces):
        """pieces: list of (curve, t0, t1, tag); consecutive pieces share endpoints."""
        start = len(self.points)
        for curve, t0, t1, tag, size in pieces:
            pts = subdivide(curve, t0, t1, size)
            first = len(self.points)
            self.points.extend(pts)
            for k in range(len(pts)):
                self.segments.append((first + k, first + k + 1))
                self.markers.append(tag)
        # Close the loop.
        a, b = self.segments[-1]
        self.segments[-1] = (a, start)


def line(p, q):
    return lambda t: (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def arc(c, r):
    return lambda t: (c[0] + r * math.cos(t), c[1] + r * math.sin(t))


def mesh(builder, holes, size, base_h):
    tri_in = {
        "vertices": np.array(builder.points),
        "segments": np.array(builder.segments),
        "segment_markers": np.array(builder.markers).reshape(-1, 1),
    }
    if holes:
        tri_in["holes"] = np.array(holes)
    area = math.sqrt(3.0) / 4.0 * base_h**2
    out = triangle.triangulate(tri_in, "pq30Ya%.12g" % area)
    # Refine by a size function evaluated at centroids until it settles.
    for _ in range(12):
        v, t = out["vertices"], out["triangles"]
        cent = v[t].mean(axis=1)
        want = np.array([math.sqrt(3.0) / 4.0 * size(c) ** 2 for c in cent])
        p = v[t]
        have = 0.5 * np.abs(
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )
        if np.all(have <= 1.05 * want):
            break
        out["triangle_max_area"] = want.reshape(-1, 1)
        out = triangle.triangulate(out, "rpq30Ya")
    return out


def boundary_tags(out, builder):
    """Tag each boundary edge of the final mesh with its input segment marker."""
    tags = {}
    for (a, b), m in zip(out["segments"], out["segment_markers"].ravel()):
        tags[(min(a, b), max(a, b))] = int(m)
    return tags


def write_msh(path, out, builder, comment):
    v = out["vertices"]
    t = out["triangles"]
    tags = boundary_tags(out, builder)
    lines = []
    with open(path, "w") as f:
        f.write("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n")
        f.write("$Comments\n%s\n$EndComments\n" % comment)
        f.write("$Nodes\n%d\n" % len(v))
        for i, (x, y) in enumerate(v):
            f.write("%d %.17g %.17g 0\n" % (i + 1, x, y))
        f.write("$EndNodes\n")
        for (a, b), tag in sorted(tags.items()):
            lines.append((a, b, tag))
        f.write("$Elements\n%d\n" % (len(lines) + len(t)))
        k = 1
        for a, b, tag in lines:
            f.write("%d 1 2 %d %d %d %d\n" % (k, tag, tag, a + 1, b + 1))
            k += 1
        for tri in t:
            f.write("%d 2 2 0 1 %d %d %d\n" % (k, tri[0] + 1, tri[1] + 1, tri[2] + 1))
            k += 1
        f.write("$EndElements\n")
    return len(t), len(v)


def racetrack(h, h_wall=0.3, h_joint=0.5, grow=0.5):
    """Two half rings joined by straight channels. L=1, R1=1/2, R2=2.

    Tags: 1 right inner arc, 2 upper inner line, 3 left inner arc, 4 lower inner
    line; 5..8 the same pieces of the outer wall. Cells next to either wall are
    refined to h_wall * h to resolve the Knudsen layer, and to h_joint * h at
    the arc/line joints where the wall temperature has a kink.
    """
    L, r1, r2 = 1.0, 0.5, 2.0
    joints = [(sx * L, sy * r) for sx in (-1, 1) for sy in (-1, 1) for r in (r1, r2)]

    def size(p):
        x, y = p
        if abs(x) > L:
            r = math.hypot(x - math.copysign(L, x), y)
        else:
            r = abs(y)
        d = min(abs(r - r1), abs(r2 - r))
        dj = min(math.hypot(x - jx, y - jy) for jx, jy in joints)
        return min(h, h_wall * h + grow * d, h_joint * h + grow * dj)

    b = Builder()
    # Outer wall, counter-clockwise.
    b.loop([
        (arc((L, 0.0), r2), -0.5 * math.pi, 0.5 * math.pi, 5, size),
        (line((L, r2), (-L, r2)), 0.0, 1.0, 6, size),
        (arc((-L, 0.0), r2), 0.5 * math.pi, 1.5 * math.pi, 7, size),
        (line((-L, -r2), (L, -r2)), 0.0, 1.0, 8, size),
    ])
    # Inner wall.
    b.loop([
        (arc((L, 0.0), r1), -0.5 * math.pi, 0.5 * math.pi, 1, size),
        (line((L, r1), (-L, r1)), 0.0, 1.0, 2, size),
        (arc((-L, 0.0), r1), 0.5 * math.pi, 1.5 * math.pi, 3, size),
        (line((-L, -r1), (L, -r1)), 0.0, 1.0, 4, size),
    ])
    return b, [(0.0, 0.0)], size


def chamber(s, h_far=0.15, h_beam=0.05, h_corner=0.015, h_wall=0.08, grow=0.2):
    """Square chamber [0,8]^2 with a hot beam [1,3]^2.

    Tag 1 chamber walls, tag 2 beam walls. Refined around the beam (finest at
    its corners) and along the chamber walls; every size is scaled by 2^-s.
    """
    f = 2.0 ** (-s)
    corners = [(1.0, 1.0), (3.0, 1.0), (3.0, 3.0), (1.0, 3.0)]

    def size(p):
        x, y = p
        dc = min(math.hypot(x - cx, y - cy) for cx, cy in corners)
        db = math.hypot(max(1.0 - x, 0.0, x - 3.0), max(1.0 - y, 0.0, y - 3.0))
        dw = min(x, y, 8.0 - x, 8.0 - y)
        return f * min(h_far, h_corner + grow * dc, h_beam + grow * db, h_wall + grow * dw)

    b = Builder()
    b.loop([
        (line((0, 0), (8, 0)), 0.0, 1.0, 1, size),
        (line((8, 0), (8, 8)), 0.0, 1.0, 1, size),
        (line((8, 8), (0, 8)), 0.0, 1.0, 1, size),
        (line((0, 8), (0, 0)), 0.0, 1.0, 1, size),
    ])
    b.loop([
        (line((1, 1), (3, 1)), 0.0, 1.0, 2, size),
        (line((3, 1), (3, 3)), 0.0, 1.0, 2, size),
        (line((3, 3), (1, 3)), 0.0, 1.0, 2, size),
        (line((1, 3), (1, 1)), 0.0, 1.0, 2, size),
    ])
    return b, [(2.0, 2.0)], size, f * h_far


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else DEFAULT_OUT
    os.makedirs(out_dir, exist_ok=True)
    for i in (2, 3, 4, 5):
        h = 2.0 ** (-i)
        b, holes, size = racetrack(h)
        res = mesh(b, holes, size, h)
        path = os.path.join(out_dir, "racetrack_h%d.msh" % (2**i))
        nt, nn = write_msh(path, res, b, "racetrack L=1 R1=0.5 R2=2 h_max=1/%d" % (2**i))
        print("%s: %d triangles, %d nodes" % (path, nt, nn))
    for s in (0, 1):
        b, holes, size, h_far = chamber(s)
        res = mesh(b, holes, size, h_far)
        path = os.path.join(out_dir, "chamber_s%d.msh" % s)
        nt, nn = write_msh(path, res, b, "chamber L=8 beam l=2 d=1 split s=%d" % s)
        print("%s: %d triangles, %d nodes" % (path, nt, nn))


if __name__ == "__main__":
    main()
