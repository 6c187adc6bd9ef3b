"""Array-backed representation of a discrete net of curvature lines.

Vertices, curved edges and cells are stored in flat numpy arrays so that
per-vertex work (stars, curvatures, checks) can be vectorized across the whole
net.  Curved edges keep a dense polyline of parameter-domain samples; for
charts with periodic coordinates the samples are *unwrapped* (continuous)
while vertex parameters are reduced into the domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ..errors import NetConstructionError
from ..surface import SurfaceChart, SurfacePointData, eval_points

INTERIOR, BOUNDARY, INCOMPLETE = 0, 1, 2
STATUS_NAMES = {INTERIOR: "interior", BOUNDARY: "boundary", INCOMPLETE: "incomplete"}

__all__ = ["CurvatureLineNet", "INTERIOR", "BOUNDARY", "INCOMPLETE", "STATUS_NAMES",
           "assemble_net", "write_net", "read_net", "write_net_obj"]


@dataclass
class CurvatureLineNet:
    """A net of curvature lines on a chart.

    Attributes
    ----------
    chart : SurfaceChart
    uv : ndarray, shape (V, 2)
        Vertex parameters.
    position : ndarray, shape (V, 3)
    umbilic : ndarray of bool, shape (V,)
    status : ndarray of int8, shape (V,)
        ``INTERIOR``, ``BOUNDARY`` (on the outer face or the domain edge) or
        ``INCOMPLETE`` (non-umbilic vertex with valence other than four).
    edges : ndarray of int, shape (E, 2)
        Endpoint vertex ids ``(v0, v1)``.
    family : ndarray of int8, shape (E,)
        Curvature-line family of each edge (1 or 2).
    length : ndarray, shape (E,)
        Intrinsic length of each curved edge.
    sample_offsets, samples : ndarray
        CSR storage of the parameter polylines, oriented from ``v0`` to ``v1``.
    adj_offsets, adj_edges : ndarray
        CSR storage of the edges around each vertex, counterclockwise w.r.t.
        the chart normal.
    cells : list of ndarray
        Vertex id cycles of the bounded 2-cells, counterclockwise w.r.t. the
        normal.
    meta : dict
        Free-form construction metadata (net strategy, sizes, separatrices...).
    """

    chart: SurfaceChart
    uv: np.ndarray
    position: np.ndarray
    umbilic: np.ndarray
    status: np.ndarray
    edges: np.ndarray
    family: np.ndarray
    length: np.ndarray
    sample_offsets: np.ndarray
    samples: np.ndarray
    adj_offsets: np.ndarray
    adj_edges: np.ndarray
    cells: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    # ------------------------------------------------------------ basics
    @property
    def n_vertices(self) -> int:
        return len(self.uv)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def valence(self) -> np.ndarray:
        return np.diff(self.adj_offsets)

    @cached_property
    def point_data(self) -> SurfacePointData:
        """Exact surface geometry at every vertex."""
        return eval_points(self.chart, self.uv)

    def incident(self, vid: int) -> np.ndarray:
        """Edge ids around ``vid`` in counterclockwise order."""
        return self.adj_edges[self.adj_offsets[vid]:self.adj_offsets[vid + 1]]

    def far_vertex(self, vid, eid):
        """Other endpoint of ``eid`` (vectorized)."""
        e = self.edges[eid]
        return np.where(e[..., 0] == vid, e[..., 1], e[..., 0])

    def edge_polyline(self, eid: int, from_vertex: int | None = None) -> np.ndarray:
        """Parameter samples of edge ``eid``, optionally oriented from a vertex."""
        pts = self.samples[self.sample_offsets[eid]:self.sample_offsets[eid + 1]]
        if from_vertex is not None and self.edges[eid, 0] != from_vertex:
            pts = pts[::-1]
        return pts

    @cached_property
    def interior_ids(self) -> np.ndarray:
        return np.flatnonzero(self.status == INTERIOR)

    def star_arrays(self, vids: Sequence[int]):
        """Gather the fan data of vertices sharing one valence.

        Returns
        -------
        eids : ndarray, shape (m, k)
            Edge ids counterclockwise around each vertex.
        far : ndarray, shape (m, k)
            Far endpoints of those edges.
        """
        vids = np.asarray(vids, dtype=np.int64)
        k = np.unique(self.valence[vids])
        if len(k) != 1:
            raise ValueError("star_arrays needs vertices of one common valence")
        idx = self.adj_offsets[vids][:, None] + np.arange(k[0])[None, :]
        eids = self.adj_edges[idx]
        return eids, self.far_vertex(vids[:, None], eids)

    def initial_tangents(self, vids: np.ndarray, eids: np.ndarray) -> np.ndarray:
        """Ambient unit tangents of the curved edges ``eids`` at their endpoint ``vids``.

        Uses the first polyline segment mapped through the chart Jacobian at
        the vertex (exact for edges that are straight in parameter space).
        """
        vids = np.asarray(vids)
        eids = np.asarray(eids)
        starts = self.edges[eids, 0] == vids
        off0 = self.sample_offsets[eids]
        off1 = self.sample_offsets[eids + 1]
        a = np.where(starts, off0, off1 - 1)
        b = np.where(starts, off0 + 1, off1 - 2)
        d = self.samples[b] - self.samples[a]
        P = self.chart.partials(self.uv[vids, 0], self.uv[vids, 1], order=1)
        t = P[1, 0] * d[..., 0:1] + P[0, 1] * d[..., 1:2]
        return t / np.linalg.norm(t, axis=-1, keepdims=True)

    # ------------------------------------------------------------ checks
    def check_invariants(self, tol: float = 1e-10) -> list[str]:
        """Return a list of violated invariants (empty when the net is valid)."""
        problems = []
        val = self.valence
        inter = self.status == INTERIOR
        bad = inter & ~self.umbilic & (val != 4)
        if np.any(bad):
            problems.append(f"{int(bad.sum())} non-umbilic interior vertices without valence 4")
        bad = inter & self.umbilic & (val <= 2) & ~np.asarray(self.chart.totally_umbilic)
        if np.any(bad):
            problems.append(f"{int(bad.sum())} umbilic vertices with valence <= 2")
        # alternating families around non-umbilic interior vertices
        ids = np.flatnonzero(inter & ~self.umbilic & (val == 4))
        if len(ids):
            eids, _ = self.star_arrays(ids)
            fam = self.family[eids]
            alt = (fam[:, 0] != fam[:, 1]) & (fam[:, 1] != fam[:, 2]) & (fam[:, 2] != fam[:, 3])
            if not np.all(alt):
                problems.append(f"{int((~alt).sum())} vertices without alternating families")
        # polyline endpoints
        first = self.samples[self.sample_offsets[:-1]]
        last = self.samples[self.sample_offsets[1:] - 1]
        X0 = self.chart.position(first)
        X1 = self.chart.position(last)
        d0 = np.linalg.norm(X0 - self.position[self.edges[:, 0]], axis=1)
        d1 = np.linalg.norm(X1 - self.position[self.edges[:, 1]], axis=1)
        if len(d0) and max(d0.max(), d1.max()) > tol:
            problems.append(f"polyline endpoints off their vertices by {max(d0.max(), d1.max()):.3g}")
        problems.extend(self._check_cells())
        return problems

    def _check_cells(self) -> list[str]:
        edge_set = {}
        for e, (a, b) in enumerate(self.edges):
            edge_set.setdefault((min(a, b), max(a, b)), []).append(e)
        by_vertex: dict[int, list[int]] = {}
        for c, cyc in enumerate(self.cells):
            for v in set(cyc.tolist()):
                by_vertex.setdefault(v, []).append(c)
        seen = set()
        bad = 0
        for cs in by_vertex.values():
            for i in range(len(cs)):
                for j in range(i + 1, len(cs)):
                    key = (cs[i], cs[j])
                    if key in seen:
                        continue
                    seen.add(key)
                    shared = set(self.cells[cs[i]].tolist()) & set(self.cells[cs[j]].tolist())
                    if len(shared) == 1:
                        continue
                    if len(shared) == 2:
                        a, b = sorted(shared)
                        ca, cb = self.cells[cs[i]], self.cells[cs[j]]
                        if _consecutive(ca, a, b) and _consecutive(cb, a, b) and (a, b) in edge_set:
                            continue
                    bad += 1
        return [f"{bad} cell pairs intersect in more than a vertex or an edge"] if bad else []


def _consecutive(cyc: np.ndarray, a: int, b: int) -> bool:
    n = len(cyc)
    pos = {int(v): i for i, v in enumerate(cyc)}
    i, j = pos[a], pos[b]
    return (i - j) % n in (1, n - 1)


# ---------------------------------------------------------------- assembly


def _faces(n_vertices, edges, order_offsets, order_edges):
    """Faces of a planar embedding given CCW (parameter-space) edge orders.

    Half-edge ``2e`` runs ``v0 -> v1`` and ``2e+1`` runs back.  The face to the
    left of a half-edge continues with the clockwise neighbour of its twin.
    """
    E = len(edges)
    if np.any(edges[:, 0] == edges[:, 1]):
        raise NetConstructionError("loop edge in net graph")
    origin = np.empty(2 * E, dtype=np.int64)
    origin[0::2] = edges[:, 0]
    origin[1::2] = edges[:, 1]
    # half-edge id of each rotation slot, and the slot of each half-edge
    slot_vertex = np.repeat(np.arange(n_vertices), np.diff(order_offsets))
    rot_half = 2 * order_edges + (edges[order_edges, 0] != slot_vertex)
    slot = np.empty(2 * E, dtype=np.int64)
    slot[rot_half] = np.arange(len(rot_half))
    twin = np.arange(2 * E) ^ 1
    t = origin[twin]
    lo = order_offsets[t]
    deg = order_offsets[t + 1] - lo
    nxt = rot_half[lo + (slot[twin] - lo - 1) % deg]
    visited = np.zeros(2 * E, dtype=bool)
    faces = []
    for h0 in range(2 * E):
        if visited[h0]:
            continue
        cyc = []
        h = h0
        while not visited[h]:
            visited[h] = True
            cyc.append(h)
            h = nxt[h]
        faces.append(np.array(cyc, dtype=np.int64))
    return faces, origin


def assemble_net(chart: SurfaceChart, uv, edges, family, length, polylines, tangents,
                 *, umbilic=None, forced_boundary=None, meta=None, param_area_sign=None) -> CurvatureLineNet:
    """Build a :class:`CurvatureLineNet` from raw graph data.

    Parameters
    ----------
    uv : (V, 2) vertex parameters.
    edges : (E, 2) endpoint ids; ``polylines[e]`` runs from ``edges[e, 0]`` to ``edges[e, 1]``.
    tangents : (E, 2, 2)
        Parameter-space tangent directions of each edge at its start (pointing
        along the edge) and at its end (pointing back into the edge).
    forced_boundary : (V,) bool, optional
        Vertices known to lie on the domain boundary.
    param_area_sign : callable, optional
        Signed parameter-space area of a vertex cycle, used to detect outer
        faces; defaults to the shoelace formula on unwrapped polylines.
    """
    uv = np.asarray(uv, float)
    edges = np.asarray(edges, np.int64).reshape(-1, 2)
    V, E = len(uv), len(edges)
    tangents = np.asarray(tangents, float).reshape(E, 2, 2)
    # rotation system in parameter space (orientation of X_u x X_v)
    inc_v = np.concatenate([edges[:, 0], edges[:, 1]])
    inc_e = np.concatenate([np.arange(E), np.arange(E)])
    inc_t = np.concatenate([tangents[:, 0], tangents[:, 1]])
    ang = np.arctan2(inc_t[:, 1], inc_t[:, 0])
    order = np.lexsort((ang, inc_v))
    counts = np.bincount(inc_v, minlength=V)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    param_ccw = inc_e[order]
    faces, origin = _faces(V, edges, offsets, param_ccw)

    # classify faces by signed area of the unwrapped boundary polyline
    poly_cache = polylines
    outer_vertices = np.zeros(V, dtype=bool)
    cells = []
    for f in faces:
        pts = []
        for h in f:
            e = h >> 1
            p = poly_cache[e] if (h & 1) == 0 else poly_cache[e][::-1]
            if pts:
                # re-anchor periodic polylines so consecutive pieces connect
                shift = pts[-1][-1] - p[0]
                p = p + shift
            pts.append(p)
        ring = np.concatenate(pts)
        x, y = ring[:, 0], ring[:, 1]
        area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        closes = np.linalg.norm(ring[-1] - ring[0]) < 1e-6 * (1 + np.abs(ring).max())
        if area > 0 and closes:
            cells.append(origin[f])
        else:
            outer_vertices[origin[f]] = True

    if umbilic is None:
        umbilic = eval_points(chart, uv).umbilic if V else np.zeros(0, bool)
    umbilic = np.asarray(umbilic, bool)
    status = np.full(V, INTERIOR, dtype=np.int8)
    val = counts
    incomplete = ~umbilic & (val != 4)
    if chart.totally_umbilic:
        incomplete = val != 4
    status[incomplete] = INCOMPLETE
    status[outer_vertices] = BOUNDARY
    if forced_boundary is not None:
        status[np.asarray(forced_boundary, bool)] = BOUNDARY
    status[val == 0] = BOUNDARY

    # counterclockwise w.r.t. the chart normal
    adj = param_ccw.copy()
    if chart.orientation < 0:
        for v in range(V):
            lo, hi = offsets[v], offsets[v + 1]
            adj[lo:hi] = adj[lo:hi][::-1]
        cells = [c[::-1].copy() for c in cells]

    lens = np.array([len(p) for p in polylines], dtype=np.int64)
    s_off = np.concatenate([[0], np.cumsum(lens)])
    samples = np.concatenate(polylines) if E else np.zeros((0, 2))
    return CurvatureLineNet(
        chart=chart, uv=chart.wrap(uv), position=chart.position(uv) if V else np.zeros((0, 3)),
        umbilic=umbilic, status=status, edges=edges, family=np.asarray(family, np.int8),
        length=np.asarray(length, float), sample_offsets=s_off, samples=samples,
        adj_offsets=offsets, adj_edges=adj, cells=cells, meta=dict(meta or {}),
    )


# ---------------------------------------------------------------- io


def write_net(net: CurvatureLineNet, path) -> None:
    """Write the plain-text net format.

    ::

        # curvnet net v1
        VERTICES <V>
        <id> <u> <v> <x> <y> <z> <status> <umbilic>
        EDGES <E>
        <id> <v0> <v1> <family> <length> <m> <u_1> <v_1> ... <u_m> <v_m>
        CELLS <C>
        <n> <id_1> ... <id_n>

    Numbers are written with ``repr`` (shortest round-trip form).
    """
    r = repr
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# curvnet net v1\n")
        fh.write(f"VERTICES {net.n_vertices}\n")
        for i in range(net.n_vertices):
            u, v = net.uv[i]
            x, y, z = net.position[i]
            fh.write(f"{i} {r(float(u))} {r(float(v))} {r(float(x))} {r(float(y))} {r(float(z))} "
                     f"{STATUS_NAMES[int(net.status[i])]} {int(net.umbilic[i])}\n")
        fh.write(f"EDGES {net.n_edges}\n")
        for e in range(net.n_edges):
            pts = net.edge_polyline(e)
            coords = " ".join(r(float(c)) for c in pts.ravel())
            fh.write(f"{e} {net.edges[e, 0]} {net.edges[e, 1]} {int(net.family[e])} "
                     f"{r(float(net.length[e]))} {len(pts)} {coords}\n")
        fh.write(f"CELLS {len(net.cells)}\n")
        for c in net.cells:
            fh.write(f"{len(c)} " + " ".join(str(int(v)) for v in c) + "\n")


def read_net(path, chart: SurfaceChart) -> CurvatureLineNet:
    """Read a net written by :func:`write_net` (the chart is not serialized)."""
    with open(path, encoding="ascii") as fh:
        lines = [ln.split() for ln in fh if ln.strip() and not ln.startswith("#")]
    it = iter(lines)
    head = next(it)
    assert head[0] == "VERTICES"
    V = int(head[1])
    rows = [next(it) for _ in range(V)]
    uv = np.array([[float(t[1]), float(t[2])] for t in rows]).reshape(-1, 2)
    inv = {b: a for a, b in STATUS_NAMES.items()}
    status = np.array([inv[t[6]] for t in rows], dtype=np.int8)
    umb = np.array([bool(int(t[7])) for t in rows])
    head = next(it)
    E = int(head[1])
    edges, fam, length, polys = [], [], [], []
    for _ in range(E):
        t = next(it)
        edges.append((int(t[1]), int(t[2])))
        fam.append(int(t[3]))
        length.append(float(t[4]))
        m = int(t[5])
        polys.append(np.array(t[6:6 + 2 * m], float).reshape(m, 2))
    tangents = np.array([[p[1] - p[0], p[-2] - p[-1]] for p in polys]).reshape(-1, 2, 2)
    head = next(it)
    net = assemble_net(chart, uv, np.array(edges).reshape(-1, 2), fam, length, polys, tangents, umbilic=umb)
    net.status = status
    return net


def write_net_obj(net: CurvatureLineNet, path) -> None:
    """OBJ file of the straight-edge net: ``v`` records and ``l`` line elements."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# curvnet straight-edge net\n")
        for x, y, z in net.position:
            fh.write(f"v {x!r} {y!r} {z!r}\n")
        for a, b in net.edges:
            fh.write(f"l {a + 1} {b + 1}\n")
