"""Triangulated vertex stars: the local polyhedral approximation at a net vertex.

A star holds the straight edge vectors from a vertex ``p`` to the far ends of
its curved edges, ordered counterclockwise about the surface normal, together
with the fan triangles spanned by cyclically adjacent edge vectors.

:class:`VertexStar` is batched: all arrays carry a leading dimension ``m`` over
vertices of one common valence ``k``, so the whole net is processed with a
handful of vectorized passes.  :func:`build_star` returns a batch of one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateStarError
from .netgen.net import INTERIOR, CurvatureLineNet

__all__ = ["VertexStar", "StarMetrics", "FramedEdges", "SamplingReport", "build_star", "build_stars",
           "star_from_vectors", "star_metrics", "sampling_flags", "check_sampling", "framed_edges", "write_star_obj",
           "MIN_EDGE", "MIN_SIN"]

MIN_EDGE = 1e-12
MIN_SIN = 1e-10

# reasons a star is unusable
OK, SHORT_EDGE, COLLINEAR, FOLDED = 0, 1, 2, 3
REASONS = {OK: "ok", SHORT_EDGE: "zero-length edge", COLLINEAR: "collinear fan pair", FOLDED: "orientation fold"}


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


@dataclass
class VertexStar:
    """Batch of ``m`` vertex stars of valence ``k``.

    Attributes
    ----------
    vids : (m,) int
        Center vertex ids (``-1`` for stars built from raw vectors).
    p : (m, 3)
        Center positions.
    E : (m, k, 3)
        Straight edge vectors, counterclockwise about ``n``.
    eids : (m, k) int
        Net edge ids (positions ``0..k-1`` for raw stars).
    family : (m, k) int
        Principal family associated with each edge (1 or 2).
    lengths : (m, k)
        Intrinsic lengths of the curved edges.
    v1, v2, n : (m, 3)
        Darboux frame at the centers.
    k1, k2 : (m,)
        Exact principal curvatures at the centers (NaN for raw stars).
    umbilic : (m,) bool
    boundary : (m,) bool
    status : (m,) int
        ``0`` when nondegenerate and correctly oriented, otherwise a code in
        ``REASONS``.
    """

    vids: np.ndarray
    p: np.ndarray
    E: np.ndarray
    eids: np.ndarray
    family: np.ndarray
    lengths: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    n: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    umbilic: np.ndarray
    boundary: np.ndarray
    status: np.ndarray

    @property
    def m(self) -> int:
        return self.E.shape[0]

    @property
    def k(self) -> int:
        return self.E.shape[1]

    @property
    def F(self) -> np.ndarray:
        """Counterclockwise neighbours ``f`` of every edge ``e``."""
        return np.roll(self.E, -1, axis=1)

    @property
    def G(self) -> np.ndarray:
        """Clockwise neighbours ``g`` of every edge ``e``."""
        return np.roll(self.E, 1, axis=1)

    @property
    def valid(self) -> np.ndarray:
        return self.status == OK

    def take(self, mask) -> "VertexStar":
        return VertexStar(**{k: getattr(self, k)[mask] for k in self.__dataclass_fields__})

    def triangles(self) -> np.ndarray:
        """Fan triangles as index pairs ``(i, i+1 mod k)`` into ``E``."""
        i = np.arange(self.k)
        return np.stack([i, (i + 1) % self.k], axis=-1)


def _classify(E: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Degeneracy / orientation status of each star in a batch."""
    F = np.roll(E, -1, axis=1)
    le = np.linalg.norm(E, axis=-1)
    lf = np.linalg.norm(F, axis=-1)
    cr = np.cross(E, F)
    with np.errstate(invalid="ignore", divide="ignore"):
        sin = np.linalg.norm(cr, axis=-1) / (le * lf)
    status = np.zeros(E.shape[0], dtype=np.int8)
    orient = _dot(cr, n[:, None, :])
    status[np.any(orient <= 0, axis=1)] = FOLDED
    status[np.any(~(sin >= MIN_SIN), axis=1)] = COLLINEAR
    status[np.any(~(le >= MIN_EDGE), axis=1)] = SHORT_EDGE
    return status


def star_from_vectors(E, n, family=None, lengths=None, v1=None, k1=None, k2=None,
                      umbilic=None) -> VertexStar:
    """Build a star batch directly from edge vectors.

    Parameters
    ----------
    E : array_like, shape (k, 3) or (m, k, 3)
        Edge vectors, counterclockwise about ``n``.
    n : array_like, shape (3,) or (m, 3)
        Unit normal at the center.
    family : array_like of int, optional
        Family tags; by default edges are associated with the frame direction
        they are most aligned with (``v1`` defaults to the projection of the
        first edge).
    lengths : array_like, optional
        Intrinsic curved-edge lengths; default: chord lengths.
    """
    E = np.asarray(E, float)
    if E.ndim == 2:
        E = E[None]
    m, k, _ = E.shape
    n = np.broadcast_to(np.asarray(n, float), (m, 3)).copy()
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    if v1 is None:
        v1 = E[:, 0] - _dot(E[:, 0], n)[:, None] * n
    v1 = np.broadcast_to(np.asarray(v1, float), (m, 3)).copy()
    v1 /= np.linalg.norm(v1, axis=1, keepdims=True)
    v2 = np.cross(n, v1)
    if family is None:
        family = np.where(np.abs(_dot(E, v2[:, None])) > np.abs(_dot(E, v1[:, None])), 2, 1)
    family = np.broadcast_to(np.asarray(family), (m, k)).copy()
    lengths = np.linalg.norm(E, axis=-1) if lengths is None else np.broadcast_to(np.asarray(lengths, float), (m, k)).copy()
    nan = np.full(m, np.nan)
    return VertexStar(
        vids=-np.ones(m, dtype=np.int64), p=np.zeros((m, 3)), E=E, eids=np.broadcast_to(np.arange(k), (m, k)).copy(),
        family=family, lengths=lengths, v1=v1, v2=v2, n=n,
        k1=nan if k1 is None else np.broadcast_to(np.asarray(k1, float), (m,)).copy(),
        k2=nan if k2 is None else np.broadcast_to(np.asarray(k2, float), (m,)).copy(),
        umbilic=np.zeros(m, bool) if umbilic is None else np.broadcast_to(np.asarray(umbilic, bool), (m,)).copy(),
        boundary=np.zeros(m, bool), status=_classify(E, n),
    )


def build_stars(net: CurvatureLineNet, vids: Sequence[int] | None = None) -> list[VertexStar]:
    """Build stars for many vertices, one batch per valence.

    Parameters
    ----------
    vids : sequence of int, optional
        Vertices to build; defaults to all interior vertices.

    Notes
    -----
    Edge association: at non-umbilic vertices each edge carries the family
    tag of its curvature line.  At umbilics every edge is associated with the
    frame direction that has the larger ``|dot|`` with the edge's initial
    tangent, ties going to family 1.
    """
    vids = net.interior_ids if vids is None else np.asarray(vids, dtype=np.int64)
    pd = net.point_data
    val = net.valence[vids]
    out = []
    for k in np.unique(val):
        if k < 3:
            continue
        ids = vids[val == k]
        eids, far = net.star_arrays(ids)
        p = net.position[ids]
        E = net.position[far] - p[:, None, :]
        v1, v2, n = pd.v1[ids], pd.v2[ids], pd.n[ids]
        fam = net.family[eids].astype(np.int64)
        umb = pd.umbilic[ids]
        if np.any(umb):
            rows = np.flatnonzero(umb)
            t = net.initial_tangents(np.repeat(ids[rows], k), eids[rows].ravel()).reshape(len(rows), k, 3)
            d1 = np.abs(_dot(t, v1[rows, None]))
            d2 = np.abs(_dot(t, v2[rows, None]))
            fam[rows] = np.where(d2 > d1, 2, 1)
        out.append(VertexStar(
            vids=ids, p=p, E=E, eids=eids, family=fam, lengths=net.length[eids],
            v1=v1, v2=v2, n=n, k1=pd.k1[ids], k2=pd.k2[ids], umbilic=umb,
            boundary=net.status[ids] != INTERIOR, status=_classify(E, n),
        ))
    return out


def build_star(net: CurvatureLineNet, vid: int) -> VertexStar:
    """Star of a single interior vertex.

    Raises
    ------
    ValueError
        If the vertex is not interior.
    DegenerateStarError
        On a zero-length edge, a collinear fan pair or an orientation fold
        (the projection to the tangent plane is not orientation preserving).
    """
    if net.status[vid] != INTERIOR:
        raise ValueError(f"vertex {vid} is not interior")
    star = build_stars(net, [vid])[0]
    if star.status[0] != OK:
        raise DegenerateStarError(f"vertex {vid}: {REASONS[int(star.status[0])]}")
    return star


@dataclass
class StarMetrics:
    """Local metrics of a star batch.

    Attributes
    ----------
    eps : (m,)
        Largest intrinsic length of the emanating curved edges.
    rho : (m,)
        Shape regularity ``max(1, eps/|e|, |e||f|/|e x f|)``.
    sampling_ok : (m,) bool
        ``eps <= 1/(16 K rho^2)``; ``None`` when no bound ``K`` was given.
    weak_rho, weak_K : (m,) bool
        The weaker conditions ``eps <= 1/(2 K rho)`` and ``eps <= 1/(2 K)``.
    """

    eps: np.ndarray
    rho: np.ndarray
    sampling_ok: np.ndarray | None = None
    weak_rho: np.ndarray | None = None
    weak_K: np.ndarray | None = None


def sampling_flags(eps, rho, K: float):
    """The sampling condition and its two weaker forms (``K = 0`` always passes)."""
    eps = np.asarray(eps, float)
    rho = np.asarray(rho, float)
    if K <= 0:
        t = np.ones(eps.shape, bool)
        return t, t.copy(), t.copy()
    return eps * 16 * K * rho**2 <= 1.0, eps * 2 * K * rho <= 1.0, eps * 2 * K <= 1.0


def star_metrics(star: VertexStar, K: float | None = None) -> StarMetrics:
    """Compute ``eps`` and ``rho`` (and sampling flags when ``K`` is given)."""
    le = np.linalg.norm(star.E, axis=-1)
    lf = np.roll(le, -1, axis=1)
    eps = star.lengths.max(axis=1)
    cr = np.linalg.norm(np.cross(star.E, star.F), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.maximum.reduce([np.ones(star.m), (eps[:, None] / le).max(1), (le * lf / cr).max(1)])
    if K is None:
        return StarMetrics(eps, rho)
    return StarMetrics(eps, rho, *sampling_flags(eps, rho, K))


@dataclass
class SamplingReport:
    """Per-vertex sampling flags of a net (interior vertices with valence >= 3).

    Attributes
    ----------
    vids, eps, rho : (N,)
    ok : (N,) bool
        ``eps <= 1/(16 K rho^2)``.
    weak_rho, weak_K : (N,) bool
        ``eps <= 1/(2 K rho)`` and ``eps <= 1/(2 K)``.
    K : float
    """

    vids: np.ndarray
    eps: np.ndarray
    rho: np.ndarray
    ok: np.ndarray
    weak_rho: np.ndarray
    weak_K: np.ndarray
    K: float

    @property
    def fraction(self) -> float:
        """Share of vertices satisfying the sampling condition (NaN for an empty net)."""
        return float(self.ok.mean()) if len(self.ok) else float("nan")


def check_sampling(net: CurvatureLineNet, bounds) -> SamplingReport:
    """Evaluate the sampling condition at every interior vertex of ``net``.

    ``bounds`` supplies the curvature bound ``K``; ``K = 0`` (a plane) passes
    trivially.  Degenerate stars still get ``eps`` and ``rho`` (``rho`` may be
    infinite, which fails the condition).

    Examples
    --------
    >>> from curvnet.surface import sphere, estimate_bounds
    >>> from curvnet.netgen import revolution_net
    >>> ch = sphere(1.0)
    >>> coarse = check_sampling(revolution_net(ch, 30, 10), estimate_bounds(ch))
    >>> bool(coarse.ok.any()), round(float(coarse.eps.max()), 3)
    (False, 0.233)
    """
    parts = []
    for star in build_stars(net):
        with np.errstate(divide="ignore", invalid="ignore"):
            met = star_metrics(star, bounds.K)
        parts.append((star.vids, met))
    if not parts:
        z = np.zeros(0)
        return SamplingReport(np.zeros(0, np.int64), z, z, z.astype(bool), z.astype(bool), z.astype(bool), bounds.K)
    vids = np.concatenate([p[0] for p in parts])
    order = np.argsort(vids, kind="stable")

    def cat(attr):
        return np.concatenate([getattr(p[1], attr) for p in parts])[order]

    return SamplingReport(vids[order], cat("eps"), cat("rho"), cat("sampling_ok"), cat("weak_rho"), cat("weak_K"),
                          float(bounds.K))


@dataclass
class FramedEdges:
    """Edge vectors in Darboux coordinates.

    Attributes
    ----------
    x, y, n : (m, k)
        Components along ``v1``, ``v2`` and the normal.
    d : (m, k)
        Tangential deviation: ``|y|`` for family-1 edges, ``|x|`` for family 2.
    family : (m, k)
    """

    x: np.ndarray
    y: np.ndarray
    n: np.ndarray
    d: np.ndarray
    family: np.ndarray


def framed_edges(star: VertexStar) -> FramedEdges:
    x = _dot(star.E, star.v1[:, None])
    y = _dot(star.E, star.v2[:, None])
    z = _dot(star.E, star.n[:, None])
    d = np.where(star.family == 1, np.abs(y), np.abs(x))
    return FramedEdges(x, y, z, d, star.family)


def write_star_obj(star: VertexStar, path, index: int = 0) -> None:
    """OBJ triangle fan of one star of a batch (center is vertex 1)."""
    p = star.p[index]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# curvnet vertex star\n")
        fh.write(f"v {p[0]!r} {p[1]!r} {p[2]!r}\n")
        for q in p + star.E[index]:
            fh.write(f"v {q[0]!r} {q[1]!r} {q[2]!r}\n")
        for i, j in star.triangles():
            fh.write(f"f 1 {i + 2} {j + 2}\n")
