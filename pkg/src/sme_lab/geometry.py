"""Convex noise bounds: membership, support functions, separation, sampling.

Every bound is a compact convex body with the origin strictly inside. The
supported shapes are weighted boxes, weighted l1 balls, Euclidean balls,
bounded H-polytopes with unit facet normals, and regular polygons
circumscribing a disk. Each shape answers exact membership queries, exposes
its support function, produces separating half-spaces for outside points,
and can be sampled (uniformly or with a truncated standard Gaussian).

Half-space conventions:
  * ``separate`` returns ``(v, b)`` with ``v`` a unit vector such that
    ``v @ x >= b`` for every point of the body and ``v @ w < b`` for the
    query point ``w``.
  * supporting half-spaces are stored as ``(c, h)`` where ``c`` is a
    boundary point and ``h`` a unit inward normal: ``h @ x >= h @ c`` on
    the body.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sme_lab.simplex import OPTIMAL, solve_box_lp

_UNIT_TOL = 1e-9
# synthetic box used only to probe polytope boundedness at construction
_PROBE_RADIUS = 1e9


class GeometryError(ValueError):
    """Invalid shape parameters or dimension mismatch."""


class UnboundedSupportError(GeometryError):
    """H-polytope rows do not describe a bounded set."""


class RejectionRateError(RuntimeError):
    """Rejection sampler acceptance fell below the safety floor."""


def _check_unit(v):
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
        raise GeometryError(f"direction must be a unit vector, got norm {np.linalg.norm(v)!r}")
    return v


class ConvexSupport:
    """Base interface shared by all noise-bound shapes."""

    dim: int

    # -- membership -------------------------------------------------------

    def violation(self, w) -> float:
        """Euclidean half-space defect of ``w``: <= 0 inside, > 0 outside."""
        w = self._check_dim(w)
        return float(self.violations(w[None, :])[0])

    def violations(self, batch) -> np.ndarray:
        raise NotImplementedError

    def contains(self, w, tol: float = 0.0) -> bool:
        """Exact closed-set membership; ``tol`` inflates the body slightly."""
        return self.violation(w) <= tol

    def contains_all(self, batch, tol: float = 0.0) -> bool:
        batch = np.asarray(batch, dtype=float).reshape(-1, self.dim)
        if batch.shape[0] == 0:
            return True
        return bool(self.violations(batch).max() <= tol)

    # -- support function --------------------------------------------------

    def support_min(self, v) -> float:
        """min over the body of ``v @ w`` for a unit direction ``v``."""
        raise NotImplementedError

    def support_argmin(self, v):
        """A boundary point attaining ``support_min(v)``; ``(v, point)`` is a SHS pair."""
        raise NotImplementedError

    def separate(self, w):
        """None if ``w`` is in the body, else a separating half-space ``(v, b)``."""
        raise NotImplementedError

    # -- misc ---------------------------------------------------------------

    def bounding_radius(self) -> float:
        """Radius of a Euclidean ball centred at 0 containing the body."""
        raise NotImplementedError

    def bounding_box(self) -> np.ndarray:
        """Per-coordinate half-widths of an axis-aligned box containing the body."""
        r = self.bounding_radius()
        return np.full(self.dim, r)

    def width_along(self, h) -> float:
        """Extent of the body along unit direction ``h``."""
        h = _check_unit(h)
        return -self.support_min(h) - self.support_min(-h)

    def to_config(self) -> dict:
        raise NotImplementedError

    def name(self) -> str:
        return self.to_config()["kind"]

    def _check_dim(self, w):
        w = np.asarray(w, dtype=float).reshape(-1)
        if w.shape[0] != self.dim:
            raise GeometryError(f"expected dimension {self.dim}, got {w.shape[0]}")
        return w

    # uniform sampling hook; overridden where a direct sampler exists
    def _sample_uniform(self, rng, count) -> np.ndarray:
        return _rejection_from_box(self, rng, count)


@dataclass(frozen=True)
class WeightedBox(ConvexSupport):
    """Axis-aligned box ``prod_i [-a_i, a_i]`` with positive half-widths."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(-1)
        if a.size == 0 or np.any(a <= 0):
            raise GeometryError("box half-widths must be positive")
        object.__setattr__(self, "a", a)

    @property
    def dim(self):
        return self.a.shape[0]

    def violations(self, batch):
        batch = np.asarray(batch, dtype=float)
        return (np.abs(batch) - self.a).max(axis=1)

    def support_min(self, v):
        v = _check_unit(self._check_dim(v))
        return float(-(self.a * np.abs(v)).sum())

    def support_argmin(self, v):
        v = _check_unit(self._check_dim(v))
        point = np.where(v >= 0, -self.a, self.a)
        return float(v @ point), point

    def separate(self, w):
        w = self._check_dim(w)
        i = int(np.argmax(np.abs(w) - self.a))
        if abs(w[i]) <= self.a[i]:
            return None
        v = np.zeros(self.dim)
        v[i] = -math.copysign(1.0, w[i])
        return v, -float(self.a[i])

    def bounding_radius(self):
        return float(np.linalg.norm(self.a))

    def bounding_box(self):
        return self.a.copy()

    def facets(self):
        """(outward unit normal, offset) pairs: ``g @ x <= c`` per facet."""
        eye = np.eye(self.dim)
        G = np.vstack([eye, -eye])
        c = np.concatenate([self.a, self.a])
        return G, c

    def to_config(self):
        return {"kind": "box", "a": [float(x) for x in self.a]}


@dataclass(frozen=True)
class WeightedL1Ball(ConvexSupport):
    """Cross-polytope ``{w : sum_i |w_i| / a_i <= 1}``."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(-1)
        if a.size == 0 or np.any(a <= 0):
            raise GeometryError("l1-ball weights must be positive")
        object.__setattr__(self, "a", a)

    @property
    def dim(self):
        return self.a.shape[0]

    def _facet_normal(self, signs):
        g = signs / self.a
        nrm = np.linalg.norm(g)
        return g / nrm, 1.0 / nrm

    def violations(self, batch):
        batch = np.asarray(batch, dtype=float)
        # defect measured against the facet of the active orthant
        scaled = (np.abs(batch) / self.a).sum(axis=1) - 1.0
        norms = np.linalg.norm(np.sign(batch) / self.a, axis=1)
        norms = np.where(norms == 0, np.linalg.norm(1.0 / self.a), norms)
        return scaled / norms

    def support_min(self, v):
        v = _check_unit(self._check_dim(v))
        # minimum over the vertices ±a_i e_i
        return float(-(self.a * np.abs(v)).max())

    def support_argmin(self, v):
        v = _check_unit(self._check_dim(v))
        i = int(np.argmax(self.a * np.abs(v)))
        point = np.zeros(self.dim)
        point[i] = -math.copysign(self.a[i], v[i]) if v[i] != 0 else self.a[i]
        return float(v @ point), point

    def separate(self, w):
        w = self._check_dim(w)
        if (np.abs(w) / self.a).sum() <= 1.0:
            return None
        signs = np.where(w >= 0, 1.0, -1.0)
        g, offset = self._facet_normal(signs)
        return -g, -offset

    def bounding_radius(self):
        return float(self.a.max())

    def bounding_box(self):
        return self.a.copy()

    def facets(self):
        n = self.dim
        if n > 16:
            raise GeometryError("l1-ball facet enumeration limited to dimension 16")
        G = np.empty((2**n, n))
        c = np.empty(2**n)
        for idx in range(2**n):
            signs = np.array([1.0 if (idx >> j) & 1 else -1.0 for j in range(n)])
            G[idx], c[idx] = self._facet_normal(signs)
        return G, c

    def to_config(self):
        return {"kind": "l1ball", "a": [float(x) for x in self.a]}

    def _sample_uniform(self, rng, count):
        # exponential spacings give the flat Dirichlet on the simplex; signs and
        # the U^(1/n) radial factor extend it to the full ball, exactly uniform
        n = self.dim
        e = rng.exponential(1.0, size=(count, n))
        p = e / e.sum(axis=1, keepdims=True)
        signs = rng.integers(0, 2, size=(count, n)) * 2.0 - 1.0
        radial = rng.uniform(size=(count, 1)) ** (1.0 / n)
        return self.a * signs * p * radial


@dataclass(frozen=True)
class L2Ball(ConvexSupport):
    """Euclidean ball of radius ``r`` centred at the origin."""

    r: float
    ndim: int

    def __post_init__(self):
        if self.r <= 0 or self.ndim < 1:
            raise GeometryError("ball needs positive radius and dimension")

    @property
    def dim(self):
        return self.ndim

    def violations(self, batch):
        batch = np.asarray(batch, dtype=float)
        return np.linalg.norm(batch, axis=1) - self.r

    def support_min(self, v):
        _check_unit(self._check_dim(v))
        return -float(self.r)

    def support_argmin(self, v):
        v = _check_unit(self._check_dim(v))
        return -float(self.r), -self.r * v

    def separate(self, w):
        w = self._check_dim(w)
        nrm = np.linalg.norm(w)
        if nrm <= self.r:
            return None
        return -w / nrm, -float(self.r)

    def bounding_radius(self):
        return float(self.r)

    def to_config(self):
        return {"kind": "l2ball", "r": float(self.r), "dim": self.dim}

    def _sample_uniform(self, rng, count):
        g = rng.normal(size=(count, self.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        radial = rng.uniform(size=(count, 1)) ** (1.0 / self.dim)
        return self.r * g * radial


class HPolytope(ConvexSupport):
    """Bounded intersection of half-spaces ``g_i @ x <= c_i`` with unit ``g_i``.

    The origin must lie strictly inside (all ``c_i > 0``); boundedness is
    verified at construction by maximizing the support along each of the
    ±coordinate axes inside a large probe box.
    """

    def __init__(self, G, c):
        G = np.asarray(G, dtype=float)
        c = np.asarray(c, dtype=float).reshape(-1)
        if G.ndim != 2 or G.shape[0] != c.shape[0] or G.shape[0] == 0:
            raise GeometryError("H-polytope rows malformed")
        norms = np.linalg.norm(G, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise GeometryError("H-polytope facet normals must have unit norm")
        if np.any(c <= 0):
            raise GeometryError("origin must be strictly inside (offsets must be positive)")
        self.G = G
        self.c = c
        self._dim = G.shape[1]
        self._bbox = self._probe_bounded()

    @property
    def dim(self):
        return self._dim

    def _probe_bounded(self):
        lo = np.empty(self._dim)
        hi = np.empty(self._dim)
        probe_lo = np.full(self._dim, -_PROBE_RADIUS)
        probe_hi = np.full(self._dim, _PROBE_RADIUS)
        for k in range(self._dim):
            e = np.zeros(self._dim)
            e[k] = 1.0
            res_hi = solve_box_lp(e, self.G, self.c, probe_lo, probe_hi)
            res_lo = solve_box_lp(-e, self.G, self.c, probe_lo, probe_hi)
            if res_hi.status != OPTIMAL or res_lo.status != OPTIMAL:
                raise UnboundedSupportError("support probe failed; rows may be inconsistent")
            hi[k] = res_hi.value
            lo[k] = -res_lo.value
            if max(abs(hi[k]), abs(lo[k])) > 0.99 * _PROBE_RADIUS:
                raise UnboundedSupportError("half-space intersection is unbounded")
        return lo, hi

    def violations(self, batch):
        batch = np.asarray(batch, dtype=float)
        return (batch @ self.G.T - self.c).max(axis=1)

    def support_min(self, v):
        v = _check_unit(self._check_dim(v))
        return self.support_argmin(v)[0]

    def support_argmin(self, v):
        v = _check_unit(self._check_dim(v))
        lo, hi = self._bbox
        res = solve_box_lp(-v, self.G, self.c, lo - 1.0, hi + 1.0)
        if res.status != OPTIMAL:
            raise UnboundedSupportError("support LP failed on a supposedly bounded polytope")
        return -res.value, res.x

    def separate(self, w):
        w = self._check_dim(w)
        slack = self.G @ w - self.c
        i = int(np.argmax(slack))
        if slack[i] <= 0:
            return None
        return -self.G[i], -float(self.c[i])

    def bounding_radius(self):
        lo, hi = self._bbox
        return float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))))

    def bounding_box(self):
        lo, hi = self._bbox
        return np.maximum(np.abs(lo), np.abs(hi))

    def facets(self):
        return self.G.copy(), self.c.copy()

    def to_config(self):
        return {
            "kind": "hpolytope",
            "G": [[float(x) for x in row] for row in self.G],
            "c": [float(x) for x in self.c],
        }

    def facet_interior_point(self, i):
        """A relative-interior point of facet ``i`` (average of extreme points).

        Returns None when row ``i`` is redundant (never binding).
        """
        lo, hi = self._bbox
        rows = np.vstack([self.G, -self.G[i][None, :]])
        offs = np.concatenate([self.c, [-self.c[i]]])
        pts = []
        for k in range(self._dim):
            for sgn in (1.0, -1.0):
                e = np.zeros(self._dim)
                e[k] = sgn
                res = solve_box_lp(e, rows, offs, lo - 1.0, hi + 1.0)
                if res.status != OPTIMAL:
                    return None
                pts.append(res.x)
        return np.mean(pts, axis=0)


class CircumscribedPolygon(HPolytope):
    """Regular ``k``-gon circumscribing the disk of radius ``r`` in the plane.

    Facet ``j`` is tangent to the disk at angle ``2*pi*j/k``; the first facet
    normal points along the positive x-axis, so the first tangency point is
    ``(r, 0)``. For ``k = 4`` this makes the polygon the axis-aligned square
    ``[-r, r]^2``.
    """

    def __init__(self, k: int, r: float):
        if k < 3:
            raise GeometryError("polygon needs at least 3 facets")
        if r <= 0:
            raise GeometryError("polygon radius must be positive")
        self.k = int(k)
        self.r = float(r)
        ang = 2.0 * np.pi * np.arange(k) / k
        G = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        super().__init__(G, np.full(k, float(r)))

    def vertices(self):
        rho = self.r / math.cos(math.pi / self.k)
        ang = np.pi * (2.0 * np.arange(self.k) + 1.0) / self.k
        return rho * np.stack([np.cos(ang), np.sin(ang)], axis=1)

    def support_min(self, v):
        v = _check_unit(self._check_dim(v))
        return float((self.vertices() @ v).min())

    def support_argmin(self, v):
        v = _check_unit(self._check_dim(v))
        verts = self.vertices()
        vals = verts @ v
        i = int(np.argmin(vals))
        return float(vals[i]), verts[i]

    def bounding_radius(self):
        return self.r / math.cos(math.pi / self.k)

    def to_config(self):
        return {"kind": "polygon", "k": self.k, "r": self.r}

    def name(self):
        return f"polygon{self.k}"

    def facet_interior_point(self, i):
        ang = 2.0 * math.pi * i / self.k
        return self.r * np.array([math.cos(ang), math.sin(ang)])


def support_from_config(cfg: dict, dim: int | None = None) -> ConvexSupport:
    """Build a shape from its serialized form; ``dim`` disambiguates balls."""
    kind = cfg.get("kind")
    if kind == "box":
        return WeightedBox(np.asarray(cfg["a"], dtype=float))
    if kind == "l1ball":
        return WeightedL1Ball(np.asarray(cfg["a"], dtype=float))
    if kind == "l2ball":
        n = cfg.get("dim", dim)
        if n is None:
            raise GeometryError("l2ball config needs a dimension (inline 'dim' or context)")
        return L2Ball(float(cfg["r"]), int(n))
    if kind == "polygon":
        return CircumscribedPolygon(int(cfg["k"]), float(cfg["r"]))
    if kind == "hpolytope":
        return HPolytope(np.asarray(cfg["G"], dtype=float), np.asarray(cfg["c"], dtype=float))
    raise GeometryError(f"unknown support kind {kind!r}")


# ---------------------------------------------------------------------------
# supporting half-space catalogs
# ---------------------------------------------------------------------------


@dataclass
class ShsCatalog:
    """Finite collection of supporting half-spaces ``(c_i, h_i)`` of a body.

    ``continuum=True`` marks the smooth-body case where the catalog is the
    entire boundary and the normal set is the whole unit sphere; the
    projection constant is then ``xi_hint`` (1 for a ball).
    """

    points: np.ndarray
    normals: np.ndarray
    continuum: bool = False
    xi_hint: float | None = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        if self.points.shape != self.normals.shape:
            raise GeometryError("catalog points and normals must pair up")

    @property
    def size(self):
        return self.normals.shape[0]

    def validate_against(self, support: ConvexSupport, tol: float = 1e-7):
        """Check each entry is a genuine supporting half-space of ``support``."""
        for c, h in zip(self.points, self.normals):
            h = _check_unit(h)
            smin = support.support_min(h)
            if not (h @ c <= smin + tol and h @ c >= smin - tol):
                raise GeometryError("catalog entry is not a tight supporting half-space")

    def check_compact(self, tol: float = 1e-6) -> bool:
        """True iff the intersection of the catalog half-spaces is bounded.

        Probed by maximizing ± each coordinate inside a large synthetic box;
        a support value at the probe wall flags an unbounded intersection.
        """
        if self.continuum:
            return True
        n = self.normals.shape[1]
        offsets = np.einsum("ij,ij->i", self.normals, self.points)
        rows = -self.normals  # h @ x >= h @ c  ->  -h @ x <= -offset
        probe_lo = np.full(n, -_PROBE_RADIUS)
        probe_hi = np.full(n, _PROBE_RADIUS)
        for k in range(n):
            for sgn in (1.0, -1.0):
                e = np.zeros(n)
                e[k] = sgn
                res = solve_box_lp(e, rows, -offsets, probe_lo, probe_hi)
                if res.status != OPTIMAL or res.value > 0.99 * _PROBE_RADIUS:
                    return False
        return True


def default_shs_catalog(support: ConvexSupport) -> ShsCatalog:
    """Natural catalog for each shape: one interior facet point per facet.

    Polytopes contribute one (facet point, inward facet normal) pair per
    facet; the Euclidean ball gets the continuum catalog with projection
    constant 1.
    """
    if isinstance(support, L2Ball):
        return ShsCatalog(
            points=np.empty((0, support.dim)),
            normals=np.empty((0, support.dim)),
            continuum=True,
            xi_hint=1.0,
        )
    if isinstance(support, WeightedBox):
        n = support.dim
        points = []
        normals = []
        for i in range(n):
            for sgn in (1.0, -1.0):
                c = np.zeros(n)
                c[i] = sgn * support.a[i]
                h = np.zeros(n)
                h[i] = -sgn
                points.append(c)
                normals.append(h)
        return ShsCatalog(np.array(points), np.array(normals))
    if isinstance(support, WeightedL1Ball):
        G, offs = support.facets()
        # facet for sign pattern s touches at the centroid of its vertices
        points = []
        for g, off in zip(G, offs):
            verts = []
            for i in range(support.dim):
                v = np.zeros(support.dim)
                v[i] = math.copysign(support.a[i], g[i]) if g[i] != 0 else support.a[i]
                verts.append(v)
            points.append(np.mean(verts, axis=0))
        return ShsCatalog(np.array(points), -G)
    if isinstance(support, HPolytope):  # includes CircumscribedPolygon
        points = []
        normals = []
        for i in range(support.G.shape[0]):
            p = support.facet_interior_point(i)
            if p is None:
                continue  # redundant row, not a facet
            points.append(p)
            normals.append(-support.G[i])
        if not points:
            raise GeometryError("polytope has no facets")
        return ShsCatalog(np.array(points), np.array(normals))
    raise GeometryError(f"no default catalog for {type(support).__name__}")


# ---------------------------------------------------------------------------
# noise distributions
# ---------------------------------------------------------------------------

UNIFORM = "uniform"
TRUNCATED_GAUSSIAN = "truncated_gaussian"

_REJECTION_PROBE = 4096
_REJECTION_FLOOR = 1e-4


@dataclass
class NoiseDistribution:
    """A law supported on a convex body; sampling is seed-deterministic."""

    support: ConvexSupport
    law: str = UNIFORM
    seed: int = 0

    def __post_init__(self):
        if self.law not in (UNIFORM, TRUNCATED_GAUSSIAN):
            raise GeometryError(f"unknown law {self.law!r}")

    @property
    def dim(self):
        return self.support.dim

    def sample(self, count: int, rng: np.random.Generator | None = None) -> np.ndarray:
        """Draw ``count`` i.i.d. points; a fresh generator from ``seed`` is
        used when no ``rng`` is passed, so repeated calls repeat the draw."""
        if count < 1:
            raise GeometryError("count must be >= 1")
        if rng is None:
            rng = np.random.default_rng(self.seed)
        if self.law == UNIFORM:
            return self.support._sample_uniform(rng, count)
        return _truncated_gaussian(self.support, rng, count)

    def analytic_cov_trace(self) -> float | None:
        """trace of the noise covariance where a closed form exists."""
        s = self.support
        if self.law != UNIFORM:
            return None
        if isinstance(s, WeightedBox):
            return float((s.a**2).sum() / 3.0)
        if isinstance(s, L2Ball):
            return float(s.dim * s.r**2 / (s.dim + 2))
        if isinstance(s, WeightedL1Ball):
            n = s.dim
            return float((s.a**2).sum() * 2.0 / ((n + 1) * (n + 2)))
        return None

    def cov_trace(self, n_mc: int = 1_000_000, seed: int = 12345) -> float:
        """Covariance trace; Monte-Carlo fallback when no closed form exists."""
        exact = self.analytic_cov_trace()
        if exact is not None:
            return exact
        rng = np.random.default_rng(seed)
        w = self.sample(n_mc, rng)
        return float(w.var(axis=0, ddof=1).sum())

    def to_config(self) -> dict:
        return {"law": self.law, "support": self.support.to_config()}


def _rejection_from_box(support, rng, count):
    half = support.bounding_box()
    return _rejection_sample(
        support, rng, count, lambda n: rng.uniform(-half, half, size=(n, support.dim))
    )


def _truncated_gaussian(support, rng, count):
    return _rejection_sample(
        support, rng, count, lambda n: rng.normal(size=(n, support.dim))
    )


def _rejection_sample(support, rng, count, proposal):
    out = np.empty((count, support.dim))
    filled = 0
    probe = proposal(_REJECTION_PROBE)
    keep = probe[support.violations(probe) <= 0.0]
    rate = max(keep.shape[0] / _REJECTION_PROBE, 0.0)
    if rate < _REJECTION_FLOOR:
        raise RejectionRateError(
            f"acceptance rate {rate:.2e} below {_REJECTION_FLOOR}; "
            "support too small relative to the proposal"
        )
    take = min(count, keep.shape[0])
    out[:take] = keep[:take]
    filled = take
    while filled < count:
        n = int((count - filled) / max(rate, 1e-3) * 1.2) + 16
        batch = proposal(n)
        keep = batch[support.violations(batch) <= 0.0]
        take = min(count - filled, keep.shape[0])
        out[filled : filled + take] = keep[:take]
        filled += take
    return out


# ---------------------------------------------------------------------------
# Monte-Carlo boundary-event probabilities
# ---------------------------------------------------------------------------


@dataclass
class ProbabilityEstimate:
    value: float
    ci_half: float
    n_mc: int

    def __iter__(self):  # allow tuple-unpacking (p, ci)
        yield self.value
        yield self.ci_half


def _mc_probability(dist, event, n_mc, rng):
    if rng is None:
        rng = np.random.default_rng(dist.seed)
    hits = 0
    remaining = n_mc
    while remaining > 0:
        n = min(remaining, 1_000_000)
        w = dist.sample(n, rng)
        hits += int(event(w).sum())
        remaining -= n
    p = hits / n_mc
    # continuity floor keeps the interval nonzero at rare events
    ci = 1.96 * math.sqrt(max(p * (1.0 - p), 1.0 / n_mc) / n_mc)
    return ProbabilityEstimate(p, ci, n_mc)


def slice_probability(dist, c, h, eps, n_mc=100_000, rng=None):
    """P(h@c + eps >= h@w >= h@c) for a supporting half-space ``(c, h)``.

    Returns a ProbabilityEstimate with a 95% normal-approximation interval.
    """
    c = np.asarray(c, dtype=float)
    h = _check_unit(h)
    if eps <= 0:
        raise GeometryError("eps must be positive")
    level = float(h @ c)
    smin = dist.support.support_min(h)
    if abs(level - smin) > 1e-6:
        raise GeometryError("(c, h) is not a supporting half-space of the support set")
    def event(w):
        proj = w @ h
        return (proj >= level - 1e-12) & (proj <= level + eps)
    return _mc_probability(dist, event, n_mc, rng)


def ball_probability(dist, w0, eps, n_mc=100_000, rng=None):
    """P(||w - w0||_2 < eps) for a point ``w0`` of the support (usually on
    its boundary)."""
    w0 = np.asarray(w0, dtype=float)
    if eps <= 0:
        raise GeometryError("eps must be positive")
    if not dist.support.contains(w0, tol=1e-9):
        raise GeometryError("w0 must belong to the support set")
    def event(w):
        return np.linalg.norm(w - w0, axis=1) < eps
    return _mc_probability(dist, event, n_mc, rng)
