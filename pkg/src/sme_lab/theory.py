"""Non-asymptotic machinery: excitation constants, projection constant,
high-probability diameter bounds, and boundary-visiting rate models.

All bound evaluators set every hidden polylogarithmic factor to one and flag
their output ``up_to_constants``: the absolute probabilities are not
meaningful, only shapes (decay exponents, monotonicity, parameter
dependence) are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sme_lab.geometry import (
    ConvexSupport,
    L2Ball,
    NoiseDistribution,
    ShsCatalog,
    WeightedBox,
    WeightedL1Ball,
    ball_probability,
    default_shs_catalog,
    slice_probability,
)


class CatalogNotCompactError(RuntimeError):
    """The supporting half-space intersection is unbounded (projection
    constant would be nonpositive)."""


@dataclass
class TheoryParams:
    """Excitation and horizon parameters with their derived constants.

    ``b_z`` bounds ``||z_t||_2``; ``sigma_z`` and ``p_z`` are the small-ball
    excitation scale and probability; ``m`` is the excitation window; ``T``
    the horizon; ``delta`` the diameter threshold being tested.
    """

    b_z: float
    sigma_z: float
    p_z: float
    m: int
    T: int
    delta: float
    n_x: int
    n_z: int

    def __post_init__(self):
        if min(self.b_z, self.sigma_z, self.p_z, self.delta) <= 0:
            raise ValueError("b_z, sigma_z, p_z, delta must be positive")
        if not 0 < self.p_z <= 1:
            raise ValueError("p_z is a probability")
        if not 1 <= self.m < self.T:
            raise ValueError("need 1 <= m < T")
        if self.n_x < 1 or self.n_z < 1:
            raise ValueError("dimensions must be positive")

    @property
    def a1(self) -> float:
        return 0.25 * self.sigma_z * self.p_z

    @property
    def a2(self) -> float:
        return max(1.0, 64.0 * self.b_z**2 / (self.sigma_z**2 * self.p_z**2))

    @property
    def a3(self) -> float:
        return 0.125 * self.p_z**2

    @property
    def a4(self) -> float:
        return max(1.0, 4.0 * self.b_z / self.a1)

    def a5(self, xi: float) -> float:
        if not 0 < xi <= 1:
            raise ValueError("xi must be in (0, 1]")
        return max(1.0, 4.0 * self.b_z / (self.a1 * xi))

    @property
    def blocks(self) -> int:
        """Number of excitation blocks, ``ceil(T / m)``."""
        return math.ceil(self.T / self.m)


@dataclass
class RateModel:
    """Boundary-visiting probability lower bound ``min(1, prefactor * eps^p)``."""

    p: float
    prefactor: float | None = None

    def __post_init__(self):
        if self.p <= 0:
            raise ValueError("exponent must be positive")
        if self.prefactor is not None and self.prefactor < 0:
            raise ValueError("prefactor must be nonnegative")

    def probability(self, eps: float) -> float:
        if eps <= 0:
            return 0.0
        pref = 1.0 if self.prefactor is None else self.prefactor
        return min(1.0, pref * eps**self.p)


@dataclass
class BoundResult:
    """One evaluated diameter-tail bound.

    ``term_pe`` bounds the probability that excitation fails; ``term_tail``
    bounds a persistent large diameter despite excitation. ``vacuous`` marks
    totals above one; ``never_decays`` marks an identically-zero visiting
    probability. Values carry unspecified universal constants (set to one).
    """

    term_pe: float
    term_tail: float
    total: float
    vacuous: bool
    never_decays: bool
    up_to_constants: bool = True

    def __iter__(self):
        yield self.term_pe
        yield self.term_tail
        yield self.total


def _term_pe(params: TheoryParams) -> float:
    return (
        (params.T / params.m)
        * params.n_z**2.5
        * params.a2**params.n_z
        * math.exp(-params.a3 * params.m)
    )


def _tail(params: TheoryParams, visit_prob: float, a_cover: float) -> tuple[float, bool]:
    exponent = params.blocks - 1
    dim = params.n_x * params.n_z
    base = dim**2.5 * a_cover**dim
    if visit_prob <= 0.0:
        return base, True  # bound never decays in T
    return base * (1.0 - visit_prob) ** exponent, False


def theorem1_bound(params: TheoryParams, qw: RateModel) -> BoundResult:
    """Tail bound driven by the pointwise (ball) boundary-visiting rate."""
    term1 = _term_pe(params)
    q_hat = qw.probability(params.a1 * params.delta / 4.0)
    term2, never = _tail(params, q_hat, params.a4)
    total = max(term1 + term2, 0.0)
    return BoundResult(term1, term2, total, total > 1.0, never)


def theorem2_bound(params: TheoryParams, pw: RateModel, xi: float) -> BoundResult:
    """Tail bound driven by the slice visiting rate and projection constant."""
    term1 = _term_pe(params)
    p_hat = pw.probability(params.a1 * params.delta * xi / 4.0)
    term3, never = _tail(params, p_hat, params.a5(xi))
    total = max(term1 + term3, 0.0)
    return BoundResult(term1, term3, total, total > 1.0, never)


def corollary_rate(rate: RateModel, xi: float, n_x: int, n_z: int, T: int) -> float:
    """Diameter decay rate ``(1/xi) * (n_x n_z / T)^(1/p)``, constants dropped."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if not 0 < xi <= 1:
        raise ValueError("xi must be in (0, 1]")
    return (1.0 / xi) * (n_x * n_z / T) ** (1.0 / rate.p)


# ---------------------------------------------------------------------------
# projection constant
# ---------------------------------------------------------------------------


def _max_alignment(normals, X):
    """f(x) = max_h h @ x evaluated for unit columns ``X`` (d, N)."""
    return (normals @ X).max(axis=0)


def _xi_2d(normals, tol):
    ang = np.linspace(0.0, 2.0 * np.pi, 8192, endpoint=False)
    X = np.stack([np.cos(ang), np.sin(ang)])
    vals = _max_alignment(normals, X)
    i = int(np.argmin(vals))
    lo = ang[i - 1]
    hi = ang[(i + 1) % ang.size]
    if hi < lo:
        hi += 2.0 * np.pi

    def f(a):
        return float((normals @ np.array([math.cos(a), math.sin(a)])).max())

    # the minimum of a max-of-cosines is locally V-shaped: ternary search
    while hi - lo > tol * 1e-3:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    return f(0.5 * (lo + hi))


def _fibonacci_sphere(n):
    i = np.arange(n) + 0.5
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z])


def _polish(normals, x0, rng, rounds=60, samples=64):
    """Shrinking random local search on the sphere around ``x0``."""
    d = x0.shape[0]
    best = x0 / np.linalg.norm(x0)
    best_val = float(_max_alignment(normals, best[:, None])[0])
    radius = 0.3
    for _ in range(rounds):
        P = best[:, None] + radius * rng.normal(size=(d, samples))
        P /= np.linalg.norm(P, axis=0, keepdims=True)
        vals = _max_alignment(normals, P)
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val = float(vals[j])
            best = P[:, j]
        radius *= 0.75
    return best, best_val


def compute_xi(catalog: ShsCatalog, method: str = "auto", seed: int = 0, tol: float = 1e-6) -> float:
    """Projection constant ``xi = min_{||x||=1} max_{h in H} h @ x``.

    Continuum catalogs short-circuit to their hint. In dimension <= 3 a
    dense sphere grid with local refinement reaches ``tol`` accuracy (the
    objective is 1-Lipschitz, so the grid also certifies a lower bound).
    Higher dimensions run multistart projected subgradient descent followed
    by a local polish; the result is then a certified upper bound on xi.

    Raises CatalogNotCompactError when the computed value is nonpositive,
    which happens exactly when the half-space intersection is unbounded.
    """
    if catalog.continuum:
        return float(catalog.xi_hint if catalog.xi_hint is not None else 1.0)
    if catalog.size == 0:
        raise ValueError("catalog is empty")
    H = np.asarray(catalog.normals, dtype=float)
    d = H.shape[1]

    if method not in ("auto", "exact_small_dim", "multistart_projected_descent"):
        raise ValueError(f"unknown method {method!r}")
    use_grid = method == "exact_small_dim" or (method == "auto" and d <= 3)
    if use_grid and d > 3:
        raise ValueError("exact_small_dim only supports dimension <= 3")

    if d == 1:
        xi = min(max(H[:, 0] * s) for s in (1.0, -1.0))
    elif use_grid and d == 2:
        xi = _xi_2d(H, tol)
    elif use_grid and d == 3:
        X = _fibonacci_sphere(60_000)
        vals = _max_alignment(H, X)
        x0 = X[:, int(np.argmin(vals))]
        rng = np.random.default_rng(seed)
        _, xi = _polish(H, x0, rng, rounds=80, samples=128)
    else:
        rng = np.random.default_rng(seed)
        best_val = np.inf
        best_x = None
        for _ in range(200):
            x = rng.normal(size=d)
            x /= np.linalg.norm(x)
            step = 0.5
            for k in range(1, 120):
                j = int(np.argmax(H @ x))
                x = x - (step / k) * H[j]
                n = np.linalg.norm(x)
                if n < 1e-12:
                    break
                x /= n
            val = float(_max_alignment(H, x[:, None])[0])
            if val < best_val:
                best_val, best_x = val, x
        _, xi = _polish(H, best_x, rng, rounds=80, samples=128)

    if xi <= 0:
        raise CatalogNotCompactError(
            "projection constant is nonpositive: the catalog half-spaces do not "
            "bound a compact set"
        )
    return float(min(xi, 1.0))


# ---------------------------------------------------------------------------
# analytic boundary-visiting rates and Monte-Carlo calibration
# ---------------------------------------------------------------------------


def analytic_boundary_rates(W: ConvexSupport) -> tuple[RateModel, RateModel]:
    """Cataloged (ball-rate, slice-rate) exponents for the standard shapes.

    Boxes and l1 balls: ball exponent ``n``, slice exponent 1. Euclidean
    ball: ball exponent ``n``, slice exponent ``(n + 1) / 2``. Other
    polytopes with facet catalogs: slice exponent 1 and the worst-case
    vertex ball exponent ``n``.
    """
    n = W.dim
    if isinstance(W, (WeightedBox, WeightedL1Ball)):
        return RateModel(float(n)), RateModel(1.0)
    if isinstance(W, L2Ball):
        return RateModel(float(n)), RateModel((n + 1) / 2.0)
    from sme_lab.geometry import HPolytope

    if isinstance(W, HPolytope):
        return RateModel(float(n)), RateModel(1.0)
    raise ValueError(f"no cataloged exponents for {type(W).__name__}; supply a RateModel")


@dataclass
class SlopeFit:
    """Least-squares fit of log-probability against log-eps."""

    slope: float
    prefactor: float
    eps: np.ndarray
    probs: np.ndarray


def fit_loglog(eps, probs) -> SlopeFit:
    eps = np.asarray(eps, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if np.any(probs <= 0):
        raise ValueError("all probabilities must be positive for a log-log fit")
    slope, intercept = np.polyfit(np.log(eps), np.log(probs), 1)
    return SlopeFit(float(slope), float(np.exp(intercept)), eps, probs)


def calibrate_rates(
    dist: NoiseDistribution,
    catalog: ShsCatalog | None = None,
    eps_grid=(0.05, 0.1, 0.2),
    n_mc: int = 200_000,
    seed: int = 0,
) -> dict:
    """Monte-Carlo prefactor calibration for the cataloged rate exponents.

    Slice probabilities are evaluated at (up to 8) catalog entries and the
    minimum is used (the slice rate is a uniform lower bound over the
    catalog); the ball probability is evaluated at a worst boundary point
    (a vertex for polytopes, any point for the ball). Returns rate models
    with fitted prefactors plus the raw fits.
    """
    W = dist.support
    qw, pw = analytic_boundary_rates(W)
    catalog = catalog or default_shs_catalog(W)
    rng = np.random.default_rng(seed)

    if catalog.continuum:
        h = np.zeros(W.dim)
        h[0] = -1.0
        _, c = W.support_argmin(h)
        entries = [(c, h)]
    else:
        take = min(catalog.size, 8)
        entries = [(catalog.points[i], catalog.normals[i]) for i in range(take)]

    slice_probs = []
    for eps in eps_grid:
        p = min(
            slice_probability(dist, c, h, eps, n_mc, rng).value for (c, h) in entries
        )
        slice_probs.append(max(p, 1.0 / n_mc))
    slice_fit = fit_loglog(eps_grid, slice_probs)

    w0 = _worst_boundary_point(W)
    ball_probs = []
    for eps in eps_grid:
        p = ball_probability(dist, w0, eps, n_mc, rng).value
        ball_probs.append(max(p, 1.0 / n_mc))
    ball_fit = fit_loglog(eps_grid, ball_probs)

    qw_cal = RateModel(qw.p, math.exp(np.mean(np.log(ball_probs) - qw.p * np.log(eps_grid))))
    pw_cal = RateModel(pw.p, math.exp(np.mean(np.log(slice_probs) - pw.p * np.log(eps_grid))))
    return {
        "qw": qw_cal,
        "pw": pw_cal,
        "slice_fit": slice_fit,
        "ball_fit": ball_fit,
    }


def _worst_boundary_point(W: ConvexSupport) -> np.ndarray:
    """A boundary point with the thinnest neighborhood (vertex if any)."""
    if isinstance(W, WeightedBox):
        return W.a.copy()
    if isinstance(W, WeightedL1Ball):
        v = np.zeros(W.dim)
        v[int(np.argmin(W.a))] = W.a.min()
        return v
    if isinstance(W, L2Ball):
        v = np.zeros(W.dim)
        v[0] = W.r
        return v
    from sme_lab.geometry import CircumscribedPolygon, HPolytope

    if isinstance(W, CircumscribedPolygon):
        return W.vertices()[0]
    if isinstance(W, HPolytope):
        e = np.zeros(W.dim)
        e[0] = 1.0
        return W.support_argmin(e)[1]
    raise ValueError(f"no boundary heuristic for {type(W).__name__}")
