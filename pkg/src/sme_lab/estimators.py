"""End-to-end set estimation over a trajectory and the least-squares benchmark.

``run_sme`` streams the transitions of one trajectory into a membership set
(possibly built with an outer-approximation of the true noise bound) and
records certified diameter bounds at the requested checkpoints.

``lse_fit`` computes the ridge-regularized least-squares estimate together
with the self-normalized confidence radius
``beta = sqrt(vp * 2 * log(det(V)^1/2 det(lam I)^-1/2 / delta)) + sqrt(lam) * S``
where ``vp`` is the noise variance proxy and ``S`` an a-priori bound on the
Frobenius norm of the true parameter. The confidence region is
``{theta : ||(theta - theta_hat) V^1/2||_F <= beta}``; its Euclidean-norm
diameter along the weakest direction of the Gram matrix is
``2 beta / sqrt(lambda_min(V))``, which is what gets reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sme_lab.geometry import ConvexSupport
from sme_lab.lti import Trajectory
from sme_lab.membership import (
    STATUS_INFEASIBLE,
    DiameterConfig,
    EmptyMembershipSet,
    MembershipSet,
)

_COND_LIMIT = 1e12


@dataclass
class SmeCheckpoint:
    t: int
    diam_lower: float
    diam_upper: float
    status: str
    prior_active: bool


@dataclass
class SmeFailure:
    """The assumed noise bound could not explain some transition."""

    t: int
    message: str


@dataclass
class SmeRunResult:
    checkpoints: list[SmeCheckpoint]
    failure: SmeFailure | None
    membership: MembershipSet

    @property
    def ok(self):
        return self.failure is None


def default_checkpoints(T: int, first: int = 25) -> list[int]:
    """Geometric grid ``first, 2*first, 4*first, ...`` capped and closed at T."""
    if T < 1:
        return []
    pts = []
    t = first
    while t < T:
        pts.append(t)
        t *= 2
    pts.append(T)
    return sorted(set(p for p in pts if 0 < p <= T))


def run_sme(
    traj: Trajectory,
    W_used: ConvexSupport,
    checkpoints=None,
    cfg: DiameterConfig | None = None,
) -> SmeRunResult:
    """Sequential set estimation with diameter recording.

    ``W_used`` may differ from the bound that generated the noise; when it is
    an outer approximation, the true parameter stays a member throughout. If
    it is too small the set goes empty and the offending time index is
    reported as a structured failure instead of an exception.
    """
    cfg = cfg or DiameterConfig()
    checkpoints = list(checkpoints) if checkpoints is not None else default_checkpoints(traj.T)
    if any(c < 0 or c > traj.T for c in checkpoints):
        raise ValueError("checkpoints must lie in [0, T]")
    if sorted(checkpoints) != checkpoints or len(set(checkpoints)) != len(checkpoints):
        raise ValueError("checkpoints must be strictly increasing")

    ms = MembershipSet(traj.n_x, traj.n_x + traj.n_u, W_used, r_prior=cfg.r_prior)
    Z = traj.z
    XN = traj.x_next
    records: list[SmeCheckpoint] = []
    next_idx = 0
    for t in range(traj.T + 1):
        if next_idx < len(checkpoints) and checkpoints[next_idx] == t:
            if ms.is_empty:
                return SmeRunResult(records, _failure(ms, Z, XN, cfg, t), ms)
            try:
                db = ms.diameter_bounds(
                    n_dirs=cfg.n_dirs, tol=cfg.tol, seed=cfg.seed, max_iters=cfg.max_iters
                )
            except EmptyMembershipSet:
                return SmeRunResult(records, _failure(ms, Z, XN, cfg, t), ms)
            records.append(
                SmeCheckpoint(t, db.lower, db.upper, db.status, db.prior_active)
            )
            if cfg.prune_budget is not None:
                ms.prune_cuts(cfg.prune_budget)
            next_idx += 1
        if t < traj.T:
            ms.add_datum(Z[t], XN[t])
            if ms.is_empty:
                return SmeRunResult(records, _failure(ms, Z, XN, cfg, t + 1), ms)
    return SmeRunResult(records, None, ms)


def _failure(ms: MembershipSet, Z, XN, cfg, upto: int) -> SmeFailure:
    t = ms._infeasible_t
    if t is None or t < 0:
        t = _first_infeasible_datum(ms, Z, XN, cfg, upto)
    return SmeFailure(t, f"membership set empty at t={t}; assumed noise bound too small")


def _first_infeasible_datum(ms: MembershipSet, Z, XN, cfg, upto: int) -> int:
    """Bisect for the shortest data prefix that empties the set."""

    def feasible(k: int) -> bool:
        probe = MembershipSet(ms.n_x, ms.n_z, ms.W, r_prior=ms.r_prior)
        for i in range(k):
            probe.add_datum(Z[i], XN[i])
            if probe.is_empty:
                return False
        e = np.zeros(probe.d)
        e[0] = 1.0
        return probe.support_max(e, tol=cfg.tol, max_iters=cfg.max_iters).status != STATUS_INFEASIBLE

    lo, hi = 0, upto  # set with lo data known feasible (empty prefix always is)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return hi - 1  # index of the datum whose addition emptied the set


# ---------------------------------------------------------------------------
# regularized least squares with a self-normalized confidence radius
# ---------------------------------------------------------------------------


@dataclass
class LseResult:
    theta_hat: np.ndarray
    V: np.ndarray
    beta: float
    diam_report: float
    ill_conditioned: bool


def lse_fit(
    traj,
    lam: float = 1e-3,
    delta_conf: float = 0.05,
    variance_proxy: float = 1.0,
    s_bound: float = 1.0,
) -> LseResult:
    """Ridge regression plus confidence-ellipsoid diameter.

    ``traj`` is a Trajectory or a ``(Z, X_next)`` pair. ``variance_proxy``
    should be the trace of the noise covariance (or any valid proxy);
    ``s_bound`` is the a-priori bound on ``||theta*||_F``.
    """
    if lam <= 0:
        raise ValueError("regularization must be positive")
    if variance_proxy <= 0 or s_bound <= 0:
        raise ValueError("variance proxy and norm bound must be positive")
    if not 0 < delta_conf < 1:
        raise ValueError("delta_conf must be in (0, 1)")
    if isinstance(traj, Trajectory):
        Z, XN = traj.z, traj.x_next
    else:
        Z, XN = traj
        Z = np.asarray(Z, dtype=float)
        XN = np.asarray(XN, dtype=float)
    n_z = Z.shape[1]

    V = lam * np.eye(n_z) + Z.T @ Z
    theta_hat = np.linalg.solve(V, Z.T @ XN).T  # (n_x, n_z)

    sign, logdet = np.linalg.slogdet(V)
    # log(det(V)^1/2 / det(lam I)^1/2) = (logdet V - n_z log lam) / 2
    log_ratio = 0.5 * (logdet - n_z * np.log(lam))
    beta = float(
        np.sqrt(variance_proxy * 2.0 * (log_ratio + np.log(1.0 / delta_conf)))
        + np.sqrt(lam) * s_bound
    )

    eigs = np.linalg.eigvalsh(V)
    diam = 2.0 * beta / np.sqrt(eigs[0])
    ill = bool(eigs[-1] / eigs[0] > _COND_LIMIT)
    return LseResult(theta_hat, V, beta, float(diam), ill)


def lse_at_checkpoints(
    traj: Trajectory,
    checkpoints,
    lam: float = 1e-3,
    delta_conf: float = 0.05,
    variance_proxy: float = 1.0,
    s_bound: float = 1.0,
) -> list[tuple[int, LseResult]]:
    """``lse_fit`` on the data prefix ending at each checkpoint (t >= 1)."""
    Z, XN = traj.z, traj.x_next
    out = []
    for t in checkpoints:
        if t < 1:
            continue
        out.append(
            (t, lse_fit((Z[:t], XN[:t]), lam, delta_conf, variance_proxy, s_bound))
        )
    return out


def estimation_error(theta_hat, theta_star) -> float:
    """Frobenius distance between two parameter matrices."""
    a = np.asarray(theta_hat, dtype=float)
    b = np.asarray(theta_star, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))
