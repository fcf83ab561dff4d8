"""Linear time-invariant simulation under randomly perturbed policies.

State evolves as ``x_{t+1} = A x_t + B u_t + w_t`` with process noise drawn
from a known bounded distribution. Inputs come from a policy that is either
pure exploration noise or linear feedback plus exploration noise. The
regressor is ``z_t = (x_t, u_t)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sme_lab.geometry import NoiseDistribution


class SimulationBlowUp(RuntimeError):
    """State norm exceeded the blow-up threshold (unstable closed loop)."""


@dataclass
class LinearSystem:
    """System matrices ``(A, B)``; the stacked parameter is ``theta = (A | B)``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.B = np.asarray(self.B, dtype=float)
        if self.B.ndim == 1:
            self.B = self.B.reshape(self.A.shape[0], -1)
        if self.A.shape[0] != self.A.shape[1]:
            raise ValueError("A must be square")
        if self.B.shape[0] != self.A.shape[0]:
            raise ValueError("B row count must match A")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.B))):
            raise ValueError("system matrices must be finite")

    @property
    def n_x(self):
        return self.A.shape[0]

    @property
    def n_u(self):
        return self.B.shape[1]

    @property
    def n_z(self):
        return self.n_x + self.n_u

    @property
    def theta(self) -> np.ndarray:
        return np.hstack([self.A, self.B])

    def spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvals(self.A)).max())

    def require_stable(self):
        rho = self.spectral_radius()
        if rho >= 1.0:
            raise ValueError(f"A is not Schur stable (spectral radius {rho:.4f})")


@dataclass
class PureNoise:
    """Inputs are exploration noise only: ``u_t = eta_t``."""

    input_dist: NoiseDistribution


@dataclass
class LinearFeedbackPlusNoise:
    """Inputs are ``u_t = K x_t + eta_t``."""

    K: np.ndarray
    input_dist: NoiseDistribution

    def __post_init__(self):
        self.K = np.atleast_2d(np.asarray(self.K, dtype=float))


@dataclass
class Trajectory:
    """One closed-loop rollout; ground-truth noises retained for testing."""

    x: np.ndarray  # (T+1, n_x)
    u: np.ndarray  # (T, n_u)
    w: np.ndarray  # (T, n_x)

    @property
    def T(self):
        return self.u.shape[0]

    @property
    def n_x(self):
        return self.x.shape[1]

    @property
    def n_u(self):
        return self.u.shape[1]

    @property
    def z(self) -> np.ndarray:
        """Regressors ``z_t = (x_t, u_t)``, shape (T, n_x + n_u)."""
        return np.hstack([self.x[:-1], self.u])

    @property
    def x_next(self) -> np.ndarray:
        return self.x[1:]

    def to_csv(self, path):
        """Debug export with header ``t,x...,u...,w...``."""
        cols = (
            [f"x{i}" for i in range(self.n_x)]
            + [f"u{i}" for i in range(self.n_u)]
            + [f"w{i}" for i in range(self.n_x)]
        )
        with open(path, "w", newline="") as fh:
            fh.write("t," + ",".join(cols) + "\n")
            for t in range(self.T):
                row = np.concatenate([self.x[t], self.u[t], self.w[t]])
                fh.write(str(t) + "," + ",".join(f"{v:.9g}" for v in row) + "\n")


def simulate(
    sys: LinearSystem,
    policy,
    noise: NoiseDistribution | None,
    T: int,
    x0=None,
    seed: int = 0,
    blowup: float = 1e8,
) -> Trajectory:
    """Roll the closed loop for ``T`` steps.

    ``noise=None`` forces ``w_t = 0`` (useful for exactness tests). Input and
    process noise streams are split off the seed independently, so the same
    seed always reproduces the same trajectory.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    n_x, n_u = sys.n_x, sys.n_u
    x0 = np.zeros(n_x) if x0 is None else np.asarray(x0, dtype=float).reshape(n_x)

    ss = np.random.SeedSequence(seed)
    child_w, child_u = ss.spawn(2)

    if noise is None:
        w = np.zeros((T, n_x))
    else:
        if noise.dim != n_x:
            raise ValueError("noise dimension must equal the state dimension")
        w = noise.sample(T, np.random.default_rng(child_w))

    if isinstance(policy, PureNoise):
        K = None
        input_dist = policy.input_dist
    elif isinstance(policy, LinearFeedbackPlusNoise):
        K = policy.K
        input_dist = policy.input_dist
    else:
        raise TypeError(f"unknown policy {type(policy).__name__}")
    if input_dist.dim != n_u:
        raise ValueError("input noise dimension must equal the input dimension")
    eta = input_dist.sample(T, np.random.default_rng(child_u))

    x = np.empty((T + 1, n_x))
    u = np.empty((T, n_u))
    x[0] = x0
    for t in range(T):
        u[t] = eta[t] if K is None else K @ x[t] + eta[t]
        x[t + 1] = sys.A @ x[t] + sys.B @ u[t] + w[t]
        if np.linalg.norm(x[t + 1]) > blowup:
            raise SimulationBlowUp(f"state norm exceeded {blowup:g} at t={t + 1}")
    return Trajectory(x=x, u=u, w=w)


def trajectory_bounds(traj: Trajectory) -> float:
    """Empirical bound ``max_t ||z_t||_2`` over the trajectory."""
    z = traj.z if isinstance(traj, Trajectory) else np.asarray(traj, dtype=float)
    if z.size == 0:
        return 0.0
    return float(np.linalg.norm(z, axis=1).max())


def empirical_small_ball_profile(traj, sigma: float, n_dirs: int = 256, seed: int = 0) -> float:
    """Worst-direction frequency of ``|lambda @ z_t| >= sigma``.

    A marginal-frequency proxy for the small-ball excitation constant: true
    conditional small-ball probabilities are not estimable from one path, so
    this diagnostic reports ``min_lambda (1/T) #{t : |lambda @ z_t| >= sigma}``
    over ``n_dirs`` random unit directions.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if n_dirs < 1:
        raise ValueError("n_dirs must be >= 1")
    z = traj.z if isinstance(traj, Trajectory) else np.asarray(traj, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    rng = np.random.default_rng(seed)
    d = z.shape[1]
    dirs = rng.normal(size=(n_dirs, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    freq = (np.abs(z @ dirs.T) >= sigma).mean(axis=0)
    return float(freq.min())
