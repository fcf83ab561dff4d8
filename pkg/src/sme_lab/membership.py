"""Parameter membership sets with cutting-plane support queries.

The membership set collects every parameter matrix ``theta`` (shape
n_x-by-n_z) such that each observed transition residual ``x_next - theta z``
lies in the noise bound ``W``, intersected with a prior box
``[-r_prior, r_prior]`` per entry that keeps all queries well posed before
the data pin the set down.

Queries work on the flattened (row-major) parameter vector ``y = vec(theta)``
of length ``d = n_x * n_z``. Support maximization runs Kelley's method: solve
the LP over the prior box plus the accumulated linear cuts, separate the
worst residuals at the optimum through the noise bound's separation oracle,
translate each returned half-space ``v @ residual >= b`` into the parameter
cut ``-(v ⊗ z) @ y >= b - v @ x_next``, and repeat until every residual is
within ``tol`` of membership.

Cuts are cached across queries (they stay valid as data only accumulate), so
later directions and checkpoints usually converge after a single LP solve.
The reported support value can overestimate the truth by at most
``tol / ||z_t||`` per active datum in parameter space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from sme_lab.geometry import ConvexSupport, support_from_config
from sme_lab.simplex import INFEASIBLE, ITER_LIMIT, solve_support_lp

STATUS_OK = "ok"
STATUS_ITER_LIMIT = "iter_limit"
STATUS_INFEASIBLE = "infeasible"

# violated data turned into cuts per Kelley iteration
_CUT_BATCH = 4


class EmptyMembershipSet(RuntimeError):
    """The data are inconsistent with the assumed noise bound."""

    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"membership set became empty at datum t={t}")


@dataclass
class SupportValue:
    value: float
    point: np.ndarray | None
    status: str
    lp_solves: int = 0


@dataclass
class DiameterBounds:
    """Certified sandwich on the set diameter in the Frobenius norm.

    ``lower`` is the best width realized along sampled directions (each one
    is attained by two feasible points); ``upper`` is the diagonal of the
    coordinate bounding box. ``widths`` holds the per-coordinate ranges and
    ``prior_active`` flags coordinates still pinned by the prior box.
    """

    lower: float
    upper: float
    widths: np.ndarray
    status: str
    prior_active: bool


@dataclass
class DiameterConfig:
    """Knobs for diameter queries inside estimation runs."""

    n_dirs: int | None = None  # default 64*d, resolved per set
    tol: float = 1e-7
    max_iters: int = 200
    seed: int = 0
    r_prior: float = 10.0
    prune_budget: int | None = None


class MembershipSet:
    """Consistency set of parameters given transitions and a noise bound.

    Instances are single-writer and queries warm the internal cut cache, so
    concurrent readers should each work on their own snapshot
    (``deserialize(serialize())``); the underlying LP solver is stateless.
    """

    def __init__(self, n_x: int, n_z: int, W: ConvexSupport, r_prior: float = 10.0):
        if W.dim != n_x:
            raise ValueError("noise bound dimension must equal n_x")
        if r_prior <= 0:
            raise ValueError("prior half-width must be positive")
        self.n_x = n_x
        self.n_z = n_z
        self.W = W
        self.r_prior = float(r_prior)
        self.d = n_x * n_z
        self._z: list[np.ndarray] = []
        self._xn: list[np.ndarray] = []
        self._z_stack = np.empty((0, n_z))
        self._xn_stack = np.empty((0, n_x))
        self._stack_dirty = False
        # cut cache: unit normals (m, d), offsets (m,), originating datum, recency
        self._cut_n = np.empty((0, self.d))
        self._cut_b = np.empty(0)
        self._cut_t = np.empty(0, dtype=int)
        self._cut_active = np.empty(0, dtype=np.int64)
        self._query_counter = 0
        # one row-set per coordinate-support optimum of the last diameter query
        self._coord_binding: list[set[int]] = []
        self._last_binding = np.empty(0, dtype=int)
        self._infeasible_t: int | None = None

    # -- data ---------------------------------------------------------------

    @property
    def n_data(self):
        return len(self._z)

    @property
    def n_cuts(self):
        return self._cut_n.shape[0]

    @property
    def is_empty(self):
        return self._infeasible_t is not None

    def add_datum(self, z, x_next):
        """Append one transition; cuts are generated lazily by later queries.

        A datum with ``z = 0`` constrains nothing unless ``x_next`` falls
        outside the noise bound, in which case the set is empty (the assumed
        bound cannot explain the data).
        """
        z = np.asarray(z, dtype=float).reshape(self.n_z)
        x_next = np.asarray(x_next, dtype=float).reshape(self.n_x)
        t = self.n_data
        if np.linalg.norm(z) == 0.0:
            if not self.W.contains(x_next):
                self._infeasible_t = t
            # vacuous otherwise: theta @ 0 = 0 for every theta
        self._z.append(z)
        self._xn.append(x_next)
        self._stack_dirty = True
        return self

    def _stacks(self):
        if self._stack_dirty:
            self._z_stack = np.vstack(self._z) if self._z else np.empty((0, self.n_z))
            self._xn_stack = np.vstack(self._xn) if self._xn else np.empty((0, self.n_x))
            self._stack_dirty = False
        return self._z_stack, self._xn_stack

    # -- membership -----------------------------------------------------------

    def residuals(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(self.n_x, self.n_z)
        Z, XN = self._stacks()
        return XN - Z @ theta.T

    def is_member(self, theta, tol: float = 1e-10) -> bool:
        """True iff ``theta`` sits in the prior box and explains every datum.

        ``tol`` absorbs floating round-off in externally computed residuals.
        """
        theta = np.asarray(theta, dtype=float).reshape(self.n_x, self.n_z)
        if self.is_empty:
            return False
        if np.abs(theta).max() > self.r_prior + tol:
            return False
        if self.n_data == 0:
            return True
        return bool(self.W.violations(self.residuals(theta)).max() <= tol)

    # -- support queries --------------------------------------------------------

    def support_max(self, direction, tol: float = 1e-7, max_iters: int = 200) -> SupportValue:
        """Maximize ``direction @ vec(theta)`` over the set by Kelley cuts."""
        if self.is_empty:
            return SupportValue(np.nan, None, STATUS_INFEASIBLE)
        u = np.asarray(direction, dtype=float).reshape(self.d)
        nrm = np.linalg.norm(u)
        if nrm == 0:
            raise ValueError("direction must be nonzero")
        u = u / nrm
        lo = np.full(self.d, -self.r_prior)
        hi = np.full(self.d, self.r_prior)
        Z, XN = self._stacks()
        z_norms = np.linalg.norm(Z, axis=1) if self.n_data else np.empty(0)
        self._query_counter += 1
        self._last_binding = np.empty(0, dtype=int)
        solves = 0

        for _ in range(max_iters):
            res = solve_support_lp(u, self._cut_n, self._cut_b, lo, hi)
            solves += 1
            if res.status == INFEASIBLE:
                if self._infeasible_t is None:
                    self._infeasible_t = -1  # surfaced by a query, not a specific datum
                return SupportValue(np.nan, None, STATUS_INFEASIBLE, solves)
            if res.status == ITER_LIMIT:
                return SupportValue(res.value * nrm, res.x, STATUS_ITER_LIMIT, solves)
            self._mark_active(res.active_rows)
            self._last_binding = res.active_rows
            if self.n_data == 0:
                return SupportValue(res.value * nrm, res.x, STATUS_OK, solves)

            theta = res.x.reshape(self.n_x, self.n_z)
            defects = self.W.violations(XN - Z @ theta.T)
            worst = float(defects.max())
            if worst <= tol:
                return SupportValue(res.value * nrm, res.x, STATUS_OK, solves)

            order = np.argpartition(defects, -min(_CUT_BATCH, defects.size))[-_CUT_BATCH:]
            added = 0
            for t in sorted(int(i) for i in order):
                if defects[t] <= tol or z_norms[t] == 0.0:
                    continue
                v, b = self.W.separate(XN[t] - theta @ Z[t])
                added += self._add_cut(v, b, t, Z[t], XN[t])
            if added == 0:
                # defects positive but every candidate cut was a duplicate:
                # numerical stalemate; report the current overestimate
                return SupportValue(res.value * nrm, res.x, STATUS_ITER_LIMIT, solves)
        return SupportValue(res.value * nrm, res.x, STATUS_ITER_LIMIT, solves)

    def _add_cut(self, v, b, t, z, x_next) -> int:
        # v @ (x_next - theta z) >= b   =>   -(v ⊗ z) @ y >= b - v @ x_next
        normal = -np.kron(v, z)
        nrm = np.linalg.norm(normal)  # equals ||z|| for unit v
        if nrm == 0:
            return 0
        normal /= nrm
        offset = (b - float(v @ x_next)) / nrm
        if self.n_cuts:
            same_t = self._cut_t == t
            if np.any(same_t):
                dots = self._cut_n[same_t] @ normal
                offs = self._cut_b[same_t]
                if np.any((dots > 1.0 - 1e-12) & (offs >= offset - 1e-12)):
                    return 0  # an existing cut already dominates this one
        self._cut_n = np.vstack([self._cut_n, normal[None, :]])
        self._cut_b = np.append(self._cut_b, offset)
        self._cut_t = np.append(self._cut_t, t)
        self._cut_active = np.append(self._cut_active, self._query_counter)
        return 1

    def _mark_active(self, rows):
        if rows.size:
            self._cut_active[rows] = self._query_counter

    # -- diameter -------------------------------------------------------------

    def diameter_bounds(
        self,
        n_dirs: int | None = None,
        tol: float = 1e-7,
        seed: int = 0,
        max_iters: int = 200,
    ) -> DiameterBounds:
        """Certified (lower, upper) bounds on the Frobenius diameter.

        The upper bound is the Euclidean norm of the per-coordinate ranges
        (bounding-box diagonal). The lower bound is the largest width over
        the coordinate axes, the box-diagonal direction, and ``n_dirs``
        random unit directions; every width is realized by two members.
        """
        if self.is_empty:
            raise EmptyMembershipSet(self._infeasible_t)
        if n_dirs is None:
            n_dirs = 64 * self.d
        status = STATUS_OK

        widths = np.empty(self.d)
        binding: list[set[int]] = []
        for j in range(self.d):
            e = np.zeros(self.d)
            e[j] = 1.0
            hi = self.support_max(e, tol=tol, max_iters=max_iters)
            binding.append({int(i) for i in self._last_binding})
            lo = self.support_max(-e, tol=tol, max_iters=max_iters)
            binding.append({int(i) for i in self._last_binding})
            for r in (hi, lo):
                if r.status == STATUS_INFEASIBLE:
                    raise EmptyMembershipSet(self._infeasible_t)
                if r.status == STATUS_ITER_LIMIT:
                    status = STATUS_ITER_LIMIT
            widths[j] = max(hi.value + lo.value, 0.0)
        self._coord_binding = binding
        upper = float(np.linalg.norm(widths))
        prior_active = bool(np.any(widths >= 2.0 * self.r_prior - 1e-9))

        lower = float(widths.max(initial=0.0))
        dirs = []
        if upper > 0 and widths.max() > 0:
            dirs.append(widths / np.linalg.norm(widths))  # box diagonal
        rng = np.random.default_rng(seed)
        if n_dirs > 0:
            R = rng.normal(size=(n_dirs, self.d))
            R /= np.linalg.norm(R, axis=1, keepdims=True)
            dirs.extend(R)
        for uvec in dirs:
            hi = self.support_max(uvec, tol=tol, max_iters=max_iters)
            lo = self.support_max(-uvec, tol=tol, max_iters=max_iters)
            if STATUS_INFEASIBLE in (hi.status, lo.status):
                raise EmptyMembershipSet(self._infeasible_t)
            if STATUS_ITER_LIMIT in (hi.status, lo.status):
                status = STATUS_ITER_LIMIT
            lower = max(lower, hi.value + lo.value)
        lower = min(lower, upper)  # solver noise can leave lower a hair above
        return DiameterBounds(lower, upper, widths, status, prior_active)

    # -- maintenance ------------------------------------------------------------

    def prune_cuts(self, budget: int):
        """Drop cold cuts, keeping the ``budget`` most recently active ones
        plus one representative cut binding at each of the last 2d
        coordinate-support optima (so the cache ends up at most
        ``budget + 2d`` entries).

        Removed cuts are re-derivable from their data, so query answers are
        unaffected; only warm-start speed changes.
        """
        if budget < 2 * self.d:
            raise ValueError("budget must be at least 2 * parameter dimension")
        m = self.n_cuts
        if m <= budget:
            return self
        keep = np.zeros(m, dtype=bool)
        representatives = []
        for rows in self._coord_binding:
            valid = [i for i in rows if i < m]
            if valid:
                representatives.append(max(valid))  # most recently added wins
        keep[representatives] = True
        order = np.argsort(self._cut_active, kind="stable")[::-1]
        keep[order[:budget]] = True
        self._cut_n = self._cut_n[keep]
        self._cut_b = self._cut_b[keep]
        self._cut_t = self._cut_t[keep]
        self._cut_active = self._cut_active[keep]
        old_to_new = {int(o): n for n, o in enumerate(np.flatnonzero(keep))}
        self._coord_binding = [
            {old_to_new[i] for i in rows if i in old_to_new} for rows in self._coord_binding
        ]
        return self

    # -- persistence ------------------------------------------------------------

    def serialize(self) -> str:
        """Checkpoint the defining state (data, prior, bound); cuts are
        deliberately dropped since they are re-derivable."""
        Z, XN = self._stacks()
        payload = {
            "n_x": self.n_x,
            "n_z": self.n_z,
            "r_prior": self.r_prior,
            "W": self.W.to_config(),
            "z": Z.tolist(),
            "x_next": XN.tolist(),
        }
        return json.dumps(payload)

    @classmethod
    def deserialize(cls, text: str) -> "MembershipSet":
        payload = json.loads(text)
        W = support_from_config(payload["W"], dim=payload["n_x"])
        obj = cls(payload["n_x"], payload["n_z"], W, payload["r_prior"])
        for z, xn in zip(payload["z"], payload["x_next"]):
            obj.add_datum(np.asarray(z), np.asarray(xn))
        return obj
