"""SINR-target feasibility, max-min SINR bisection, and power minimization.

The feasibility question "do beamformers exist meeting SINR target gamma at
every user, under per-RRH power caps and a fixed user association" is posed
as a second-order cone program over the real embedding of the complex
beamformers (each complex M-vector becomes 2M reals).  Zero-forced links
(user not in the RRH's serving set) are eliminated from the variable vector,
not constrained to zero.

Feasibility is decided through a margin reformulation: maximize the common
slack s subject to every cone constraint holding with margin s; the query is
feasible iff the optimal margin clears -cone_feas_tol.  This always leaves a
strictly feasible, bounded program, so the interior-point engine never has
to certify infeasibility on a knife edge.

Channels are normalized by the noise amplitude before building the cones
(SINRs are invariant under h -> h/sigma, sigma -> 1), which keeps every
coefficient within a few orders of magnitude of unity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from cran_maxmin.model import AssociationMap, BeamformerSet, ChannelState
from cran_maxmin.socp import ConeSpec, solve_socp


class SolverIndeterminate(RuntimeError):
    """The cone solver stalled before reaching any certificate."""

    def __init__(self, message: str, stats: "SolverStats | None" = None,
                 partial_report=None):
        super().__init__(message)
        self.stats = stats
        self.partial_report = partial_report


@dataclass(frozen=True)
class SolverTolerances:
    bisection_rel_tol: float = 1e-4
    cone_feas_tol: float = 1e-7
    max_bisection_iters: int = 60

    def __post_init__(self):
        if min(self.bisection_rel_tol, self.cone_feas_tol) <= 0 or self.max_bisection_iters <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SolverStats:
    status: str
    iterations: int
    margin: Optional[float]
    pres: float
    dres: float


@dataclass
class FeasibilityOutcome:
    status: str  # "feasible" | "infeasible" | "indeterminate"
    beamformers: Optional[BeamformerSet]
    solver_stats: SolverStats


def _validate(ch: ChannelState, assoc: AssociationMap, power_cap_w) -> np.ndarray:
    caps = np.asarray(power_cap_w, dtype=float)
    if assoc.n_rrh != ch.n_rrh:
        raise ValueError(f"association has {assoc.n_rrh} RRHs, channels have {ch.n_rrh}")
    assoc.validate(ch.n_users)
    if caps.shape != (ch.n_rrh,):
        raise ValueError(f"power_cap_w must have length {ch.n_rrh}")
    if (caps <= 0).any():
        raise ValueError("power caps must be positive")
    return caps


def mrt_gamma_upper_bound(ch: ChannelState, power_cap_w, noise_power_w: float) -> float:
    """Interference-free upper bound max_k (sum_n sqrt(P_n)*||h_kn||)^2 / sigma^2."""
    caps = np.sqrt(np.asarray(power_cap_w, dtype=float))
    norms = np.linalg.norm(ch.h, axis=2)  # (K, N)
    return float(np.max((norms @ caps) ** 2) / noise_power_w)


class _BeamProblem:
    """Cone-program templates for one (channels, association, caps) triple.

    The interference rows scale with sqrt(gamma), everything else is fixed,
    so a bisection reuses one template across all its probes.
    """

    def __init__(self, ch: ChannelState, assoc: AssociationMap, power_cap_w,
                 noise_power_w: float):
        caps = _validate(ch, assoc, power_cap_w)
        self.K, self.N, self.M = ch.h.shape
        self.ch = ch
        self.hs = ch.h / math.sqrt(noise_power_w)
        self.caps = caps
        self.pairs = [(k, n) for k in range(self.K) for n in range(self.N)
                      if k in assoc.omega[n]]
        self.col = {pair: 1 + 2 * self.M * i for i, pair in enumerate(self.pairs)}
        self.nx = 1 + 2 * self.M * len(self.pairs)
        self.serving = [sorted(assoc.serving_rrhs(k)) for k in range(self.K)]
        self.by_rrh = [sorted(assoc.omega[n]) for n in range(self.N)]
        self._margin = self._build(margin=True)
        self._power = None  # built on demand

    # -- template construction --------------------------------------------
    def _build(self, margin: bool):
        K, N, M = self.K, self.N, self.M
        dims = []
        nrows = K * (2 + 2 * (K - 1))
        for n in range(N):
            if self.by_rrh[n]:
                nrows += 1 + 2 * M * len(self.by_rrh[n])
        if not margin:
            nrows += 1 + 2 * M * len(self.pairs)
        G = np.zeros((nrows, self.nx))
        h = np.zeros(nrows)
        tail_rows, noise_rows = [], []

        r = 0
        for k in range(K):
            head = r
            for n in self.serving[k]:
                off = self.col[(k, n)]
                hv = self.hs[k, n]
                G[head, off:off + M] = -hv.real
                G[head, off + M:off + 2 * M] = -hv.imag
            if margin:
                G[head, 0] = 1.0
            r += 1
            for j in range(K):
                if j == k:
                    continue
                for n in self.serving[j]:
                    off = self.col[(j, n)]
                    hv = self.hs[k, n]
                    G[r, off:off + M] = -hv.real
                    G[r, off + M:off + 2 * M] = -hv.imag
                    G[r + 1, off:off + M] = hv.imag
                    G[r + 1, off + M:off + 2 * M] = -hv.real
                tail_rows.extend((r, r + 1))
                r += 2
            h[r] = 1.0  # scaled noise amplitude; multiplied by sqrt(gamma) per probe
            noise_rows.append(r)
            r += 1
            dims.append(r - head)

        for n in range(N):
            if not self.by_rrh[n]:
                continue
            head = r
            h[head] = math.sqrt(self.caps[n])
            if margin:
                G[head, 0] = 1.0
            r += 1
            for k in self.by_rrh[n]:
                off = self.col[(k, n)]
                G[r:r + 2 * M, off:off + 2 * M] = -np.eye(2 * M)
                r += 2 * M
            dims.append(r - head)

        if not margin:
            head = r
            G[head, 0] = -1.0
            r += 1
            G[r:r + self.nx - 1, 1:] = -np.eye(self.nx - 1)
            r += self.nx - 1
            dims.append(r - head)

        assert r == nrows
        return G, h, np.asarray(tail_rows, dtype=np.intp), \
            np.asarray(noise_rows, dtype=np.intp), ConeSpec(dims)

    def _instantiate(self, template, gamma: float):
        G, h, tail_rows, noise_rows, spec = template
        sq = math.sqrt(gamma)
        G2 = G.copy()
        G2[tail_rows] *= sq
        h2 = h.copy()
        h2[noise_rows] *= sq
        return G2, h2, spec

    def unpack(self, x: np.ndarray) -> BeamformerSet:
        w = np.zeros((self.K, self.N, self.M), dtype=np.complex128)
        for i, (k, n) in enumerate(self.pairs):
            seg = x[1 + 2 * self.M * i: 1 + 2 * self.M * (i + 1)]
            w[k, n] = seg[:self.M] + 1j * seg[self.M:]
        # rotate each user's stack so the aggregate gain is real nonnegative
        sig = np.einsum("knm,knm->k", self.ch.h.conj(), w)
        for k in range(self.K):
            mag = abs(sig[k])
            if mag > 0.0:
                w[k] *= sig[k].conjugate() / mag
        return BeamformerSet(w)

    # -- solves -------------------------------------------------------------
    def solve_margin(self, gamma: float):
        """Maximize the feasibility margin at SINR target gamma."""
        G2, h2, spec = self._instantiate(self._margin, gamma)
        c = np.zeros(self.nx)
        c[0] = -1.0
        res = solve_socp(c, G2, h2, spec)
        stats = SolverStats(res.status, res.iterations,
                            -res.obj if res.obj is not None else None,
                            res.pres, res.dres)
        if res.status != "optimal":
            return None, None, stats
        return -res.obj, self.unpack(res.x), stats

    def solve_power_min(self, gamma: float):
        """Minimize total transmit power at fixed SINR target gamma."""
        if self._power is None:
            self._power = self._build(margin=False)
        G2, h2, spec = self._instantiate(self._power, gamma)
        c = np.zeros(self.nx)
        c[0] = 1.0
        res = solve_socp(c, G2, h2, spec)
        stats = SolverStats(res.status, res.iterations, None, res.pres, res.dres)
        if res.status == "primal_infeasible":
            raise ValueError(f"SINR target {gamma} is infeasible for this association")
        if res.status != "optimal":
            raise SolverIndeterminate(
                f"power minimization did not converge (status {res.status})", stats)
        return self.unpack(res.x)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def check_feasible(ch: ChannelState, assoc: AssociationMap, gamma_target: float,
                   power_cap_w, noise_power_w: float,
                   tol: SolverTolerances = SolverTolerances()) -> FeasibilityOutcome:
    """Decide whether SINR target gamma_target is achievable at every user."""
    _validate(ch, assoc, power_cap_w)
    if gamma_target < 0:
        raise ValueError("gamma_target must be nonnegative")
    zeros = BeamformerSet.zeros(ch.n_users, ch.n_rrh, ch.n_antennas)
    if gamma_target == 0.0:
        return FeasibilityOutcome("feasible", zeros,
                                  SolverStats("optimal", 0, 0.0, 0.0, 0.0))
    if assoc.unserved_users(ch.n_users):
        return FeasibilityOutcome("infeasible", None,
                                  SolverStats("optimal", 0, -math.inf, 0.0, 0.0))
    prob = _BeamProblem(ch, assoc, power_cap_w, noise_power_w)
    margin, bf, stats = prob.solve_margin(gamma_target)
    if margin is None:
        return FeasibilityOutcome("indeterminate", None, stats)
    if margin >= -tol.cone_feas_tol:
        return FeasibilityOutcome("feasible", bf, stats)
    return FeasibilityOutcome("infeasible", None, stats)


def solve_max_min(ch: ChannelState, assoc: AssociationMap, power_cap_w,
                  noise_power_w: float,
                  tol: SolverTolerances = SolverTolerances(),
                  gamma_upper_hint: Optional[float] = None):
    """Largest common SINR achievable over the wireless links, by bisection.

    Returns (gamma, beamformers).  The beamformers are tightened by a
    power-minimization solve at the final target so every user sits exactly
    at the common SINR.

    gamma_upper_hint, when given, must be a valid upper bound on the optimum
    (e.g. the value at a superset association); it shrinks the initial
    bisection interval below the interference-free bound.
    """
    _validate(ch, assoc, power_cap_w)
    zeros = BeamformerSet.zeros(ch.n_users, ch.n_rrh, ch.n_antennas)
    if assoc.unserved_users(ch.n_users):
        return 0.0, zeros
    gamma_ub = mrt_gamma_upper_bound(ch, power_cap_w, noise_power_w)
    if gamma_upper_hint is not None:
        gamma_ub = min(gamma_ub, float(gamma_upper_hint))
    if gamma_ub <= 0.0:
        return 0.0, zeros
    prob = _BeamProblem(ch, assoc, power_cap_w, noise_power_w)
    lo, hi = 0.0, gamma_ub
    bf_lo = None
    for _ in range(tol.max_bisection_iters):
        if hi - lo <= tol.bisection_rel_tol * lo:
            break
        mid = 0.5 * (lo + hi)
        margin, bf, stats = prob.solve_margin(mid)
        if margin is None:
            raise SolverIndeterminate(
                f"feasibility probe at gamma={mid} did not converge", stats)
        if margin >= -tol.cone_feas_tol:
            lo, bf_lo = mid, bf
        else:
            hi = mid
    if lo == 0.0 or bf_lo is None:
        return 0.0, zeros
    for target in (lo, lo * (1.0 - 1e-6)):
        try:
            return lo, prob.solve_power_min(target)
        except (ValueError, SolverIndeterminate):
            continue
    return lo, bf_lo


def solve_power_min(ch: ChannelState, assoc: AssociationMap, gamma_target: float,
                    power_cap_w, noise_power_w: float,
                    tol: SolverTolerances = SolverTolerances()) -> BeamformerSet:
    """Beamformers meeting SINR target gamma_target with minimum total power.

    The caller must pass a feasible target; an infeasible one raises
    ValueError (contract violation).
    """
    _validate(ch, assoc, power_cap_w)
    if gamma_target < 0:
        raise ValueError("gamma_target must be nonnegative")
    if gamma_target == 0.0:
        return BeamformerSet.zeros(ch.n_users, ch.n_rrh, ch.n_antennas)
    if assoc.unserved_users(ch.n_users):
        raise ValueError("positive SINR target with an unserved user is infeasible")
    prob = _BeamProblem(ch, assoc, power_cap_w, noise_power_w)
    return prob.solve_power_min(gamma_target)
