"""Iterative link-removal association (with both selection criteria) and the
greedy / nearest-RRH benchmark schemes.

All schemes return a SolveReport whose per-iteration records carry
(gamma1, gamma2, gamma) so trace-level properties (combination rule,
monotonicity, iteration bound) can be asserted after the fact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from cran_maxmin.beamforming import (
    SolverIndeterminate,
    SolverTolerances,
    solve_max_min,
    solve_power_min,
)
from cran_maxmin.model import (
    AssociationMap,
    BeamformerSet,
    ChannelState,
    IterationRecord,
    NetworkConfig,
    SolveReport,
    association_indicator,
)

_TIE_REL_TOL = 1e-12


@dataclass(frozen=True)
class LinkChoice:
    """A (user, RRH) pair selected for removal/activation plus its score."""

    user: int
    rrh: int
    score: float


class SolveCache:
    """Memoizes the expensive per-association solves for one channel draw.

    Distinct schemes and fronthaul capacities revisit the same associations
    (a common-capacity sweep leaves the removal path capacity-independent),
    so a sweep shares one cache per trial.  Hits return the exact floats of
    the first computation, which keeps sweeps bit-reproducible.
    """

    def __init__(self, ch: ChannelState, power_cap_w, noise_power_w: float,
                 tol: SolverTolerances):
        self.ch = ch
        self.power_cap_w = power_cap_w
        self.noise_power_w = noise_power_w
        self.tol = tol
        self._max_min = {}
        self._power_min = {}

    def max_min(self, assoc: AssociationMap, gamma_upper_hint=None):
        key = assoc.omega
        if key not in self._max_min:
            self._max_min[key] = solve_max_min(
                self.ch, assoc, self.power_cap_w, self.noise_power_w, self.tol,
                gamma_upper_hint=gamma_upper_hint)
        return self._max_min[key]

    def power_min(self, assoc: AssociationMap, gamma: float):
        key = (assoc.omega, gamma)
        if key not in self._power_min:
            self._power_min[key] = solve_power_min(
                self.ch, assoc, gamma, self.power_cap_w, self.noise_power_w,
                self.tol)
        return self._power_min[key]


def fronthaul_cap(assoc: AssociationMap, fronthaul_cap_bps: Sequence[float],
                  bandwidth_hz: float) -> float:
    """Largest common SINR the fronthaul alone allows:
    min over loaded RRHs of 2^(T_n / (B * |Omega_n|)) - 1.

    Returns +inf when every serving set is empty (constraint vacuous).
    """
    caps = np.asarray(fronthaul_cap_bps, dtype=float)
    best = math.inf
    for n, users in enumerate(assoc.omega):
        if users:
            expo = float(caps[n]) / (bandwidth_hz * len(users))
            term = math.inf if expo >= 1024.0 else 2.0 ** expo - 1.0
            best = min(best, term)
    return float(best)


def bottleneck_rrhs(assoc: AssociationMap, fronthaul_cap_bps: Sequence[float]) -> set:
    """RRHs minimizing T_n / |Omega_n| among those with nonempty serving sets."""
    caps = np.asarray(fronthaul_cap_bps, dtype=float)
    ratios = {n: caps[n] / len(users) for n, users in enumerate(assoc.omega) if users}
    if not ratios:
        raise ValueError("every serving set is empty")
    lo = min(ratios.values())
    thresh = lo + _TIE_REL_TOL * max(abs(lo), 1e-300)
    return {n for n, v in ratios.items() if v <= thresh}


def candidate_links(psi: set, assoc: AssociationMap,
                    last_link_guard: bool = True) -> set:
    """Active links at bottleneck RRHs; optionally excludes a user's last link."""
    phi = set()
    for n in sorted(psi):
        for k in sorted(assoc.omega[n]):
            if last_link_guard and len(assoc.serving_rrhs(k)) == 1:
                continue
            phi.add((k, n))
    return phi


def _argmax_link(scores: dict) -> LinkChoice:
    best = max(scores.values())
    thresh = best - _TIE_REL_TOL * max(abs(best), 1e-300)
    k, n = min(pair for pair, v in scores.items() if v >= thresh)
    return LinkChoice(k, n, scores[(k, n)])


def select_removal(ch: ChannelState, bf1: BeamformerSet, phi: set,
                   noise_power_w: float) -> LinkChoice:
    """Pick the link whose removal leaves its user the best residual SINR:
    argmax over (k, n) in phi of
    (sum_{n' != n} |h_kn'^H w_kn'|^2) / (interference at k + sigma^2).
    """
    if not phi:
        raise ValueError("candidate link set is empty")
    A = np.einsum("knm,jnm->kj", ch.h.conj(), bf1.w)  # aggregate gains
    interf = (np.abs(A) ** 2).sum(axis=1) - np.abs(A.diagonal()) ** 2
    own = np.abs(np.einsum("knm,knm->kn", ch.h.conj(), bf1.w)) ** 2  # per-link signal
    own_total = own.sum(axis=1)
    scores = {(k, n): (own_total[k] - own[k, n]) / (interf[k] + noise_power_w)
              for (k, n) in phi}
    return _argmax_link(scores)


def benchmark1_select(ch: ChannelState, bf1: BeamformerSet, phi: set) -> LinkChoice:
    """Pick the link generating the most interference at the other users:
    argmax over (k, n) in phi of sum_{j != k} |h_jn^H w_kn|^2.
    """
    if not phi:
        raise ValueError("candidate link set is empty")
    # U[j, k, n] = h_jn^H w_kn
    U = np.abs(np.einsum("jnm,knm->jkn", ch.h.conj(), bf1.w)) ** 2
    totals = U.sum(axis=0)  # over j, shape (K, N)
    scores = {(k, n): totals[k, n] - U[k, k, n] for (k, n) in phi}
    return _argmax_link(scores)


# ---------------------------------------------------------------------------
# scheme runners
# ---------------------------------------------------------------------------

def _final_association(bf: BeamformerSet, cfg: NetworkConfig) -> AssociationMap:
    return AssociationMap.from_indicator(association_indicator(bf, cfg.power_cap_w))


def run_algorithm1(ch: ChannelState, cfg: NetworkConfig,
                   tol: SolverTolerances = SolverTolerances(),
                   selector: str = "residual",
                   last_link_guard: bool = True,
                   cache: Optional[SolveCache] = None) -> SolveReport:
    """Iterative link removal: start from full association, prune one link at
    the fronthaul bottleneck per iteration until the wireless optimum fits
    the fronthaul, then keep the better of the last two iterates.

    selector "residual" keeps the user with the best post-removal SINR
    (the proposed criterion); "leakage" drops the link generating the most
    interference instead (benchmark scheme 1).
    """
    if selector not in ("residual", "leakage"):
        raise ValueError("selector must be 'residual' or 'leakage'")
    label = "alg1" if selector == "residual" else "bench1"
    if cache is None:
        cache = SolveCache(ch, cfg.power_cap_w, cfg.noise_power_w, tol)
    report = SolveReport(scheme_label=label)
    assoc = AssociationMap.full(cfg.n_rrh, cfg.n_users)
    best_gamma, best_bf, best_assoc = -math.inf, None, None
    hint = None

    try:
        for t in range(1, cfg.n_rrh * cfg.n_users + 2):
            # removing links never improves the wireless optimum, so the
            # previous value (with tolerance headroom) bounds this one
            gamma1, bf1 = cache.max_min(assoc, gamma_upper_hint=hint)
            hint = gamma1 * (1.0 + 10.0 * tol.bisection_rel_tol)
            gamma2 = fronthaul_cap(assoc, cfg.fronthaul_cap_bps, cfg.bandwidth_hz)
            gamma_t = min(gamma1, gamma2)
            if gamma1 >= gamma2:
                bf_t = cache.power_min(assoc, gamma2)
            else:
                bf_t = bf1
            rec = IterationRecord(t, gamma1, gamma2, gamma_t, None, None,
                                  assoc.sizes())
            report.iterations.append(rec)
            if gamma_t >= best_gamma:
                best_gamma, best_bf, best_assoc = gamma_t, bf_t, assoc

            if gamma1 <= gamma2:
                break
            psi = bottleneck_rrhs(assoc, cfg.fronthaul_cap_bps)
            phi = candidate_links(psi, assoc, last_link_guard)
            if not phi:
                break
            if selector == "residual":
                choice = select_removal(ch, bf1, phi, cfg.noise_power_w)
            else:
                choice = benchmark1_select(ch, bf1, phi)
            rec.removed_user, rec.removed_rrh = choice.user, choice.rrh
            assoc = assoc.remove_link(choice.user, choice.rrh)
    except SolverIndeterminate as exc:
        exc.partial_report = report
        raise

    report.final_gamma = max(best_gamma, 0.0)
    report.final_beamformers = best_bf if best_bf is not None else \
        BeamformerSet.zeros(cfg.n_users, cfg.n_rrh, cfg.n_antennas)
    report.final_association = _final_association(report.final_beamformers, cfg)
    return report


def nearest_rrh_association(ch: ChannelState, topology=None) -> AssociationMap:
    """Each user on its nearest RRH: geometric distance when a topology is
    given, otherwise the largest channel norm as proxy."""
    if topology is not None:
        metric = -topology.distances()  # (K, N), larger is better
    else:
        metric = np.linalg.norm(ch.h, axis=2) ** 2
    omega = [set() for _ in range(ch.n_rrh)]
    for k in range(ch.n_users):
        omega[int(np.argmax(metric[k]))].add(k)
    return AssociationMap(tuple(frozenset(s) for s in omega))


def _evaluate_fixed(ch, assoc, cfg, tol, cache: SolveCache):
    """Value of a fixed association: the smaller of the wireless and
    fronthaul optima, with beamformers from whichever branch binds."""
    gamma1, bf1 = cache.max_min(assoc)
    gamma2 = fronthaul_cap(assoc, cfg.fronthaul_cap_bps, cfg.bandwidth_hz)
    if gamma1 <= gamma2:
        return gamma1, gamma2, gamma1, bf1
    bf2 = cache.power_min(assoc, gamma2)
    return gamma1, gamma2, gamma2, bf2


def run_benchmark2(ch: ChannelState, cfg: NetworkConfig,
                   tol: SolverTolerances = SolverTolerances(),
                   topology=None,
                   cache: Optional[SolveCache] = None) -> SolveReport:
    """Channel-based greedy activation: start from nearest-RRH association,
    activate the strongest inactive link per iteration, stop at the first
    drop of the max-min SINR and report the pre-drop iterate.
    """
    report = SolveReport(scheme_label="bench2")
    if cache is None:
        cache = SolveCache(ch, cfg.power_cap_w, cfg.noise_power_w, tol)
    assoc = nearest_rrh_association(ch, topology)
    norms = np.linalg.norm(ch.h, axis=2) ** 2

    best = None  # (gamma, bf, assoc)
    prev_gamma = -math.inf
    activated: Optional[LinkChoice] = None
    try:
        for t in range(1, cfg.n_rrh * cfg.n_users + 2):
            gamma1, gamma2, gamma_t, bf_t = _evaluate_fixed(ch, assoc, cfg, tol, cache)
            report.iterations.append(IterationRecord(
                t, gamma1, gamma2, gamma_t,
                activated.user if activated else None,
                activated.rrh if activated else None,
                assoc.sizes()))
            if gamma_t < prev_gamma:
                break
            best = (gamma_t, bf_t, assoc)
            prev_gamma = gamma_t
            inactive = {(k, n): norms[k, n]
                        for k in range(cfg.n_users) for n in range(cfg.n_rrh)
                        if k not in assoc.omega[n]}
            if not inactive:
                break
            activated = _argmax_link(inactive)
            omega = list(assoc.omega)
            omega[activated.rrh] = omega[activated.rrh] | {activated.user}
            assoc = AssociationMap(tuple(omega))
    except SolverIndeterminate as exc:
        exc.partial_report = report
        raise

    gamma, bf, _ = best
    report.final_gamma = gamma
    report.final_beamformers = bf
    report.final_association = _final_association(bf, cfg)
    return report


def run_benchmark3(ch: ChannelState, cfg: NetworkConfig,
                   tol: SolverTolerances = SolverTolerances(),
                   topology=None,
                   cache: Optional[SolveCache] = None) -> SolveReport:
    """Conventional cellular: fixed nearest-RRH association, one evaluation."""
    report = SolveReport(scheme_label="bench3")
    if cache is None:
        cache = SolveCache(ch, cfg.power_cap_w, cfg.noise_power_w, tol)
    assoc = nearest_rrh_association(ch, topology)
    try:
        gamma1, gamma2, gamma_t, bf_t = _evaluate_fixed(ch, assoc, cfg, tol, cache)
    except SolverIndeterminate as exc:
        exc.partial_report = report
        raise
    report.iterations.append(IterationRecord(1, gamma1, gamma2, gamma_t,
                                             None, None, assoc.sizes()))
    report.final_gamma = gamma_t
    report.final_beamformers = bf_t
    report.final_association = _final_association(bf_t, cfg)
    return report
