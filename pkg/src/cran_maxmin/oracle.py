"""Brute-force ground truth on tiny instances.

Enumerates every user-RRH association (2^(N*K) of them), solves each fixed
association exactly via the min(wireless, fronthaul) combination rule, and
keeps the best.  Deliberately transparent: no pruning beyond skipping maps
that leave a user unserved.
"""

from __future__ import annotations

from typing import Tuple

from cran_maxmin.association import fronthaul_cap
from cran_maxmin.beamforming import SolverTolerances, solve_max_min, solve_power_min
from cran_maxmin.model import AssociationMap, BeamformerSet, ChannelState, NetworkConfig

MAX_ORACLE_LINKS = 12


def _evaluate(ch, assoc, cfg, tol, hint=None) -> Tuple[float, BeamformerSet]:
    gamma1, bf1 = solve_max_min(ch, assoc, cfg.power_cap_w, cfg.noise_power_w,
                                tol, gamma_upper_hint=hint)
    gamma2 = fronthaul_cap(assoc, cfg.fronthaul_cap_bps, cfg.bandwidth_hz)
    if gamma1 <= gamma2:
        return gamma1, bf1
    bf2 = solve_power_min(ch, assoc, gamma2, cfg.power_cap_w, cfg.noise_power_w, tol)
    return gamma2, bf2


def solve_fixed_association(ch: ChannelState, assoc: AssociationMap,
                            cfg: NetworkConfig,
                            tol: SolverTolerances = SolverTolerances()
                            ) -> Tuple[float, BeamformerSet]:
    """Optimal common SINR of one fixed association: the smaller of the
    wireless max-min value and the fronthaul closed form, with beamformers
    from the binding side."""
    return _evaluate(ch, assoc, cfg, tol)


def _mask_to_association(mask: int, n_users: int, n_rrh: int) -> AssociationMap:
    # bit i of the mask is the row-major pair (k, n) = (i // N, i % N)
    omega = [set() for _ in range(n_rrh)]
    for i in range(n_users * n_rrh):
        if mask >> i & 1:
            omega[i % n_rrh].add(i // n_rrh)
    return AssociationMap(tuple(frozenset(s) for s in omega))


def exhaustive_best(ch: ChannelState, cfg: NetworkConfig,
                    tol: SolverTolerances = SolverTolerances(),
                    require_all_served: bool = True
                    ) -> Tuple[float, AssociationMap]:
    """Best association over the full 2^(N*K) enumeration.

    Ties keep the first maximizer in row-major mask order.  Refuses
    instances with more than MAX_ORACLE_LINKS links.
    """
    links = cfg.n_rrh * cfg.n_users
    if links > MAX_ORACLE_LINKS:
        raise ValueError(
            f"oracle refuses N*K = {links} > {MAX_ORACLE_LINKS} links")
    # the full association bounds every subset's wireless optimum
    full_gamma, _ = solve_max_min(ch, AssociationMap.full(cfg.n_rrh, cfg.n_users),
                                  cfg.power_cap_w, cfg.noise_power_w, tol)
    hint = full_gamma * (1.0 + 10.0 * tol.bisection_rel_tol)
    best_gamma, best_assoc = -1.0, None
    for mask in range(1 << links):
        assoc = _mask_to_association(mask, cfg.n_users, cfg.n_rrh)
        if require_all_served and assoc.unserved_users(cfg.n_users):
            continue
        gamma, _ = _evaluate(ch, assoc, cfg, tol, hint)
        if gamma > best_gamma:
            best_gamma, best_assoc = gamma, assoc
    if best_assoc is None:
        # only possible with require_all_served on and zero candidate maps,
        # which cannot happen for K, N >= 1; kept as a guard
        raise RuntimeError("no admissible association found")
    return best_gamma, best_assoc
