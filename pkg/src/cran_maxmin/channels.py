"""Seeded generation of disk topologies and Rayleigh-faded channels.

Randomness comes from numpy's Philox counter-based generator, keyed by a
64-bit seed, so that identical (config, seed) pairs reproduce bit-identical
draws on any platform.  Per-trial sub-seeds are derived by XORing the base
seed with a splitmix64 hash of the trial index, which keeps trial streams
independent and embarrassingly parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cran_maxmin.model import ChannelState

_MASK64 = (1 << 64) - 1


def splitmix64(v: int) -> int:
    """One round of the splitmix64 mixer (Steele et al. constants)."""
    z = (v + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def trial_seed(seed: int, index: int) -> int:
    """Sub-seed for one trial: seed XOR hash(trial index)."""
    return (int(seed) ^ splitmix64(int(index))) & _MASK64


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))


@dataclass(frozen=True)
class GenConfig:
    """Deployment geometry, path loss and noise model parameters."""

    radius_m: float = 500.0
    pathloss_a_db: float = 30.6
    pathloss_b: float = 36.7
    noise_psd_dbm_hz: float = -169.0
    noise_figure_db: float = 7.0
    min_distance_m: float = 1.0
    rrh_placement: str = "uniform"  # "uniform" in the disk, or fixed "ring"
    rrh_ring_frac: float = 0.5

    def __post_init__(self):
        if not self.radius_m > 0:
            raise ValueError("radius_m must be > 0")
        if not self.min_distance_m > 0:
            raise ValueError("min_distance_m must be > 0")
        if self.rrh_placement not in ("uniform", "ring"):
            raise ValueError("rrh_placement must be 'uniform' or 'ring'")


@dataclass
class Topology:
    """RRH and user positions inside a disk centered at the origin."""

    rrh_pos: np.ndarray   # (N, 2) meters
    user_pos: np.ndarray  # (K, 2) meters
    radius_m: float

    def __post_init__(self):
        self.rrh_pos = np.asarray(self.rrh_pos, dtype=float).reshape(-1, 2)
        self.user_pos = np.asarray(self.user_pos, dtype=float).reshape(-1, 2)

    def distances(self) -> np.ndarray:
        """Pairwise user-RRH distances, shape (K, N)."""
        diff = self.user_pos[:, None, :] - self.rrh_pos[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])


def _uniform_disk(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    # area-uniform: radius grows like sqrt(u)
    r = radius * np.sqrt(rng.random(count))
    theta = 2.0 * np.pi * rng.random(count)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def generate_topology(cfg: GenConfig, n_rrh: int, n_users: int, rng_seed: int) -> Topology:
    """Draw RRH positions first, then user positions, from one Philox stream."""
    rng = _rng(rng_seed)
    if cfg.rrh_placement == "ring":
        theta = 2.0 * np.pi * np.arange(n_rrh) / max(n_rrh, 1)
        r = cfg.rrh_ring_frac * cfg.radius_m
        rrh = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    else:
        rrh = _uniform_disk(rng, n_rrh, cfg.radius_m)
    users = _uniform_disk(rng, n_users, cfg.radius_m)
    return Topology(rrh, users, cfg.radius_m)


def pathloss_db(cfg: GenConfig, distance_m) -> np.ndarray:
    """a + b*log10(d) in dB, with d clamped at the minimum-distance guard."""
    d = np.maximum(np.asarray(distance_m, dtype=float), cfg.min_distance_m)
    return cfg.pathloss_a_db + cfg.pathloss_b * np.log10(d)


def generate_channels(topo: Topology, cfg: GenConfig, n_antennas: int,
                      rng_seed: int, *, noise_power_w: float) -> ChannelState:
    """Rayleigh fading on top of distance path loss.

    h[k, n] = sqrt(10^(-PL(d_kn)/10)) * g with g an M-vector of independent
    standard circular complex Gaussians (unit power per antenna).
    """
    dist = topo.distances()
    amp = np.power(10.0, -pathloss_db(cfg, dist) / 20.0)
    k, n = dist.shape
    raw = _rng(rng_seed).standard_normal((k, n, n_antennas, 2))
    g = (raw[..., 0] + 1j * raw[..., 1]) / math.sqrt(2.0)
    return ChannelState(amp[:, :, None] * g, noise_power_w)


def noise_power(psd_dbm_hz: float, noise_figure_db: float, bandwidth_hz: float) -> float:
    """AWGN power in watts over the given bandwidth, including noise figure."""
    if not bandwidth_hz > 0:
        raise ValueError("bandwidth_hz must be > 0")
    dbm = psd_dbm_hz + 10.0 * math.log10(bandwidth_hz) + noise_figure_db
    return 10.0 ** ((dbm - 30.0) / 10.0)
