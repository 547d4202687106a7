import numpy as np
import pytest

from cran_maxmin.channels import GenConfig, generate_channels, generate_topology, \
    noise_power, trial_seed
from cran_maxmin.model import ChannelState


def random_channels(seed: int, n_users: int, n_rrh: int, n_antennas: int,
                    noise_power_w: float = 1.0) -> ChannelState:
    """Unit-scale CN(0,1) channels; fast instances for solver contract tests."""
    rng = np.random.default_rng(seed)
    h = (rng.standard_normal((n_users, n_rrh, n_antennas))
         + 1j * rng.standard_normal((n_users, n_rrh, n_antennas))) / np.sqrt(2.0)
    return ChannelState(h, noise_power_w)


def desk_instance(seed: int, n_rrh: int = 3, n_users: int = 6, n_antennas: int = 2):
    """Realistic draw with the default geometry and noise model."""
    gen = GenConfig()
    sigma2 = noise_power(gen.noise_psd_dbm_hz, gen.noise_figure_db, 10e6)
    topo = generate_topology(gen, n_rrh, n_users, trial_seed(seed, 0))
    ch = generate_channels(topo, gen, n_antennas, trial_seed(seed, 1),
                           noise_power_w=sigma2)
    return topo, ch, sigma2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
