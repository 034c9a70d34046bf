import numpy as np
import pytest

from relaxjunction import (
    ChainGeometry,
    FermiParameters,
    JunctionModel,
    Lead,
    LeadAttachment,
    SystemHamiltonian,
    Uniform,
    build_single_site_junction,
    discretize_lead_chain,
)


def random_hermitian(rng, n, scale=0.5):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    H = scale * (A + A.conj().T) / 2
    return H


def random_lead(rng, n_sites, n_modes, label="L", gamma_range=(0.01, 1.0)):
    omegas = rng.uniform(-2.0, 2.0, n_modes)
    gammas = rng.uniform(*gamma_range, n_modes)
    V = 0.3 * (rng.normal(size=(n_sites, n_modes)) + 1j * rng.normal(size=(n_sites, n_modes)))
    return Lead.from_arrays(omegas, gammas, V, label)


def random_junction(rng, identical=False, n_sites=None, n_range=(4, 20),
                    gamma_range=(0.01, 1.0)):
    nS = int(rng.integers(1, 4)) if n_sites is None else n_sites
    system = SystemHamiltonian(random_hermitian(rng, nS))
    left = random_lead(rng, nS, int(rng.integers(n_range[0], n_range[1] + 1)), "L", gamma_range)
    if identical:
        right = left.relabeled("R")
    else:
        right = random_lead(rng, nS, int(rng.integers(n_range[0], n_range[1] + 1)), "R",
                            gamma_range)
    return JunctionModel(system, left, right)


def random_fermi(rng, finite_T=None):
    mu_L, mu_R = rng.uniform(-1, 1, 2)
    if finite_T is None:
        finite_T = rng.random() < 0.5
    T = float(rng.uniform(0.01, 0.3)) if finite_T else 0.0
    return FermiParameters(float(mu_L), float(mu_R), T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def symmetric_single_site():
    """Single level at 0 between two identical 32-site chain leads."""
    leads = [discretize_lead_chain(32, 1.0, 0.2, Uniform(0.05), label=s) for s in "LR"]
    return build_single_site_junction(0.0, leads)


@pytest.fixture
def bias():
    return FermiParameters(0.25, -0.25, 0.0)


@pytest.fixture
def single_site_geometry():
    sys1 = SystemHamiltonian(np.array([[0.0]]))
    att = LeadAttachment(1.0, 0.2, 0)
    return ChainGeometry(sys1, att, att)


BASE_CONFIG = """\
[system]
builder = single_site
eps0 = 0.0

[lead_L]
N = 32
t_hop = 1.0
v0 = 0.2
gamma = 0.05

[lead_R]
N = 32
t_hop = 1.0
v0 = 0.2
gamma = 0.05

[fermi]
mu_L = 0.25
mu_R = -0.25
T = 0.0
"""


@pytest.fixture
def write_config(tmp_path):
    def write(text, name="run.ini"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write
