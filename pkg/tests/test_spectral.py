import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import random_fermi, random_junction
from relaxjunction import (
    ComputationError,
    DomainError,
    FermiParameters,
    LesserKind,
    ReservoirMode,
    UsageError,
    g_mode_lesser,
    g_mode_ret,
    green_ret,
    self_energy_ret,
    spectral_density,
    verify_identical_reservoir_identity,
    verify_resolvent_identity,
    weighted_spectral_density,
)
from relaxjunction.spectral import _inverse, green_adv, lead_self_energy_ret, lorentzian


@pytest.fixture
def mode():
    return ReservoirMode(0.3, 0.2, np.array([0.5 + 0.1j]))


class TestModeFunctions:
    def test_retarded(self, mode):
        w = 0.7
        assert g_mode_ret(w, mode) == pytest.approx(1 / (w - 0.3 + 0.1j), rel=1e-15)

    def test_spectral_weight_is_minus_two_im(self, mode):
        w = np.linspace(-2, 2, 11)
        L = lorentzian(w, np.array([mode.omega]), np.array([mode.gamma]))[:, 0]
        assert np.allclose(-2 * g_mode_ret(w, mode).imag, L, rtol=1e-14)

    def test_lorentzian_normalized(self, mode):
        # int L domega = 2 pi for every width
        val, _ = quad(lambda w: lorentzian(w, np.array([0.3]), np.array([0.2]))[0, 0],
                      -np.inf, np.inf, points=None, limit=200)
        assert val == pytest.approx(2 * np.pi, rel=1e-8)

    def test_lesser_kinds(self, mode):
        w = np.array([-1.0, 0.3, 1.0])
        mark = g_mode_lesser(w, mode, mu=0.5, T=0.0)
        nonm = g_mode_lesser(w, mode, mu=0.5, T=0.0, kind=LesserKind.NONMARKOVIAN)
        L = lorentzian(w, np.array([0.3]), np.array([0.2]))[:, 0]
        # f(omega_k) = 1: Markovian is occupied everywhere
        assert np.allclose(mark, 1j * L)
        assert np.allclose(nonm, 1j * L * np.array([1.0, 1.0, 0.0]))

    def test_zero_gamma_rejected(self):
        m = ReservoirMode(0.0, 0.0, np.array([1.0]))
        with pytest.raises(DomainError):
            g_mode_ret(0.1, m)
        with pytest.raises(DomainError):
            g_mode_lesser(0.1, m, 0.0, 0.1)


class TestSelfEnergy:
    def test_density_is_anti_hermitian_part(self, rng):
        j = random_junction(rng, n_sites=3)
        w = np.linspace(-3, 3, 7)
        S = lead_self_energy_ret(w, j.lead_L)
        gam = spectral_density(w, j.lead_L)
        assert np.allclose(1j * (S - np.conj(np.swapaxes(S, -1, -2))), gam, atol=1e-13)

    def test_upper_half_plane_only(self, symmetric_single_site):
        with pytest.raises(DomainError):
            self_energy_ret(0.1 - 1e-3j, symmetric_single_site)
        with pytest.raises(DomainError):
            green_ret(0.1 - 1e-3j, symmetric_single_site)
        assert np.isfinite(green_ret(0.1 + 0.5j, symmetric_single_site)).all()

    def test_scalar_and_batch_agree(self, rng):
        j = random_junction(rng, n_sites=2)
        w = np.array([-0.4, 0.0, 1.3])
        batch = green_ret(w, j)
        for i, wi in enumerate(w):
            assert np.allclose(green_ret(wi, j), batch[i], rtol=1e-13, atol=0)

    def test_single_site_closed_form(self, symmetric_single_site):
        j = symmetric_single_site
        w = 0.17
        sigma = sum(np.sum(np.abs(l.couplings[0]) ** 2 / (w - l.omegas + 0.5j * l.gammas))
                    for l in j.leads)
        assert green_ret(w, j)[0, 0] == pytest.approx(1 / (w - sigma), rel=1e-13)
        assert np.allclose(green_adv(w, j), np.conj(green_ret(w, j)).T)


class TestWeightedDensity:
    def test_fully_occupied(self, symmetric_single_site):
        lead = symmetric_single_site.lead_L
        fp = FermiParameters(10.0, -10.0)
        w = np.linspace(-1, 1, 5)
        assert np.allclose(weighted_spectral_density(w, lead, fp), spectral_density(w, lead))
        assert np.allclose(weighted_spectral_density(w, symmetric_single_site.lead_R, fp), 0)

    def test_side_override(self, symmetric_single_site):
        lead = symmetric_single_site.lead_L
        fp = FermiParameters(10.0, -10.0)
        assert np.allclose(weighted_spectral_density(0.0, lead, fp, side="R"), 0)


class TestIdentities:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
    def test_resolvent_identity(self, seed, w):
        j = random_junction(np.random.default_rng(seed))
        assert verify_resolvent_identity(w, j) < 1e-10

    def test_identical_identity(self, rng):
        for _ in range(10):
            j = random_junction(rng, identical=True)
            assert verify_identical_reservoir_identity(rng.uniform(-2, 2), j) < 1e-10

    def test_identical_identity_precondition(self, rng):
        j = random_junction(rng, identical=False)
        with pytest.raises(UsageError, match="identical reservoirs required"):
            verify_identical_reservoir_identity(0.0, j)


def test_singular_inverse_reports_condition():
    with pytest.raises(ComputationError) as info:
        _inverse(np.array([[[1.0, 1.0], [1.0, 1.0]]]))
    assert info.value.condition is not None
