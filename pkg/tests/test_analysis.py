import numpy as np
import pytest
from scipy.integrate import quad

from relaxjunction import (
    ChainGeometry,
    ConstantGamma,
    DomainError,
    FermiParameters,
    GammaOverN,
    LeadAttachment,
    Method,
    QuadratureConfig,
    ReservoirMode,
    SpacingGamma,
    SweepParameter,
    SweepSpec,
    SystemHamiltonian,
    Uniform,
    UsageError,
    gless_error_bound,
    gless_error_norm,
    landauer_convergence_report,
    run_sweep,
)
from relaxjunction.analysis import iter_sweep
from relaxjunction.model import fermi


def scipy_gless_norm(wk, g, mu, T):
    fk = fermi(wk, mu, T)

    def f(w):
        return g / ((w - wk) ** 2 + g * g / 4) * abs(fk - fermi(w, mu, T)) / (2 * np.pi)

    pts = sorted({wk, mu})
    edges = [-np.inf] + pts + [np.inf]
    return sum(quad(f, a, b, epsabs=1e-15, epsrel=1e-12, limit=1000)[0]
               for a, b in zip(edges[:-1], edges[1:]))


class TestErrorBound:
    def test_value(self):
        assert gless_error_bound(0.01, 1.0) == pytest.approx(0.011512925, abs=1e-9)

    @pytest.mark.parametrize("g,T", [(2.0, 1.0), (0.0, 1.0), (0.1, 0.0), (-0.1, 1.0)])
    def test_domain(self, g, T):
        with pytest.raises(DomainError):
            gless_error_bound(g, T)

    @pytest.mark.parametrize("ratio", [1e-4, 1e-3, 1e-2, 1e-1])
    def test_norm_below_bound(self, ratio):
        T = 0.05
        mode = ReservoirMode(0.2, ratio * T, np.array([1.0]))
        assert gless_error_norm(mode, 0.2, T) <= gless_error_bound(ratio * T, T)

    @pytest.mark.parametrize("offset,ratio", [(0.0, 1e-2), (3.0, 1e-3), (50.0, 1e-2)])
    def test_norm_matches_scipy(self, offset, ratio):
        T, mu = 0.1, 0.0
        g = ratio * T
        mode = ReservoirMode(mu + offset * T, g, np.array([1.0]))
        val = gless_error_norm(mode, mu, T, QuadratureConfig(rel_tol=1e-11, abs_tol=1e-16))
        assert val == pytest.approx(scipy_gless_norm(mode.omega, g, mu, T), rel=1e-8)

    def test_far_mode_is_lorentzian_tail(self):
        # 50 T above mu the error is set by the Lorentzian tail, ~ gamma / (2 pi 50 T)
        T = 0.1
        mode = ReservoirMode(50 * T, T / 100, np.array([1.0]))
        val = gless_error_norm(mode, 0.0, T)
        assert val == pytest.approx(mode.gamma / (2 * np.pi * 50 * T), rel=0.05)

    def test_zero_temperature(self):
        with pytest.raises(DomainError):
            gless_error_norm(ReservoirMode(0.0, 0.1, np.array([1.0])), 0.0, 0.0)


@pytest.fixture
def geometry():
    return ChainGeometry(SystemHamiltonian([[0.0]]), LeadAttachment(), LeadAttachment())


def spec(geometry, parameter, values, methods=("pole_sum", "trace_integral"), **kw):
    return SweepSpec(parameter, values, methods, geometry, kw.pop("n_modes", 16),
                     kw.pop("gamma_policy", Uniform(0.1)), FermiParameters(0.25, -0.25), **kw)


class TestSweep:
    @pytest.mark.parametrize("values", [(), (0.1, 0.3, 0.2), (0.1, -0.1), (0.1, np.nan)])
    def test_invalid_gamma_values(self, geometry, values):
        with pytest.raises(UsageError):
            run_sweep(spec(geometry, "gamma", values))

    def test_invalid_sizes(self, geometry):
        with pytest.raises(UsageError):
            run_sweep(spec(geometry, "reservoir_size", (4, 8.5)))

    def test_unknown_method(self, geometry):
        with pytest.raises(UsageError):
            spec(geometry, "gamma", (0.1,), methods=("bogus",))

    def test_gamma_sweep(self, geometry):
        rows = run_sweep(spec(geometry, "gamma", (0.05, 0.1, 0.2)))
        assert [r.value for r in rows] == [0.05, 0.1, 0.2]
        for r in rows:
            a, b = r.current("pole_sum"), r.current("trace_integral")
            assert a == pytest.approx(b, rel=1e-7)
            assert r.deviations[(Method.POLE_SUM, Method.TRACE_INTEGRAL)] < 1e-7

    def test_failing_cell_isolated(self, geometry):
        rows = run_sweep(spec(geometry, "gamma", (1e-300, 0.1)))
        assert rows[0].results[Method.TRACE_INTEGRAL] is None
        assert rows[0].errors[Method.TRACE_INTEGRAL].startswith("accuracy:")
        assert rows[0].deviations[(Method.POLE_SUM, Method.TRACE_INTEGRAL)] is None
        assert rows[1].errors[Method.TRACE_INTEGRAL] is None

    def test_bias_points(self, geometry):
        s = spec(geometry, "bias", (0.1, 0.4))
        _, fp = s.point(0.4)
        assert (fp.mu_L, fp.mu_R) == (0.2, -0.2)

    def test_size_sweep(self, geometry):
        rows = run_sweep(spec(geometry, "reservoir_size", (8, 16)))
        assert rows[1].results[Method.POLE_SUM].value != rows[0].results[Method.POLE_SUM].value

    def test_jobs_do_not_change_results(self, geometry):
        s = spec(geometry, "gamma", (0.02, 0.05, 0.1, 0.2, 0.4))
        one = [[r.current(m) for m in s.methods] for r in run_sweep(s, jobs=1)]
        many = [[r.current(m) for m in s.methods] for r in run_sweep(s, jobs=4)]
        assert one == many

    def test_streams_in_order(self, geometry):
        s = spec(geometry, "gamma", (0.3, 0.2, 0.1))
        assert [r.value for r in iter_sweep(s, jobs=3)] == [0.3, 0.2, 0.1]

    def test_landauer_reference(self, geometry):
        rows = run_sweep(spec(geometry, "gamma", (0.1,), reference_landauer=True))
        assert rows[0].reference.value == pytest.approx(0.0330731, rel=1e-6)
        assert rows[0].reference_deviation[Method.POLE_SUM] > 0


class TestConvergence:
    def test_report(self, geometry):
        fp = FermiParameters(0.25, -0.25)
        rows = landauer_convergence_report(geometry, fp, [16, 32], GammaOverN(8.0))
        assert [r.N for r in rows] == [16, 32]
        assert rows[1].gamma == 0.25
        assert rows[1].spacing_over_gamma == pytest.approx(2 * np.pi / 33 / 0.25)
        assert rows[0].dlvn_rel_err == pytest.approx(abs(rows[0].dlvn / rows[0].landauer - 1))
        assert all(r.error is None for r in rows)

    def test_non_identical_uses_trace_integral(self):
        geo = ChainGeometry(SystemHamiltonian([[0.0]]), LeadAttachment(1.0, 0.2),
                            LeadAttachment(1.0, 0.3))
        rows = landauer_convergence_report(geo, FermiParameters(0.25, -0.25), [16],
                                           ConstantGamma(0.1))
        assert rows[0].dlvn is not None and rows[0].error is None

    def test_spacing_rule(self, geometry):
        rows = landauer_convergence_report(geometry, FermiParameters(0.25, -0.25), [16],
                                           SpacingGamma(1.0))
        assert rows[0].error is None

    def test_bad_sizes(self, geometry):
        with pytest.raises(UsageError):
            landauer_convergence_report(geometry, FermiParameters(0.1, 0.0), [32, 16],
                                        ConstantGamma(0.1))

    def test_error_recorded(self, geometry):
        rows = landauer_convergence_report(geometry, FermiParameters(0.25, -0.25), [16],
                                           ConstantGamma(1e-300))
        assert rows[0].dlvn is not None  # pole sum still works
        assert rows[0].error is not None  # quadrature-based non-Markovian refuses
