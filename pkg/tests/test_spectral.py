import numpy as np
import pytest

from twistmap import (
    ConfigurationError,
    ResonanceModule,
    SmallDivisorError,
    TrigSeries,
    first_order_projection,
    project_resonant,
    solve_cohomological,
    three_wave_potential,
)

TWO_PI = 2.0 * np.pi


def grid2(n=64):
    ax = np.linspace(0, TWO_PI, n, endpoint=False)
    return np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1)


class TestProjector:
    def test_single_resonance_membership(self):
        g = ResonanceModule.from_vectors(2, [(1, -1)])
        f = TrigSeries.from_terms(2, [((1, 0), 1.0, 0.0), ((1, -1), 1.0, 0.0)])
        p = project_resonant(f, g)
        assert [tuple(k) for k, _, _ in p.terms()] == [(1, -1)]

    def test_trivial_module_keeps_constant(self):
        g = ResonanceModule.trivial(2)
        f = TrigSeries.from_terms(2, [((1, 0), 1.0, 0.0), ((1, -1), 1.0, 0.0)])
        p = project_resonant(f, g)
        assert p.n_terms == 0
        f2 = f + TrigSeries.from_terms(2, [((0, 0), 2.0, 0.0)])
        p2 = project_resonant(f2, g)
        assert p2.constant_term == pytest.approx(2.0)

    def test_full_module_is_identity(self):
        g = ResonanceModule.full(2)
        f = three_wave_potential((1.0, 0.5, 0.25), (0.1, 0.2, 0.3))
        p = project_resonant(f, g)
        assert np.array_equal(p.wave_vectors, f.wave_vectors)
        assert np.allclose(p.amplitudes, f.amplitudes)

    def test_idempotent_and_reconstructing(self):
        g = ResonanceModule.from_vectors(2, [(1, -1)])
        f = three_wave_potential((1.0, 0.5, 0.25), (0.1, 0.2, 0.3))
        p = project_resonant(f, g)
        pp = project_resonant(p, g)
        assert np.array_equal(p.wave_vectors, pp.wave_vectors)
        assert np.allclose(p.amplitudes, pp.amplitudes)
        x = grid2(16)
        assert np.allclose(p(x) + (f - p)(x), f(x), atol=1e-13)


class TestCohomological:
    def test_single_harmonic(self):
        h1 = TrigSeries.from_terms(2, [((1, 0), 1.0, 0.0)])
        sol = solve_cohomological(h1, [1.0, 0.5], ResonanceModule.trivial(2))
        x = grid2(32)
        assert np.allclose(sol.series(x), -np.sin(x[..., 0]), atol=1e-14)
        assert sol.residual_norm < 1e-12
        assert sol.resonant_part.n_terms == 0
        assert sol.smallest_divisor == pytest.approx(1.0)

    def test_resonant_harmonic_passes_to_average(self):
        h1 = TrigSeries.from_terms(2, [((1, -1), 1.0, 0.0)])
        g = ResonanceModule.from_vectors(2, [(1, -1)])
        sol = solve_cohomological(h1, [1.0, 1.0], g)
        assert sol.series.n_terms == 0
        assert sol.omitted_terms == 1
        x = grid2(16)
        assert np.allclose(sol.resonant_part(x), h1(x), atol=1e-14)

    def test_three_wave_residual(self):
        h1 = three_wave_potential((1.0, 1.0, 1.0), (0.0, 0.0, 0.0))
        nu0 = np.array([1.0, np.sqrt(2.0) - 1.0])
        sol = solve_cohomological(h1, nu0, ResonanceModule.trivial(2))
        assert sol.residual_norm < 1e-10
        assert sol.smallest_divisor == pytest.approx(np.sqrt(2.0) - 1.0, abs=1e-12)

    def test_residual_for_random_series(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            terms = []
            for _ in range(rng.integers(1, 8)):
                k = rng.integers(-4, 5, size=2)
                terms.append((k, rng.uniform(0.1, 2.0), rng.uniform(-3, 3)))
            h1 = TrigSeries.from_terms(2, terms)
            nu0 = rng.uniform(0.3, 1.7, 2)
            try:
                sol = solve_cohomological(h1, nu0, ResonanceModule.trivial(2))
            except SmallDivisorError:
                continue
            assert sol.residual_norm < 1e-10

    def test_map_convention_divisor(self):
        # <k, nu> = 2 pi - 0.25 is large for the flow but small for the map
        h1 = TrigSeries.from_terms(2, [((1, 0), 1.0, 0.0)])
        nu0 = [TWO_PI - 0.25, 0.4]
        flow = solve_cohomological(h1, nu0, ResonanceModule.trivial(2))
        assert flow.smallest_divisor == pytest.approx(TWO_PI - 0.25)
        mapc = solve_cohomological(
            h1, nu0, ResonanceModule.trivial(2), convention="map"
        )
        assert mapc.smallest_divisor == pytest.approx(0.25)
        amp = dict((tuple(k), a) for k, a, _ in mapc.series.terms())
        assert amp[(1, 0)] == pytest.approx(1.0 / 0.25)

    def test_small_divisor_error_names_vector(self):
        h1 = TrigSeries.from_terms(2, [((0, 1), 1.0, 0.0)])
        with pytest.raises(SmallDivisorError) as err:
            solve_cohomological(h1, [1.0, 1e-8], ResonanceModule.trivial(2))
        assert tuple(err.value.wave_vector) == (0, 1)

    def test_normalization_no_resonant_harmonics_in_s(self):
        h1 = three_wave_potential((1.0, 1.0, 1.0), (0.2, 0.4, 0.6))
        g = ResonanceModule.from_vectors(2, [(1, -1)])
        sol = solve_cohomological(h1, [1.0, 1.0], g)
        for k, _, _ in sol.series.terms():
            assert not g.contains(k)


class TestFirstOrderProjection:
    def test_zero_series_collapses_to_point(self):
        s = TrigSeries(2)
        cloud = first_order_projection([0.4, 0.7], s, 0.01,
                                       ResonanceModule.trivial(2), samples=8)
        assert np.allclose(cloud, [0.4, 0.7])

    def test_sqrt_eps_scaling_is_exact(self):
        h1 = three_wave_potential((1.0, 1.0, 1.0), (0.0, 0.0, 0.0))
        sol = solve_cohomological(h1, [1.0, np.sqrt(2.0) - 1.0],
                                  ResonanceModule.trivial(2))
        y0 = np.array([1.0, np.sqrt(2.0) - 1.0])
        g = ResonanceModule.trivial(2)
        c1 = first_order_projection(y0, sol.series, 0.01, g, samples=16)
        c4 = first_order_projection(y0, sol.series, 0.04, g, samples=16)
        d1 = c1 - y0
        d4 = c4 - y0
        mask = np.abs(d1) > 1e-12
        assert np.allclose(d4[mask] / d1[mask], 2.0, atol=1e-12)

    def test_window_requires_rank_one(self):
        s = TrigSeries.from_terms(2, [((1, 0), 1.0, 0.0)])
        with pytest.raises(ConfigurationError):
            first_order_projection([0, 0], s, 0.01, ResonanceModule.trivial(2),
                                   samples=8, oscillation_window=(0.0, 1.0))

    def test_window_restricts_phase(self):
        s = TrigSeries.from_terms(2, [((1, 0), 1.0, 0.0), ((0, 1), 0.5, 0.3)])
        g = ResonanceModule.from_vectors(2, [(1, -1)])
        samples = 32
        full = first_order_projection([0, 0], s, 0.01, g, samples=samples)
        win = (1.0, 2.5)
        cut = first_order_projection([0, 0], s, 0.01, g, samples=samples,
                                     oscillation_window=win)
        assert 0 < len(cut) < len(full)
        frac = (win[1] - win[0]) / TWO_PI
        assert len(cut) / len(full) == pytest.approx(frac, rel=0.2)
