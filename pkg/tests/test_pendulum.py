import numpy as np
import pytest

from twistmap import (
    ConfigurationError,
    DegenerateResonanceError,
    PhaseState,
    TrigSeries,
    build_geometry,
    iterate,
    three_wave_potential,
)
from twistmap.pendulum import (
    action,
    default_energy_grid,
    frequency_and_twist,
    harmonic_frequency,
    in_oscillatory_domain,
    make_pendulum,
    oscillation_period,
    pendulum_energy,
    project_reduced,
    reduce_to_pendulum,
)

from oracles import (
    brute_force_extrema,
    pendulum_action_reference,
    pendulum_period_reference,
)

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def cosine_model():
    # u = -cos q, A = 1: the classical pendulum with E_sep = 1
    u = TrigSeries.from_terms(1, [((1,), -1.0, 0.0)])
    return make_pendulum(1.0, u)


class TestReduction:
    def test_three_wave_single_resonance(self):
        V = three_wave_potential((1.0, 1.0, 0.7), (0.0, 0.0, 0.4))
        geo = build_geometry((1, -1))
        model = reduce_to_pendulum(V, geo, [2.2, 2.2])
        terms = list(model.potential.terms())
        assert len(terms) == 1
        k, a, phi = terms[0]
        assert tuple(k) == (1,)
        assert a == pytest.approx(0.7)
        assert phi == pytest.approx(0.4)
        assert model.stiffness == 2.0
        assert model.E_sep - model.E_min == pytest.approx(2 * 0.7, abs=1e-12)

    def test_no_parallel_harmonic_degenerate(self):
        V = TrigSeries.from_terms(2, [((1, 0), 1.0, 0.0), ((0, 1), 1.0, 0.0)])
        geo = build_geometry((1, -1))
        with pytest.raises(DegenerateResonanceError):
            reduce_to_pendulum(V, geo, [1.3, 1.3])

    def test_off_surface_rejected(self):
        V = three_wave_potential()
        geo = build_geometry((1, -1))
        with pytest.raises(ConfigurationError):
            reduce_to_pendulum(V, geo, [1.3, 1.2])

    def test_two_harmonic_extrema_vs_brute_force(self):
        V = TrigSeries.from_terms(
            2, [((1, -1), 1.0, 0.3), ((2, -2), 0.4, 1.1), ((1, 0), 1.0, 0.0)]
        )
        geo = build_geometry((1, -1))
        model = reduce_to_pendulum(V, geo, [0.9, 0.9])

        def u_fn(q):
            return np.cos(q + 0.3) + 0.4 * np.cos(2 * q + 1.1)

        q_lo, q_hi = brute_force_extrema(u_fn)
        assert model.q_min == pytest.approx(q_lo, abs=1e-6)
        assert model.q_max == pytest.approx(q_hi, abs=1e-6)
        # refinement is much sharper than the scan: u' vanishes to ~1e-13
        assert abs(model.u_prime(model.q_min)) < 1e-10
        assert abs(model.u_prime(model.q_max)) < 1e-10

    def test_negative_stiffness_normalized(self):
        u = TrigSeries.from_terms(1, [((1,), -1.0, 0.0)])
        m_pos = make_pendulum(1.0, u)
        m_neg = make_pendulum(-1.0, -1.0 * u)
        assert m_neg.flipped
        assert m_neg.stiffness == 1.0
        assert m_neg.E_min == m_pos.E_min
        assert m_neg.E_sep == m_pos.E_sep
        for e in np.linspace(-0.9, 0.9, 7):
            assert action(m_neg, e) == pytest.approx(action(m_pos, e), rel=1e-12)


class TestOscillatoryDomain:
    def test_boundary_excluded(self, cosine_model):
        m = cosine_model
        assert not in_oscillatory_domain(m, 0.0, m.q_min)
        assert not in_oscillatory_domain(m, 0.0, m.q_max)

    def test_interior_point(self, cosine_model):
        assert in_oscillatory_domain(cosine_model, 0.0, cosine_model.q_min + 1.0)

    def test_direct_arithmetic(self, cosine_model):
        # u = -cos q: E(1.9, 0) = 1.9^2/2 - 1 = 0.805 < 1
        assert in_oscillatory_domain(cosine_model, 1.9, 0.0)
        assert not in_oscillatory_domain(cosine_model, 2.1, 0.0)
        assert pendulum_energy(cosine_model, 1.9, 0.0) == pytest.approx(0.805)

    def test_p_extent_at_well_bottom(self, cosine_model):
        m = cosine_model
        p_edge = np.sqrt(2.0 * (m.E_sep - m.E_min) / m.stiffness)
        assert not in_oscillatory_domain(m, p_edge, m.q_min)
        assert in_oscillatory_domain(m, p_edge * (1 - 1e-12), m.q_min)


class TestActionQuadrature:
    def test_harmonic_limit(self, cosine_model):
        e = -0.9999
        assert action(cosine_model, e) == pytest.approx(e + 1.0, rel=1e-5)

    def test_elliptic_oracle_at_zero_energy(self, cosine_model):
        assert action(cosine_model, 0.0) == pytest.approx(
            pendulum_action_reference(0.0), rel=1e-8
        )

    def test_elliptic_oracle_sweep(self, cosine_model):
        for e in np.linspace(-1 + 1e-3, 1 - 1e-3, 50):
            assert action(cosine_model, e) == pytest.approx(
                pendulum_action_reference(e), rel=1e-8
            )
            assert oscillation_period(cosine_model, e) == pytest.approx(
                pendulum_period_reference(e), rel=1e-8
            )

    def test_stiffness_scaling(self):
        # p = sqrt(2(E-u)/A): quadrupling A halves I at fixed E
        u = TrigSeries.from_terms(1, [((1,), -1.0, 0.0)])
        m1 = make_pendulum(1.0, u)
        m4 = make_pendulum(4.0, u)
        for e in (-0.5, 0.0, 0.7):
            assert action(m4, e) == pytest.approx(action(m1, e) / 2.0, rel=1e-13)

    def test_action_monotone(self, cosine_model):
        grid = default_energy_grid(cosine_model, 64)
        acts = [action(cosine_model, e) for e in grid]
        assert np.all(np.diff(acts) > 0)

    def test_energy_domain_errors(self, cosine_model):
        with pytest.raises(ValueError):
            action(cosine_model, -1.5)
        with pytest.raises(ValueError):
            action(cosine_model, 1.0)


class TestFrequencyAndTwist:
    def test_harmonic_limit_frequency(self, cosine_model):
        grid = default_energy_grid(cosine_model, 32)
        table = frequency_and_twist(cosine_model, grid)
        assert table.frequencies[0] == pytest.approx(
            harmonic_frequency(cosine_model), rel=1e-3
        )
        assert harmonic_frequency(cosine_model) == 1.0

    def test_period_oracle_at_zero_energy(self, cosine_model):
        omega_ref = TWO_PI / pendulum_period_reference(0.0)
        grid = np.array([-0.01, 0.0, 0.01])
        table = frequency_and_twist(cosine_model, grid)
        assert table.frequencies[1] == pytest.approx(omega_ref, rel=1e-8)

    def test_frequency_decreases_toward_separatrix(self, cosine_model):
        grid = default_energy_grid(cosine_model, 64)
        top = grid >= cosine_model.E_min + 0.9 * cosine_model.well_depth
        assert np.all(np.diff(table_freq := frequency_and_twist(
            cosine_model, grid).frequencies[top]) < 0)
        assert table_freq[-1] < 0.5  # logarithmic slowdown is visible

    def test_action_derivative_consistency(self, cosine_model):
        # dI/dE from the action quadrature (local 5-point stencil) must
        # equal 1/omega = T/2pi from the independent period quadrature
        m = cosine_model
        h = 3e-5 * m.well_depth
        for energy in m.E_min + m.well_depth * np.linspace(0.02, 0.98, 25):
            samples = [action(m, energy + j * h) for j in (-2, -1, 1, 2)]
            di_de = (-samples[3] + 8 * samples[2] - 8 * samples[1]
                     + samples[0]) / (12 * h)
            t_quad = oscillation_period(m, energy)
            assert abs(di_de * 2 * np.pi / t_quad - 1.0) < 1e-5

    def test_twist_flags(self, cosine_model):
        grid = default_energy_grid(cosine_model, 32)
        table = frequency_and_twist(cosine_model, grid, twist_bound=1e3)
        assert not table.flags.all()
        strict = frequency_and_twist(cosine_model, grid, twist_bound=1.0001)
        assert strict.flags.any()

    def test_csv_round_trip_precision(self, cosine_model):
        grid = default_energy_grid(cosine_model, 8)
        table = frequency_and_twist(cosine_model, grid)
        lines = table.to_csv().strip().splitlines()
        assert lines[0] == "E,I,omega,twist,flags"
        row = lines[1].split(",")
        assert float(row[0]) == table.energies[0]
        assert float(row[1]) == table.actions[0]


class TestProjectReduced:
    def test_on_surface_orbit_zero_p(self):
        V = three_wave_potential()
        geo = build_geometry((1, -1))
        s = PhaseState.from_lift([1.3, 1.3], [0.5, 0.2])
        orbit = iterate(s, V, 0.0, 1000, stride=10)
        pq = project_reduced(orbit, geo, 0.04)
        assert np.abs(pq[:, 0]).max() == 0.0

    def test_unperturbed_off_surface(self):
        V = three_wave_potential()
        geo = build_geometry((1, -1))
        s = PhaseState.from_lift([1.5, 1.3], [0.5, 0.2])
        orbit = iterate(s, V, 0.0, 1000, stride=10)
        pq = project_reduced(orbit, geo, 0.04)
        assert np.allclose(pq[:, 0], 0.1 / np.sqrt(0.04), atol=1e-13)
        q = pq[:, 1]
        assert np.allclose(np.diff(q, 2), 0.0, atol=1e-9)

    def test_ribbon_energy_spread(self):
        # librating orbit: reduced energy is conserved up to O(sqrt(eps));
        # constant frozen from the first measured run (~1.7 at eps = 0.1)
        V = three_wave_potential()
        geo = build_geometry((1, -1))
        model = reduce_to_pendulum(V, geo, [2.2, 2.2])
        for eps in (0.1, 0.01):
            s = PhaseState.from_lift([2.2, 2.2], [np.pi + 0.8, 0.0])
            orbit = iterate(s, V, eps, 200_000, stride=20)
            pq = project_reduced(orbit, geo, eps)
            energies = pendulum_energy(model, pq[:, 0], pq[:, 1])
            spread = energies.max() - energies.min()
            assert spread < 2.5 * np.sqrt(eps)
