import numpy as np
import pytest

from twistmap import (
    ConfigurationError,
    LightLikeResonanceError,
    ResonanceModule,
    build_geometry,
    detect_resonances,
    integer_rank,
)

TWO_PI = 2.0 * np.pi


class TestIntegerLattice:
    def test_rank(self):
        assert integer_rank([]) == 0
        assert integer_rank([(0, 0)]) == 0
        assert integer_rank([(2, 4)]) == 1
        assert integer_rank([(1, 1), (1, -1)]) == 2
        assert integer_rank([(1, 2), (2, 4)]) == 1
        assert integer_rank([(1, 0, 0), (0, 1, 0), (1, 1, 0)]) == 2

    def test_module_canonical_generators(self):
        m = ResonanceModule.from_vectors(2, [(2, 4)])
        assert m.rank == 1
        assert np.array_equal(m.generators[:, 0], [1, 2])

    def test_membership(self):
        m = ResonanceModule.from_vectors(2, [(1, -1)])
        assert m.contains((0, 0))
        assert m.contains((1, -1))
        assert m.contains((-3, 3))
        assert not m.contains((1, 0))
        assert not m.contains((1, 1))

    def test_trivial_and_full(self):
        t = ResonanceModule.trivial(3)
        assert t.rank == 0
        assert t.contains((0, 0, 0))
        assert not t.contains((1, 0, 0))
        f = ResonanceModule.full(3)
        assert f.rank == 3
        assert f.contains((5, -7, 2))

    def test_generator_sign_and_coprimality(self):
        m = ResonanceModule.from_vectors(3, [(0, -2, 2), (4, 0, 0)])
        for col in range(m.rank):
            g = m.generators[:, col]
            nz = g[g != 0]
            assert nz[0] > 0
            assert np.gcd.reduce(np.abs(g)) == 1


class TestDetection:
    def test_zero_component_map_convention(self):
        rep = detect_resonances([0.0, 0.37366], n_max=5, tolerance=1e-9)
        assert [(r.k, r.k0) for r in rep.found] == [((1, 0), 0)]
        assert rep.found[0].defect == 0.0
        assert rep.module.rank == 1

    def test_rational_multiple_of_two_pi(self):
        rep = detect_resonances([TWO_PI / 3.0, np.sqrt(2)], n_max=5, tolerance=1e-9)
        assert [(r.k, r.k0) for r in rep.found] == [((3, 0), 1)]
        assert rep.found[0].defect < 1e-12

    def test_flow_convention(self):
        rep = detect_resonances([1.0, 1.0], n_max=5, tolerance=1e-9, convention="flow")
        assert ((1, -1), 0) in [(r.k, r.k0) for r in rep.found]
        assert rep.module.rank == 1
        assert all(r.k0 == 0 for r in rep.found)

    def test_nonresonant_gives_empty_report(self):
        rep = detect_resonances([1.0, np.sqrt(2)], n_max=8, tolerance=1e-9,
                                convention="flow")
        assert rep.found == ()
        assert rep.module.rank == 0

    def test_detection_stability_under_perturbation(self):
        nu = np.array([TWO_PI / 3.0, np.sqrt(2)])
        n_max, tol = 5, 1e-6
        base = detect_resonances(nu, n_max=n_max, tolerance=tol)
        exact = {(r.k, r.k0) for r in base.found if r.defect < 1e-12}
        rng = np.random.default_rng(1)
        bound = tol / (2 * nu.size * n_max)
        for _ in range(50):
            pert = nu + rng.uniform(-bound, bound, size=2)
            rep = detect_resonances(pert, n_max=n_max, tolerance=tol)
            assert exact <= {(r.k, r.k0) for r in rep.found}

    def test_canonical_sign_of_found_vectors(self):
        rep = detect_resonances([0.0, 0.0], n_max=4, tolerance=1e-9)
        for r in rep.found:
            nz = [v for v in r.k if v != 0]
            assert nz[0] > 0

    def test_rank_bounded_by_dimension(self):
        rep = detect_resonances([0.0, 0.0, 0.0], n_max=3, tolerance=1e-9,
                                convention="flow")
        assert rep.module.rank == 3


class TestGeometry:
    def test_closed_form_identity_hessian(self):
        geo = build_geometry((1, -1))
        assert geo.stiffness == 2.0
        y = np.array([1.2, 1.0])
        lam = geo.lambda_of(y)
        assert lam == pytest.approx(0.1, abs=1e-15)
        assert geo.chi_of(y) == pytest.approx([1.1, 1.1], abs=1e-14)

    def test_on_surface_lambda_zero(self):
        geo = build_geometry((1, -1))
        y = np.array([0.7, 0.7])
        assert geo.lambda_of(y) == 0.0
        assert np.array_equal(geo.chi_of(y), y)

    def test_chi_idempotent_nonlinear(self):
        # mildly non-quadratic integrable part: nu(Y) = Y + 0.2 sin-like bend
        def nu(y):
            return y + 0.05 * np.array([np.tanh(y[0]), np.tanh(y[1])])

        geo = build_geometry((1, -1), frequency_map=nu)
        rng = np.random.default_rng(9)
        for _ in range(1000):
            y = np.array([0.8, 0.8]) + rng.uniform(-0.3, 0.3, 2)
            chi = geo.chi_of(y)
            assert abs(geo.k0_vector @ nu(chi)) <= 1e-12
            assert np.abs(geo.chi_of(chi) - chi).max() <= 1e-10

    def test_map_convention_target(self):
        geo = build_geometry((1, 0), target=TWO_PI)
        y = np.array([TWO_PI + 0.3, 0.5])
        assert geo.lambda_of(y) == pytest.approx(0.3, abs=1e-14)
        assert geo.chi_of(y)[0] == pytest.approx(TWO_PI, abs=1e-13)

    def test_light_like_rejected(self):
        with pytest.raises(LightLikeResonanceError):
            build_geometry((1, 1), hessian=np.diag([1.0, -1.0]))

    def test_non_coprime_rejected(self):
        with pytest.raises(ConfigurationError):
            build_geometry((2, 2))
