import numpy as np
import pytest

from twistmap import ConfigurationError, TrigSeries, three_wave_potential

TWO_PI = 2.0 * np.pi


def test_canonical_sign_flip():
    # a cos(-<k,x> + phi) must be stored as a cos(<k,x> - phi)
    f = TrigSeries.from_terms(2, [((-1, 1), 2.0, 0.7)])
    g = TrigSeries.from_terms(2, [((1, -1), 2.0, -0.7)])
    assert np.array_equal(f.wave_vectors, g.wave_vectors)
    assert np.allclose(f.phases, g.phases)
    x = np.array([0.3, 1.4])
    assert f(x) == pytest.approx(2.0 * np.cos(-(0.3 - 1.4) + 0.7), abs=1e-14)


def test_negative_amplitude_normalized():
    f = TrigSeries.from_terms(2, [((1, 0), -1.5, 0.2)])
    assert (f.amplitudes > 0).all()
    x = np.array([0.9, 0.0])
    assert f(x) == pytest.approx(-1.5 * np.cos(0.9 + 0.2), abs=1e-14)


def test_same_wave_vector_terms_merge():
    f = TrigSeries.from_terms(2, [((1, 0), 1.0, 0.0), ((-1, 0), 1.0, np.pi / 2)])
    assert f.n_terms == 1
    xs = np.linspace(0, TWO_PI, 17)[:, None] * np.array([[1.0, 0.0]])
    expect = np.cos(xs[:, 0]) + np.cos(-xs[:, 0] + np.pi / 2)
    assert np.allclose(f(xs), expect, atol=1e-14)


def test_constant_term_collapses():
    f = TrigSeries.from_terms(2, [((0, 0), 2.0, np.pi / 3), ((0, 0), 1.0, 0.0)])
    assert f.n_terms == 1
    assert f.constant_term == pytest.approx(2.0 * np.cos(np.pi / 3) + 1.0, abs=1e-14)


def test_periodicity():
    rng = np.random.default_rng(7)
    f = three_wave_potential((1.0, 0.8, 1.2), (0.1, -0.4, 2.0))
    x = rng.uniform(0, TWO_PI, size=(50, 2))
    for shift in ([TWO_PI, 0.0], [0.0, TWO_PI], [TWO_PI, TWO_PI]):
        assert np.allclose(f(x + np.array(shift)), f(x), atol=1e-12)


def test_gradient_matches_finite_differences():
    f = three_wave_potential((1.0, 0.8, 1.2), (0.1, -0.4, 2.0))
    rng = np.random.default_rng(3)
    x = rng.uniform(0, TWO_PI, size=(20, 2))
    h = 1e-6
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (f(x + e) - f(x - e)) / (2 * h)
        assert np.allclose(f.gradient(x)[:, j], fd, atol=1e-8)


def test_partial_is_gradient_component():
    f = three_wave_potential((1.0, 0.8, 1.2), (0.1, -0.4, 2.0))
    rng = np.random.default_rng(5)
    x = rng.uniform(0, TWO_PI, size=(30, 2))
    for j in range(2):
        assert np.allclose(f.partial(j)(x), f.gradient(x)[:, j], atol=1e-13)


def test_shifted():
    f = three_wave_potential((1.0, 0.8, 1.2), (0.1, -0.4, 2.0))
    s = np.array([0.7, -1.1])
    rng = np.random.default_rng(11)
    x = rng.uniform(0, TWO_PI, size=(30, 2))
    assert np.allclose(f.shifted(s)(x), f(x + s), atol=1e-12)


def test_add_sub_scale():
    f = TrigSeries.from_terms(2, [((1, 0), 1.0, 0.0)])
    g = TrigSeries.from_terms(2, [((0, 1), 2.0, 0.3)])
    x = np.array([0.4, 1.9])
    assert (f + g)(x) == pytest.approx(f(x) + g(x), abs=1e-14)
    assert (f - g)(x) == pytest.approx(f(x) - g(x), abs=1e-14)
    assert (3.0 * f)(x) == pytest.approx(3.0 * f(x), abs=1e-14)
    cancel = f - f
    assert cancel.n_terms == 0
    assert cancel(x) == 0.0


def test_dimension_checks():
    f = TrigSeries.from_terms(2, [((1, 0), 1.0, 0.0)])
    with pytest.raises(ConfigurationError):
        f(np.zeros(3))
    with pytest.raises(ConfigurationError):
        TrigSeries.from_terms(2, [((1, 0, 0), 1.0, 0.0)])
    g = TrigSeries.from_terms(3, [((1, 0, 0), 1.0, 0.0)])
    with pytest.raises(ConfigurationError):
        f + g


def test_three_wave_structure():
    V = three_wave_potential((1.0, 2.0, 3.0), (0.1, 0.2, 0.3))
    terms = {tuple(k): (a, phi) for k, a, phi in V.terms()}
    assert set(terms) == {(1, 0), (0, 1), (1, -1)}
    assert terms[(1, 0)] == pytest.approx((1.0, 0.1))
    assert terms[(0, 1)] == pytest.approx((2.0, 0.2))
    assert terms[(1, -1)] == pytest.approx((3.0, 0.3))
