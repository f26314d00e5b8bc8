import numpy as np
import pytest

from twistmap import ConfigurationError, Orbit, PhaseState, iterate, three_wave_potential
from twistmap.classify import (
    ClassifierConfig,
    OrbitLabel,
    classify,
    frequency_drift,
    mean_frequency,
    winding_analysis,
)

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def potential():
    return three_wave_potential()


def synthetic_orbit(lifts, stride=1, eps=0.1):
    lifts = np.asarray(lifts, dtype=float)
    return Orbit(
        eps=eps,
        stride=stride,
        ys=np.zeros_like(lifts),
        xs=np.remainder(lifts, TWO_PI),
        x_lifts=lifts,
    )


class TestMeanFrequency:
    def test_integrable_returns_actions_exactly(self, potential):
        # dyadic actions keep every lift increment exact in binary
        s = PhaseState.from_lift([0.25, 0.5], [0.0, 0.0])
        orbit = iterate(s, potential, 0.0, 2000, stride=1)
        assert np.array_equal(mean_frequency(orbit), [0.25, 0.5])

    def test_superconvergence_on_regular_orbit(self, potential):
        s = PhaseState.from_lift([2.677, 1.655], [1.1, 2.3])
        full = iterate(s, potential, 0.1, 200_000, stride=20)
        half = iterate(s, potential, 0.1, 100_000, stride=20)
        diff = np.abs(mean_frequency(full) - mean_frequency(half)).max()
        assert diff < 1e-9

    def test_chaotic_halves_disagree(self, potential):
        s = PhaseState.from_lift([2.2, 2.2], [0.1, 0.0])
        orbit = iterate(s, potential, 0.1, 200_000, stride=20)
        assert frequency_drift(orbit) > 1e-4

    def test_short_orbit_rejected(self, potential):
        s = PhaseState.from_lift([0.25, 0.5], [0.0, 0.0])
        orbit = iterate(s, potential, 0.0, 500, stride=1)
        with pytest.raises(ConfigurationError):
            mean_frequency(orbit)


class TestWinding:
    def test_integrable_nonresonant_rotates(self, potential):
        s = PhaseState.from_lift([1.0, np.sqrt(2)], [0.0, 0.0])
        orbit = iterate(s, potential, 0.0, 5000, stride=10)
        assert winding_analysis(orbit, (1, 0)).verdict == "Rotating"
        assert winding_analysis(orbit, (1, -1)).verdict == "Rotating"

    def test_synthetic_oscillation(self):
        n = np.arange(4001)
        lifts = np.column_stack([np.sin(0.01 * n), 0.3 * n])
        summary = winding_analysis(synthetic_orbit(lifts), (1, 0))
        assert summary.verdict == "Oscillating"
        assert summary.extent == pytest.approx(2.0, abs=1e-3)

    def test_map_convention_multiplier(self):
        # q_n = <k, x> - 2 pi k0 n oscillates when x1 rotates at 2 pi + wobble
        n = np.arange(3001)
        lifts = np.column_stack([TWO_PI * n + 0.5 * np.sin(0.02 * n), 0.1 * n])
        rotating = winding_analysis(synthetic_orbit(lifts), (1, 0), k0=0)
        assert rotating.verdict == "Rotating"
        oscillating = winding_analysis(synthetic_orbit(lifts), (1, 0), k0=1)
        assert oscillating.verdict == "Oscillating"
        assert oscillating.extent == pytest.approx(1.0, abs=1e-3)

    def test_near_full_rotation_is_not_oscillating(self):
        # extent 2 pi - 0.05 is inside the guard margin
        n = np.arange(4001)
        half_extent = (TWO_PI - 0.05) / 2.0
        lifts = np.column_stack([half_extent * np.sin(0.01 * n), 0.2 * n])
        summary = winding_analysis(synthetic_orbit(lifts), (1, 0))
        assert summary.verdict == "Undetermined"


class TestClassify:
    def test_integrable_diophantine_is_kam(self, potential):
        s = PhaseState.from_lift([1.0, np.sqrt(2)], [0.3, 0.9])
        orbit = iterate(s, potential, 0.0, 50_000, stride=10)
        assert classify(orbit).label is OrbitLabel.KAM_TORUS

    def test_perturbed_kam(self, potential):
        s = PhaseState.from_lift([2.677, 1.655], [1.1, 2.3])
        orbit = iterate(s, potential, 0.1, 200_000, stride=20)
        res = classify(orbit)
        assert res.label is OrbitLabel.KAM_TORUS
        assert res.drift < 1e-8

    def test_ribbon_inside_oscillatory_domain(self, potential):
        s = PhaseState.from_lift([2.2, 2.2], [np.pi + 0.8, 0.0])
        orbit = iterate(s, potential, 0.1, 200_000, stride=20)
        res = classify(orbit)
        assert res.label is OrbitLabel.RIBBON
        osc = [w for w in res.windings if w.verdict == "Oscillating"]
        assert any(w.k == (1, -1) for w in osc)
        # regression: libration extent of the (1,-1) phase, frozen
        extent = next(w.extent for w in osc if w.k == (1, -1))
        assert extent == pytest.approx(1.854, abs=0.02)
        assert extent < TWO_PI

    def test_spots_at_double_resonance(self, potential):
        s = PhaseState.from_lift(
            [0.02, -0.01], [2 * np.pi / 3 + 0.1, 4 * np.pi / 3]
        )
        orbit = iterate(s, potential, 0.1, 200_000, stride=20)
        res = classify(orbit)
        assert res.label is OrbitLabel.SPOTS

    def test_separatrix_seeds_mostly_chaotic(self, potential):
        # ICs at the separatrix energy of the (1,-1) pendulum
        rng = np.random.default_rng(2024)
        labels = []
        for _ in range(100):
            x1 = rng.normal(0.0, 0.05)
            s = PhaseState.from_lift([2.2, 2.2], [x1, 0.0])
            orbit = iterate(s, potential, 0.1, 100_000, stride=20)
            labels.append(classify(orbit).label)
        chaotic = sum(1 for lab in labels if lab is OrbitLabel.CHAOTIC)
        assert chaotic > 50

    def test_chaotic_precedence(self, potential):
        s = PhaseState.from_lift([2.2, 2.2], [0.1, 0.0])
        orbit = iterate(s, potential, 0.1, 200_000, stride=20)
        res = classify(orbit)
        assert res.label is OrbitLabel.CHAOTIC
        assert res.drift > ClassifierConfig().drift_threshold

    def test_too_short_is_undetermined(self, potential):
        s = PhaseState.from_lift([0.25, 0.5], [0.0, 0.0])
        orbit = iterate(s, potential, 0.0, 500, stride=1)
        assert classify(orbit).label is OrbitLabel.UNDETERMINED

    def test_determinism(self, potential):
        s = PhaseState.from_lift([2.2, 2.2], [np.pi + 0.8, 0.0])
        orbit = iterate(s, potential, 0.1, 50_000, stride=20)
        a = classify(orbit)
        b = classify(orbit)
        assert a.label is b.label
        assert a.drift == b.drift
        assert a.to_dict() == b.to_dict()

    def test_longer_data_does_not_flip_regular_labels(self, potential):
        cases = [
            ([2.677, 1.655], [1.1, 2.3]),
            ([2.2, 2.2], [np.pi + 0.8, 0.0]),
            ([1.0, np.sqrt(2)], [0.3, 0.9]),
        ]
        for y, x in cases:
            s = PhaseState.from_lift(y, x)
            short = classify(iterate(s, potential, 0.1, 100_000, stride=20))
            long = classify(iterate(s, potential, 0.1, 200_000, stride=20))
            regular = {OrbitLabel.KAM_TORUS, OrbitLabel.RIBBON, OrbitLabel.SPOTS}
            if short.label in regular:
                assert long.label in regular | {OrbitLabel.CHAOTIC}
                if long.label is not OrbitLabel.CHAOTIC:
                    assert long.label is short.label

    def test_evidence_payload(self, potential):
        s = PhaseState.from_lift([2.2, 2.2], [np.pi + 0.8, 0.0])
        orbit = iterate(s, potential, 0.1, 50_000, stride=20)
        payload = classify(orbit).to_dict()
        assert payload["label"] == "Ribbon"
        assert len(payload["mean_frequency"]) == 2
        assert isinstance(payload["drift"], float)
        assert any(w["verdict"] == "Oscillating" for w in payload["windings"])
