import numpy as np
import pytest

from deltascatter.exceptions import DomainError
from deltascatter.scattering import (
    DeltaSystem,
    Spectrum,
    TargetTwoDelta,
    Window,
    build_windows,
    detect_peaks,
    global_window,
    n_resonances_in_range,
    predict_resonances,
    separation_for_resonance_count,
    spectrum_over_grid,
    transmission_at,
)


@pytest.fixture
def get_targets():
    return [
        TargetTwoDelta(alpha1=2.0, dx=2.65),
        TargetTwoDelta(alpha1=3.0, dx=5.97),
    ]


class TestTargetTwoDelta(object):
    def test_init_target(self, get_targets):
        target = get_targets[0]
        assert isinstance(target, TargetTwoDelta)
        assert target.alpha2 == -2.0
        assert isinstance(target.system(), DeltaSystem)
        np.testing.assert_allclose(target.system(x_a=1.0).positions, [1.0, 3.65])

    def test_closed_form_matches_system(self, get_targets):
        for target in get_targets:
            k = np.linspace(0.3, 3.0, 50)
            np.testing.assert_allclose(target.transmission(k), transmission_at(target.system(), k), atol=1e-12)

    @pytest.mark.parametrize("alpha1, dx", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_invalid_target(self, alpha1, dx):
        with pytest.raises(DomainError):
            TargetTwoDelta(alpha1=alpha1, dx=dx)


class TestPredictResonances(object):
    def test_two_resonances(self, get_targets):
        resonances = predict_resonances(get_targets[0], 0.01, 3.0)
        np.testing.assert_allclose(resonances, [1.1855, 2.3710], atol=1e-4)

    def test_five_resonances(self, get_targets):
        resonances = predict_resonances(get_targets[1], 0.01, 3.0)
        np.testing.assert_allclose(resonances, [0.526, 1.052, 1.579, 2.105, 2.631], atol=1e-3)

    def test_empty(self):
        assert predict_resonances(TargetTwoDelta(alpha1=2.0, dx=0.5), 0.01, 3.0) == []

    def test_range_edges(self):
        target = TargetTwoDelta(alpha1=1.0, dx=np.pi)
        assert predict_resonances(target, 1.0, 3.0) == pytest.approx([1.0, 2.0, 3.0])
        assert predict_resonances(target, 1.5, 2.5) == pytest.approx([2.0])

    def test_invalid_range(self, get_targets):
        with pytest.raises(DomainError):
            predict_resonances(get_targets[0], 3.0, 1.0)
        with pytest.raises(DomainError):
            predict_resonances(get_targets[0], 0.0, 1.0)

    def test_resonances_are_transparent(self, get_targets):
        for target in get_targets:
            for k_n in predict_resonances(target, 0.01, 3.0):
                assert transmission_at(target.system(), k_n) > 1 - 1e-8

    @pytest.mark.parametrize("n_resonances", [1, 2, 3, 4, 5])
    def test_separation_for_resonance_count(self, n_resonances):
        dx = separation_for_resonance_count(n_resonances, k_max=3.0)
        for alpha1 in [2.0, 3.0, 4.0]:
            assert n_resonances_in_range(TargetTwoDelta(alpha1=alpha1, dx=dx), 0.01, 3.0) == n_resonances

    def test_separation_invalid(self):
        with pytest.raises(DomainError):
            separation_for_resonance_count(0)
        with pytest.raises(DomainError):
            separation_for_resonance_count(1.5)


class TestDetectPeaks(object):
    def test_flat_spectrum(self):
        k = np.linspace(0.1, 3.0, 100)
        assert detect_peaks(Spectrum(k, np.ones_like(k)), prominence_floor=0.1) == []

    def test_agrees_with_prediction(self, get_targets):
        for target in get_targets:
            spectrum = spectrum_over_grid(target.system(), 0.01, 3.0, 3000)
            predicted = predict_resonances(target, 0.01, 3.0)
            detected = detect_peaks(spectrum, prominence_floor=0.1)
            assert len(detected) == len(predicted)
            for k_detected, k_predicted in zip(detected, predicted):
                assert abs(k_detected - k_predicted) <= spectrum.grid_step

    def test_prominence_floor(self):
        k = np.linspace(0.0, 10.0, 1001)[1:]
        t = 0.5 + 0.02 * np.sin(5 * k)
        t[500] = 0.9
        assert detect_peaks(Spectrum(k, t), prominence_floor=0.1) == pytest.approx([k[500]])

    def test_random_targets(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            target = TargetTwoDelta(alpha1=rng.uniform(1.0, 3.0), dx=rng.uniform(1.2, 6.0))
            spectrum = spectrum_over_grid(target.system(), 0.5, 3.0, 3000)
            predicted = predict_resonances(target, 0.5, 3.0)
            detected = detect_peaks(spectrum, prominence_floor=0.1)
            for k_predicted in predicted:
                if spectrum.k_values[0] + spectrum.grid_step < k_predicted < spectrum.k_values[-1] - spectrum.grid_step:
                    assert np.min(np.abs(np.array(detected) - k_predicted)) <= spectrum.grid_step
                assert transmission_at(target.system(), k_predicted) > 1 - 1e-8


class TestBuildWindows(object):
    def test_two_windows(self):
        windows = build_windows([1.1855, 2.3710], 0.01, 3.0)
        assert len(windows) == 2
        assert windows[0].half_width == pytest.approx(0.59275)
        assert (windows[0].lo, windows[0].hi) == pytest.approx((0.59275, 1.77825))
        assert (windows[1].lo, windows[1].hi) == pytest.approx((1.77825, 2.96375))
        assert [w.index for w in windows] == [1, 2]

    def test_single_window(self):
        windows = build_windows([1.5708], 0.01, 3.0)
        assert len(windows) == 1
        assert windows[0].half_width == pytest.approx(0.7854)
        assert (windows[0].lo, windows[0].hi) == pytest.approx((0.7854, 2.3562))

    def test_uniform_windows(self, get_targets):
        resonances = predict_resonances(get_targets[1], 0.01, 3.0)
        windows = build_windows(resonances, 0.01, 3.0)
        assert len(windows) == 5
        widths = [w.width for w in windows]
        assert max(widths) - min(widths) < 1e-12
        assert windows[0].half_width == pytest.approx(0.2631, abs=1e-4)
        for window in windows:
            assert not window.clipped
            assert abs(window.center - 0.5 * (window.lo + window.hi)) < 1e-12

    def test_clipping(self):
        with pytest.warns(UserWarning):
            windows = build_windows([0.3, 1.5, 2.7], 0.01, 3.0)
        assert windows[0].lo == 0.01
        assert windows[0].center == 0.3
        assert windows[0].clipped
        assert windows[2].hi == 3.0
        assert not windows[1].clipped

    def test_invalid_resonances(self):
        with pytest.raises(DomainError):
            build_windows([], 0.01, 3.0)
        with pytest.raises(DomainError):
            build_windows([2.0, 1.0], 0.01, 3.0)
        with pytest.raises(DomainError):
            build_windows([1.0, 3.5], 0.01, 3.0)

    def test_global_window(self):
        window = global_window(0.01, 3.0)
        assert (window.lo, window.hi) == (0.01, 3.0)
        assert window.index == 1
        assert not window.clipped

    def test_window_round_trip(self):
        window = build_windows([1.1855, 2.3710], 0.01, 3.0)[1]
        assert Window.from_dict(window.to_dict()) == window

    def test_invalid_window(self):
        with pytest.raises(DomainError):
            Window(index=0, center=1.0, half_width=0.5, lo=0.5, hi=1.5)
        with pytest.raises(DomainError):
            Window(index=1, center=0.2, half_width=0.5, lo=-0.3, hi=0.7)
