import numpy as np
import pandas as pd
import pytest

from deltascatter.exceptions import DomainError, InvariantError
from deltascatter.scattering import (
    ClosedFormThreeDelta,
    ClosedFormTwoDelta,
    DeltaSpike,
    DeltaSystem,
    Spectrum,
    delta_transfer_matrix,
    reflection_at,
    spectrum_over_grid,
    system_transfer_matrix,
    transfer_matrix_determinant,
    transmission_at,
    transmission_closed_1delta,
    transmission_closed_2delta,
    transmission_closed_3delta,
    transmission_spectrum,
)
from deltascatter.utils import uniform_k_grid

RESONANCE_K = np.pi / 2.65


def random_system(rng, n_spikes):
    """Random spikes with |strength| <= 6 and spacings in [0.3, 6]"""
    return _system_from_strengths(rng, rng.uniform(-6.0, 6.0, size=n_spikes))


def weak_system(rng, n_spikes, k, max_ratio):
    """Random spikes with |strength| <= max_ratio * k and spacings in [0.3, 6]"""
    return _system_from_strengths(rng, rng.uniform(-max_ratio, max_ratio, size=n_spikes) * k)


def _system_from_strengths(rng, strengths):
    n_spikes = len(strengths)
    spacings = rng.uniform(0.3, 6.0, size=n_spikes - 1)
    x0 = rng.uniform(-5.0, 5.0)
    positions = x0 + np.concatenate([[0.0], np.cumsum(spacings)])
    return DeltaSystem.from_arrays(strengths, positions)


@pytest.fixture
def get_rng():
    return [
        np.random.default_rng(20240611),
    ]


class TestDeltaSystem(object):
    @pytest.fixture
    def init_system(self):
        system = DeltaSystem.two_delta(2.0, -2.0, 2.65)
        return [
            system,
        ]

    def test_init_system(self, init_system):
        system = init_system[0]
        assert isinstance(system, DeltaSystem)
        assert system.n_spikes == 2
        assert system.total_strength == 4.0
        np.testing.assert_array_equal(system.positions, [0.0, 2.65])

    def test_unordered_positions(self):
        with pytest.raises(InvariantError):
            DeltaSystem.from_arrays([1.0, 1.0], [1.0, 0.5])
        with pytest.raises(InvariantError):
            DeltaSystem.from_arrays([1.0, 1.0], [1.0, 1.0])

    def test_empty_and_nan(self):
        with pytest.raises(InvariantError):
            DeltaSystem([])
        with pytest.raises(InvariantError):
            DeltaSpike(np.nan, 0.0)
        with pytest.raises(InvariantError):
            DeltaSystem.from_arrays([1.0, np.inf], [0.0, 1.0])

    def test_three_delta_positions(self):
        system = DeltaSystem.three_delta(1.0, 2.0, 3.0, 0.5, 1.5, x1=1.0)
        np.testing.assert_allclose(system.positions, [1.0, 1.5, 3.0])
        with pytest.raises(DomainError):
            DeltaSystem.three_delta(1.0, 2.0, 3.0, 0.0, 1.5)

    def test_shift_and_reverse(self, init_system):
        system = init_system[0]
        np.testing.assert_allclose(system.shifted(3.0).positions, [3.0, 5.65])
        reversed_system = system.reversed()
        np.testing.assert_allclose(reversed_system.strengths, [-2.0, 2.0])
        np.testing.assert_allclose(reversed_system.positions, [-2.65, 0.0])
        assert system == DeltaSystem.two_delta(2.0, -2.0, 2.65)
        assert system != reversed_system


class TestDeltaTransferMatrix(object):
    def test_zero_strength_is_identity(self):
        np.testing.assert_allclose(delta_transfer_matrix(0.0, 1.3, 0.7), np.eye(2), atol=1e-15)

    def test_direct_substitution(self):
        m = delta_transfer_matrix(2.0, 0.0, 2.0)
        np.testing.assert_allclose(m, [[1 + 1j, 1j], [-1j, 1 - 1j]], atol=1e-15)

    def test_unimodular(self):
        m = delta_transfer_matrix(2.0, 0.5, 1.0)
        assert abs(transfer_matrix_determinant(m) - 1) < 1e-12

    def test_vectorised_shape(self):
        m = delta_transfer_matrix(1.0, 0.2, np.linspace(0.5, 2.0, 7))
        assert m.shape == (7, 2, 2)

    @pytest.mark.parametrize("k", [0.0, -1.0, np.nan, 1e-9])
    def test_invalid_k(self, k):
        with pytest.raises(DomainError):
            delta_transfer_matrix(1.0, 0.0, k)


class TestSystemTransferMatrix(object):
    def test_single_spike(self):
        system = DeltaSystem.from_arrays([1.7], [1.3])
        for k in [0.05, 0.7, 3.0, 12.0]:
            np.testing.assert_allclose(system_transfer_matrix(system, k), delta_transfer_matrix(1.7, 1.3, k), atol=1e-12)

    def test_ordered_product(self):
        strengths, positions = [0.8, -0.5, 1.1], [0.0, 0.9, 2.4]
        system = DeltaSystem.from_arrays(strengths, positions)
        for k in [0.6, 1.5, 4.0]:
            expected = np.eye(2, dtype=complex)
            for strength, position in zip(strengths, positions):
                expected = delta_transfer_matrix(strength, position, k) @ expected
            np.testing.assert_allclose(system_transfer_matrix(system, k), expected, atol=1e-12)

    def test_resonance(self):
        m = system_transfer_matrix(DeltaSystem.two_delta(2.0, -2.0, 2.65), RESONANCE_K)
        assert abs(np.abs(m[0, 0]) ** 2 - 1) < 1e-10

    def test_three_spikes_against_closed_form(self):
        system = DeltaSystem.from_arrays([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])
        m = system_transfer_matrix(system, 1.5)
        closed = transmission_closed_3delta(1.0, 1.0, 1.0, 1.0, 1.0, 1.5)
        assert abs(np.abs(m[0, 0]) ** 2 - 1 / closed) < 1e-12

    def test_unimodular_random(self, get_rng):
        rng = get_rng[0]
        for _ in range(2000):
            k = rng.uniform(0.01, 10.0)
            system = weak_system(rng, rng.integers(1, 6), k, max_ratio=0.5)
            assert abs(transfer_matrix_determinant(system_transfer_matrix(system, k)) - 1) < 1e-10

    def test_requires_system(self):
        with pytest.raises(InvariantError):
            system_transfer_matrix([(1.0, 0.0)], 1.0)


class TestTransmission(object):
    def test_single_spike(self):
        system = DeltaSystem.from_arrays([2.0], [0.0])
        assert transmission_at(system, 2.0) == pytest.approx(0.5, abs=1e-14)
        assert reflection_at(system, 2.0) == pytest.approx(0.5, abs=1e-14)

    def test_resonance(self):
        system = DeltaSystem.two_delta(2.0, -2.0, 2.65)
        assert abs(transmission_at(system, RESONANCE_K) - 1) < 1e-10
        assert reflection_at(system, RESONANCE_K) < 1e-10

    def test_off_resonance_value(self):
        system = DeltaSystem.two_delta(2.0, -2.0, 2.65)
        t = transmission_at(system, 1.0)
        a = 1 - 4 * (np.cos(5.3) - 1)
        b = 4 * np.sin(5.3)
        assert t == pytest.approx(1 / (a**2 + b**2), abs=1e-12)
        assert t == pytest.approx(0.0531, abs=5e-4)
        assert reflection_at(system, 1.0) == pytest.approx(1 - t, abs=1e-12)

    def test_scalar_in_float_out(self):
        system = DeltaSystem.two_delta(1.0, 1.0, 1.0)
        assert isinstance(transmission_at(system, 1.0), float)
        assert transmission_at(system, np.array([1.0, 2.0])).shape == (2,)

    def test_conservation_random(self, get_rng):
        rng = get_rng[0]
        for _ in range(10000):
            k = rng.uniform(0.01, 10.0)
            system = random_system(rng, rng.integers(1, 6))
            t = transmission_at(system, k)
            assert 0 <= t <= 1 + 1e-12
            assert abs(t + reflection_at(system, k) - 1) < 1e-12

    def test_translation_invariance(self, get_rng):
        rng = get_rng[0]
        for _ in range(10000):
            k = rng.uniform(0.01, 10.0)
            system = random_system(rng, rng.integers(1, 6))
            shifted = system.shifted(rng.uniform(-10.0, 10.0))
            assert abs(transmission_at(system, k) - transmission_at(shifted, k)) < 1e-12

    def test_reversal_symmetry(self, get_rng):
        rng = get_rng[0]
        for _ in range(10000):
            k = rng.uniform(0.01, 10.0)
            system = random_system(rng, rng.integers(1, 6))
            assert abs(transmission_at(system, k) - transmission_at(system.reversed(), k)) < 1e-12

    def test_high_k_transparency(self, get_rng):
        rng = get_rng[0]
        for _ in range(500):
            n_spikes = rng.integers(1, 6)
            strengths = rng.uniform(-5.0, 5.0, size=n_spikes)
            positions = np.concatenate([[0.0], np.cumsum(rng.uniform(0.3, 6.0, size=n_spikes - 1))])
            system = DeltaSystem.from_arrays(strengths, positions)
            k = rng.uniform(10.0, 50.0) * system.total_strength
            s = system.total_strength / k
            assert transmission_at(system, k) > 1 - s**2 - 10 * s**3


class TestClosedForms(object):
    def test_two_delta_examples(self):
        assert transmission_closed_2delta(2.0, -2.0, 2.65, RESONANCE_K) == pytest.approx(1.0, abs=1e-12)
        assert transmission_closed_2delta(0.0, 0.0, 1.0, 1.0) == 1.0
        t = transmission_closed_2delta(2.0, -2.0, 2.65, 1.0)
        assert t == pytest.approx(transmission_at(DeltaSystem.two_delta(2.0, -2.0, 2.65), 1.0), abs=1e-12)

    def test_three_delta_reduces_to_one(self):
        k = np.linspace(0.1, 5.0, 50)
        np.testing.assert_allclose(
            transmission_closed_3delta(1.7, 0.0, 0.0, 0.8, 1.2, k), transmission_closed_1delta(1.7, k), atol=1e-15
        )
        np.testing.assert_allclose(transmission_closed_1delta(1.7, k), 1 / (1 + (1.7 / k) ** 2), atol=1e-15)

    def test_three_delta_example(self):
        system = DeltaSystem.from_arrays([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])
        assert transmission_closed_3delta(1.0, 1.0, 1.0, 1.0, 1.0, 1.5) == pytest.approx(transmission_at(system, 1.5), abs=1e-12)

    def test_equivalence_random(self, get_rng):
        rng = get_rng[0]
        for _ in range(10000):
            k = rng.uniform(0.01, 10.0)
            a1, a2 = rng.uniform(-6.0, 6.0, size=2)
            dx = rng.uniform(0.3, 6.0)
            two = transmission_at(DeltaSystem.two_delta(a1, a2, dx, x0=rng.uniform(-5, 5)), k)
            assert abs(transmission_closed_2delta(a1, a2, dx, k) - two) < 1e-12

            b1, b2, b3 = rng.uniform(-6.0, 6.0, size=3)
            dx12, dx23 = rng.uniform(0.3, 6.0, size=2)
            three = transmission_at(DeltaSystem.three_delta(b1, b2, b3, dx12, dx23), k)
            assert abs(transmission_closed_3delta(b1, b2, b3, dx12, dx23, k) - three) < 1e-12

    def test_broadcasting(self):
        population = np.array([[1.0, 2.0, 3.0, 0.5, 0.7], [0.6, 0.6, 0.6, 1.0, 2.0]])
        k = np.linspace(0.5, 2.0, 11)
        values = transmission_closed_3delta(*(population[:, i, np.newaxis] for i in range(5)), k[np.newaxis, :])
        assert values.shape == (2, 11)
        np.testing.assert_allclose(values[1], ClosedFormThreeDelta.from_vector(population[1]).transmission(k), atol=1e-15)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            transmission_closed_2delta(1.0, 1.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            transmission_closed_3delta(1.0, 1.0, 1.0, 1.0, -1.0, 1.0)
        with pytest.raises(DomainError):
            transmission_closed_3delta(1.0, 1.0, 1.0, 1.0, 1.0, 0.0)
        with pytest.raises(DomainError):
            ClosedFormThreeDelta.from_vector([1.0, 2.0])


class TestSpectrum(object):
    def test_system_and_descriptor_share_one_path(self):
        system = DeltaSystem.two_delta(2.0, -2.0, 2.65)
        k = uniform_k_grid(0.01, 3.0, 40)
        np.testing.assert_array_equal(system.transmission(k), transmission_at(system, k))
        np.testing.assert_array_equal(spectrum_over_grid(system, 0.01, 3.0, 40).t_values, system.transmission(k))
        descriptor = ClosedFormTwoDelta(2.0, -2.0, 2.65)
        np.testing.assert_allclose(spectrum_over_grid(descriptor, 0.01, 3.0, 40).t_values, system.transmission(k), atol=1e-12)
        with pytest.raises(DomainError):
            spectrum_over_grid([2.0, -2.0], 0.01, 3.0, 40)

    def test_free_system(self):
        spectrum = spectrum_over_grid(DeltaSystem.from_arrays([0.0], [0.0]), 0.01, 3.0, 5)
        assert len(spectrum) == 5
        np.testing.assert_array_equal(spectrum.t_values, np.ones(5))

    def test_single_spike_values(self):
        spectrum = spectrum_over_grid(DeltaSystem.from_arrays([3.0], [0.0]), 1.0, 3.0, 3)
        np.testing.assert_allclose(spectrum.k_values, [1.0, 2.0, 3.0])
        np.testing.assert_allclose(spectrum.t_values, [0.1, 1 / (1 + 1.5**2), 0.5], atol=1e-14)

    def test_maxima_near_resonances(self):
        spectrum = spectrum_over_grid(DeltaSystem.two_delta(2.0, -2.0, 2.65), 0.01, 3.0, 300)
        step = spectrum.grid_step
        first = spectrum.k_values < 1.8
        k_first = spectrum.k_values[first][np.argmax(spectrum.t_values[first])]
        k_second = spectrum.k_values[~first][np.argmax(spectrum.t_values[~first])]
        assert abs(k_first - RESONANCE_K) <= step
        assert abs(k_second - 2 * RESONANCE_K) <= step

    def test_closed_form_descriptor(self):
        exact = spectrum_over_grid(DeltaSystem.two_delta(2.0, -2.0, 2.65), 0.5, 3.0, 100)
        closed = spectrum_over_grid(ClosedFormTwoDelta(2.0, -2.0, 2.65), 0.5, 3.0, 100)
        np.testing.assert_allclose(exact.t_values, closed.t_values, atol=1e-12)

    def test_arbitrary_grid_and_frame(self):
        k_values = np.array([0.2, 0.25, 1.0, 4.0])
        spectrum = transmission_spectrum(DeltaSystem.from_arrays([1.0], [0.0]), k_values)
        frame = spectrum.to_frame()
        assert isinstance(frame, pd.DataFrame)
        assert list(frame.columns) == ["k", "T"]
        assert len(frame) == 4

    def test_degenerate_grid(self):
        system = DeltaSystem.from_arrays([1.0], [0.0])
        with pytest.raises(DomainError):
            spectrum_over_grid(system, 1.0, 1.0, 10)
        with pytest.raises(DomainError):
            spectrum_over_grid(system, 0.5, 1.0, 1)
        with pytest.raises(DomainError):
            spectrum_over_grid(system, -1.0, 1.0, 10)
        with pytest.raises(DomainError):
            uniform_k_grid(0.1, 1.0, 2.5)

    def test_invalid_spectrum(self):
        with pytest.raises(InvariantError):
            Spectrum(np.array([1.0, 0.5]), np.array([1.0, 1.0]))
        with pytest.raises(DomainError):
            spectrum_over_grid(object(), 0.5, 1.0, 10)
