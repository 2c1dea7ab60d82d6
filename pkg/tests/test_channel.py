"""Tests for the channel model and the on-off mutual information."""

import math

import numpy as np
import pytest
from scipy import integrate

from lowsnr_capacity.channel import (
    AlphaBeta,
    ChannelParams,
    OnOffInput,
    cond_density,
    db_to_snr,
    density_ratio,
    mi_closed,
    mi_components,
    mi_derivative_x1,
    mi_quadrature,
    mi_series,
    mi_series_second_order,
    output_density,
    snr_to_db,
)
from lowsnr_capacity.errors import DomainError

from .conftest import ORACLE_POINTS

# Closed-form values computed independently at (x1^2, a)
REFERENCE_MI = [
    (5.0, 0.01, 0.00462164377216),
    (16.0, 0.05, 0.0134788206752),
    (4.0, 1e-4, 5.55625400079e-05),
    (4.0, 1e-3, 5.229491035e-4),
    (8.0, 1e-2, 4.248401572e-3),
]


def _integral(func) -> float:
    return integrate.quad(func, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)[0]


# ============================================================================
# Parameters and input law
# ============================================================================


class TestSnrConversions:
    """Tests for the dB conversions."""

    def test_db_to_snr(self):
        assert db_to_snr(-30.0) == pytest.approx(1e-3, rel=1e-15)
        assert db_to_snr(0.0) == 1.0

    def test_snr_to_db(self):
        assert snr_to_db(1e-3) == pytest.approx(-30.0, abs=1e-12)

    @pytest.mark.parametrize("a", [0.0, -1.0])
    def test_snr_to_db_rejects_non_positive(self, a):
        with pytest.raises(DomainError, match="snr_to_db"):
            snr_to_db(a)


class TestChannelParams:
    """Tests for ChannelParams."""

    def test_snr(self):
        params = ChannelParams(sigma_h_sq=2.0, sigma_w_sq=0.5, power=0.25)
        assert params.snr() == pytest.approx(1.0)

    def test_amplitude_normalisation(self):
        params = ChannelParams(sigma_h_sq=2.0, sigma_w_sq=0.5, power=1.0)
        assert params.normalise_amplitude(1.5) == pytest.approx(3.0)
        assert params.physical_amplitude(3.0) == pytest.approx(1.5)

    @pytest.mark.parametrize(
        ("kwargs", "field"),
        [
            ({"sigma_h_sq": 0.0, "sigma_w_sq": 1.0, "power": 1.0}, "sigma_h_sq"),
            ({"sigma_h_sq": 1.0, "sigma_w_sq": -1.0, "power": 1.0}, "sigma_w_sq"),
            ({"sigma_h_sq": 1.0, "sigma_w_sq": 1.0, "power": -0.1}, "power"),
        ],
    )
    def test_invalid_parameters(self, kwargs, field):
        with pytest.raises(DomainError, match=field):
            ChannelParams(**kwargs)


class TestOnOffInput:
    """Tests for OnOffInput and AlphaBeta."""

    def test_for_snr_meets_power_constraint(self):
        inp = OnOffInput.for_snr(math.sqrt(5.0), 0.01)
        assert inp.p1 == pytest.approx(0.002)
        assert inp.p0 == pytest.approx(0.998)
        assert inp.average_power == pytest.approx(0.01)

    def test_for_snr_at_sqrt_a_is_always_on(self):
        a = 0.3
        assert OnOffInput.for_snr(math.sqrt(a), a).p1 == pytest.approx(1.0, abs=1e-15)

    def test_for_snr_below_sqrt_a_raises(self):
        with pytest.raises(DomainError, match="below sqrt"):
            OnOffInput.for_snr(0.5, 0.3)

    def test_for_snr_rejects_non_positive_snr(self):
        with pytest.raises(DomainError, match="positive"):
            OnOffInput.for_snr(2.0, 0.0)

    @pytest.mark.parametrize(
        ("x1", "p1"), [(0.0, 0.1), (-1.0, 0.1), (math.inf, 0.1), (2.0, 1.5), (2.0, -0.1)]
    )
    def test_invalid_input(self, x1, p1):
        with pytest.raises(DomainError, match="OnOffInput"):
            OnOffInput(x1=x1, p1=p1)

    def test_all_off_input_is_accepted(self):
        assert OnOffInput(x1=2.0, p1=0.0).p0 == 1.0

    def test_alpha_beta(self):
        ab = OnOffInput(x1=2.0, p1=0.2).alpha_beta()
        assert ab.alpha == pytest.approx(5.0)
        assert ab.beta == pytest.approx(0.2 / (0.8 * 5.0))

    @pytest.mark.parametrize("p1", [0.0, 1.0])
    def test_alpha_beta_undefined_at_extremes(self, p1):
        with pytest.raises(DomainError, match="AlphaBeta"):
            AlphaBeta.from_input(OnOffInput(x1=2.0, p1=p1))


# ============================================================================
# Densities
# ============================================================================


class TestDensities:
    """Tests for the conditional and output densities."""

    @pytest.mark.parametrize("x", [0.0, 1.0, math.sqrt(5.0), 10.0])
    def test_conditional_density_normalised_with_mean_alpha(self, x):
        alpha = 1.0 + x * x
        mass = _integral(lambda y: cond_density(y, x))
        mean = _integral(lambda y: y * cond_density(y, x))
        assert mass == pytest.approx(1.0, abs=1e-10)
        assert mean == pytest.approx(alpha, rel=1e-9)

    def test_output_density_integrates_to_one(self):
        inp = OnOffInput(x1=math.sqrt(5.0), p1=0.002)
        mass = _integral(lambda y: output_density(y, inp))
        assert mass == pytest.approx(1.0, abs=1e-10)

    def test_output_density_is_mixture(self):
        inp = OnOffInput(x1=2.0, p1=0.1)
        y = np.array([0.0, 0.5, 3.0, 20.0])
        expected = 0.9 * np.exp(-y) + 0.1 * np.exp(-y / 5.0) / 5.0
        np.testing.assert_allclose(output_density(y, inp), expected, rtol=1e-14)

    def test_density_ratio_matches_definition_and_decreases(self):
        inp = OnOffInput(x1=2.0, p1=0.1)
        y = np.linspace(0.0, 30.0, 61)
        ratio = density_ratio(y, inp)
        expected = output_density(y, inp) / cond_density(y, inp.x1)
        np.testing.assert_allclose(ratio, expected, rtol=1e-12)
        assert np.all(np.diff(ratio) < 0.0)


# ============================================================================
# Mutual information
# ============================================================================


class TestMiClosed:
    """Tests for the closed-form mutual information."""

    @pytest.mark.parametrize(("x_sq", "a", "expected"), REFERENCE_MI)
    def test_reference_values(self, x_sq, a, expected):
        assert mi_closed(math.sqrt(x_sq), a) == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize(("x_sq", "a"), ORACLE_POINTS)
    def test_matches_quadrature(self, x_sq, a):
        x1 = math.sqrt(x_sq)
        oracle = mi_quadrature(OnOffInput.for_snr(x1, a))
        assert mi_closed(x1, a) == pytest.approx(oracle.value, abs=1e-9)
        assert oracle.abs_error_estimate <= 1e-9

    def test_zero_at_always_on(self):
        a = 0.04
        assert abs(mi_closed(math.sqrt(a), a)) < 1e-12

    def test_cancellation_band_falls_back_to_quadrature(self):
        a = 0.5
        x1 = math.sqrt(a * (1.0 + 1e-10))
        assert abs(mi_closed(x1, a)) < 1e-8

    @pytest.mark.parametrize(("x1", "a"), [(0.4, 0.01), (0.5, 0.01), (0.2, 1e-3), (0.9, 1e-4)])
    def test_mass_point_below_one_matches_quadrature(self, x1, a):
        oracle = mi_quadrature(OnOffInput.for_snr(x1, a)).value
        assert mi_closed(x1, a) == pytest.approx(oracle, abs=1e-9)

    def test_below_linear_bound(self):
        for x_sq, a in ORACLE_POINTS:
            assert 0.0 < mi_closed(math.sqrt(x_sq), a) < a

    def test_below_sqrt_a_raises(self):
        with pytest.raises(DomainError, match="mi_closed"):
            mi_closed(0.1, 0.5)

    def test_non_positive_snr_raises(self):
        with pytest.raises(DomainError, match="positive"):
            mi_closed(2.0, 0.0)


class TestMiQuadrature:
    """Tests for the quadrature oracle and its derivative."""

    @pytest.mark.parametrize("p1", [0.0, 1.0])
    def test_degenerate_inputs_carry_no_information(self, p1):
        assert mi_quadrature(OnOffInput(x1=2.0, p1=p1)).value == 0.0

    def test_components_sum_to_total(self):
        inp = OnOffInput.for_snr(math.sqrt(5.0), 0.01)
        components = mi_components(inp)
        assert components.total == pytest.approx(mi_quadrature(inp).value, abs=1e-9)

    def test_each_component_matches_its_integral(self):
        inp = OnOffInput(x1=math.sqrt(5.0), p1=0.002)
        alpha = 1.0 + inp.x1**2
        p0, p1 = inp.p0, inp.p1

        def log_output(y: float) -> float:
            return float(np.logaddexp(math.log(p0) - y, math.log(p1) - math.log(alpha) - y / alpha))

        components = mi_components(inp)
        i1 = _integral(lambda y: -p0 * y * math.exp(-y))
        i2 = _integral(lambda y: p0 * math.exp(-y) * log_output(y))
        i3 = _integral(lambda y: -p1 * (math.log(alpha) + y / alpha) * cond_density(y, inp.x1))
        i4 = _integral(lambda y: p1 * cond_density(y, inp.x1) * log_output(y))
        assert components.i1 == pytest.approx(i1, abs=1e-10)
        assert components.i2 == pytest.approx(i2, abs=1e-10)
        assert components.i3 == pytest.approx(i3, abs=1e-10)
        assert components.i4 == pytest.approx(i4, abs=1e-10)

    @pytest.mark.parametrize(("x_sq", "a"), ORACLE_POINTS)
    def test_derivative_matches_finite_difference(self, x_sq, a):
        x1 = math.sqrt(x_sq)
        p1 = a / x_sq
        h = 1e-4

        def mi(x: float) -> float:
            return mi_quadrature(OnOffInput(x1=x, p1=p1)).value

        finite_difference = (mi(x1 + h) - mi(x1 - h)) / (2.0 * h)
        derivative = mi_derivative_x1(OnOffInput(x1=x1, p1=p1)).value
        assert derivative > 0.0
        assert derivative == pytest.approx(finite_difference, rel=1e-4, abs=1e-9)


class TestMiSeries:
    """Tests for the low-SNR expansions."""

    @pytest.mark.parametrize("x_sq", [4.0, 5.0, 8.0])
    @pytest.mark.parametrize("a", [1e-4, 1e-3, 1e-2])
    def test_second_order_is_closer_to_closed_form(self, x_sq, a):
        x1 = math.sqrt(x_sq)
        closed = mi_closed(x1, a)
        first_gap = abs(mi_series(x1, a) - closed)
        second_gap = abs(mi_series_second_order(x1, a) - closed)
        assert second_gap < first_gap

    def test_first_order_gap_is_small(self):
        x1 = math.sqrt(5.0)
        assert abs(mi_series(x1, 1e-2) - mi_closed(x1, 1e-2)) == pytest.approx(1.37e-6, rel=0.05)

    def test_first_order_gap_shrinks_with_snr(self):
        """The first-order expansion error falls faster than the SNR itself."""
        x1 = math.sqrt(5.0)
        snrs = [1e-2, 1e-3, 1e-4, 1e-5]
        relative = [abs(mi_series(x1, a) - mi_closed(x1, a)) / a for a in snrs]
        assert relative == sorted(relative, reverse=True)
        assert relative[-1] < 1e-2 * relative[0]

    @pytest.mark.parametrize(("x1", "a"), [(1.0, 0.01),
 (0.5, 0.01), (2.0, 0.0), (2.0, 4.0)])
    def test_domain_errors(self, x1, a):
        with pytest.raises(DomainError, match="mi_series"):
            mi_series(x1, a)
