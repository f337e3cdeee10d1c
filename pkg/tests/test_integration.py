"""
Integration Tests
Tests for coset measures, orbital integrals, the Weyl formula and summability
"""

import pytest
from unittest.mock import patch
from fractions import Fraction
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


@pytest.fixture(autouse=True)
def mock_settings():
    """Mock settings for tests"""
    with patch('btbounds.config.get_settings') as mock:
        mock.return_value = type('Settings', (), {
            'threads': 2,
            'enumeration_cap': 1_000_000,
            'default_prec': 8,
            'default_level': 3,
            'seed': 0,
            'debug': False,
            'cap_for': lambda self, kind: 2_000_000,
        })()
        yield mock


class TestCosetMeasure:
    """Tests for mu(T g K)"""

    def test_unipotent_cosets(self):
        """Test u(p^-d) has index phi(p^d) in the split torus"""
        from btbounds.services.integration_service import MeasureContext, coset_measure

        ctx = MeasureContext.build(3, 3)
        assert coset_measure(ctx, [[1, Fraction(1, 3)], [0, 1]]) == 2
        assert coset_measure(ctx, [[1, Fraction(1, 9)], [0, 1]]) == 6

    def test_normalizing_cosets(self):
        """Test elements normalizing T ∩ K have measure 1"""
        from btbounds.services.integration_service import MeasureContext, coset_measure

        ctx = MeasureContext.build(3, 3)
        assert coset_measure(ctx, [[1, 0], [0, 3]]) == 1
        assert coset_measure(ctx, [[1, 1], [0, 1]]) == 1

    def test_elliptic_coset(self):
        """Test diag(p, 1) against the unramified torus over Q_3"""
        from btbounds.services.integration_service import MeasureContext, coset_measure

        ctx = MeasureContext.build(3, 3, torus="elliptic")
        assert coset_measure(ctx, [[3, 0], [0, 1]]) == 4

    @pytest.mark.parametrize("torus,g", [
        ("split", [[1, Fraction(1, 9)], [0, 1]]),
        ("split", [[3, Fraction(2, 3)], [1, 1]]),
        ("split", [[1, 0], [Fraction(1, 3), 1]]),
        ("elliptic", [[9, 0], [0, 1]]),
        ("elliptic", [[3, Fraction(1, 3)], [0, 1]]),
    ])
    def test_stable_in_level(self, torus, g):
        """Test the measure at level N agrees with level N + 1"""
        from btbounds.services.integration_service import MeasureContext, coset_measure

        at_n = coset_measure(MeasureContext.build(3, 3, torus=torus), g)
        at_next = coset_measure(MeasureContext.build(3, 4, torus=torus), g)
        assert at_n == at_next

    def test_unknown_torus(self):
        """Test unknown tori are a config error"""
        from btbounds.services.integration_service import MeasureContext
        from btbounds.utils.errors import ConfigError

        with pytest.raises(ConfigError):
            MeasureContext.build(3, 3, torus="anisotropic")


class TestClassFunctions:
    """Tests for characteristic-polynomial classes"""

    def test_split_class(self):
        """Test x^2 - 5x + 4 splits at depth 1 over Q_3"""
        from btbounds.services.integration_service import characteristic_class, split_label

        assert characteristic_class(5, 4, 3, 3) == split_label(1)

    def test_unramified_class(self):
        """Test x^2 + 1 is elliptic unramified over Q_3"""
        from btbounds.services.integration_service import ELLIPTIC_UNRAMIFIED, characteristic_class

        assert characteristic_class(0, 1, 3, 3) == ELLIPTIC_UNRAMIFIED

    def test_repeated_root_undecided(self):
        """Test a zero discriminant is not certified"""
        from btbounds.services.integration_service import UNDECIDED, characteristic_class

        assert characteristic_class(2, 1, 3, 3) == UNDECIDED

    def test_unknown_function(self):
        """Test lookup of a missing preset"""
        from btbounds.services.integration_service import find_class_function
        from btbounds.utils.errors import ConfigError

        with pytest.raises(ConfigError):
            find_class_function("split:9", 3, 3)


class TestOrbitalIntegral:
    """Tests for orbital integrals of 1_K"""

    @pytest.mark.parametrize("gamma,value", [
        ([1, 4], 3),
        ([1, 10], 9),
        ([4, 1], 3),
        ([2, 8], 3),
    ])
    def test_split(self, gamma, value):
        """Test split orbital integrals over Q_3"""
        from btbounds.services.integration_service import UNIT_BALL, MeasureContext, orbital_integral

        result = orbital_integral(gamma, UNIT_BALL, MeasureContext.build(3, 3))
        assert result.value == value
        assert result.holds

    @pytest.mark.parametrize("gamma,value", [((1, 3), 5), ((1, 9), 17)])
    def test_elliptic(self, gamma, value):
        """Test 1 + 3^k theta against the fixed ball of radius k"""
        from btbounds.services.integration_service import UNIT_BALL, MeasureContext, orbital_integral

        result = orbital_integral(gamma, UNIT_BALL, MeasureContext.build(3, 3, torus="elliptic"))
        assert result.value == value
        assert result.holds

    @pytest.mark.parametrize("gamma", [[1, 4], [1, 10], [2, 8], [5, 11]])
    def test_split_weyl_invariance(self, gamma):
        """Test swapping the eigenvalues keeps the integral"""
        from btbounds.services.integration_service import UNIT_BALL, MeasureContext, orbital_integral

        ctx = MeasureContext.build(3, 3)
        forward = orbital_integral(gamma, UNIT_BALL, ctx)
        backward = orbital_integral(list(reversed(gamma)), UNIT_BALL, ctx)
        assert forward.value == backward.value

    @pytest.mark.parametrize("z", [2, 5, Fraction(1, 7)])
    def test_split_central_invariance(self, z):
        """Test scaling by a central unit keeps the integral"""
        from btbounds.services.integration_service import UNIT_BALL, MeasureContext, orbital_integral

        ctx = MeasureContext.build(3, 3)
        base = orbital_integral([1, 10], UNIT_BALL, ctx).value
        assert orbital_integral([z, 10 * z], UNIT_BALL, ctx).value == base

    def test_elliptic_weyl_and_central_invariance(self):
        """Test the Galois conjugate and unit multiples of 1 + 3 theta"""
        from btbounds.services.integration_service import UNIT_BALL, MeasureContext, orbital_integral

        ctx = MeasureContext.build(3, 3, torus="elliptic")
        m0, m1 = ctx.field.relation
        a, b = 1, 3
        base = orbital_integral((a, b), UNIT_BALL, ctx).value
        assert orbital_integral((a - m1 * b, -b), UNIT_BALL, ctx).value == base
        assert orbital_integral((2 * a, 2 * b), UNIT_BALL, ctx).value == base

    def test_ramified_elliptic(self):
        """Test ramified elliptic tori are refused"""
        from btbounds.models.localfield import FieldKind, make_field
        from btbounds.services.integration_service import UNIT_BALL, MeasureContext, orbital_integral
        from btbounds.utils.errors import UnsupportedFieldError

        ctx = MeasureContext(3, 3, "elliptic", make_field(3, FieldKind.RAMIFIED))
        with pytest.raises(UnsupportedFieldError):
            orbital_integral((1, 3), UNIT_BALL, ctx)

    def test_non_compact(self):
        """Test non-compact gamma is refused"""
        from btbounds.services.integration_service import UNIT_BALL, MeasureContext, orbital_integral
        from btbounds.utils.errors import DegenerateInputError

        with pytest.raises(DegenerateInputError):
            orbital_integral([1, 3], UNIT_BALL, MeasureContext.build(3, 3))


class TestWeylFormula:
    """Tests for both sides of the Weyl integration formula"""

    @pytest.mark.parametrize("p,level,name,expected", [
        (3, 3, "split:1", Fraction(1, 18)),
        (3, 3, "split:0", Fraction(1, 4)),
        (2, 4, "split:1", Fraction(1, 8)),
    ])
    def test_sides_agree(self, p, level, name, expected):
        """Test lhs = rhs on split indicators"""
        from btbounds.services.integration_service import MeasureContext, find_class_function, weyl_formula_check

        report = weyl_formula_check(find_class_function(name, p, level), MeasureContext.build(p, level))
        assert report.equal
        assert report.lhs == expected

    def test_elliptic_presets_vanish(self):
        """Test elliptic indicators have no split-regular mass"""
        from btbounds.services.integration_service import MeasureContext, find_class_function, weyl_formula_check

        report = weyl_formula_check(find_class_function("elliptic", 3, 2), MeasureContext.build(3, 2))
        assert report.lhs == report.rhs == 0

    def test_unit_ball_not_admissible(self):
        """Test 1_K is not certified at finite level"""
        from btbounds.services.integration_service import UNIT_BALL, MeasureContext, weyl_formula_check
        from btbounds.utils.errors import PrecisionInsufficientError

        with pytest.raises(PrecisionInsufficientError):
            weyl_formula_check(UNIT_BALL, MeasureContext.build(3, 3))


class TestSummability:
    """Tests for sd-shell sums"""

    def test_shell_measure(self):
        """Test mu of the shells of O^x"""
        from btbounds.services.integration_service import shell_measure

        assert shell_measure(3, 0) == Fraction(1, 2)
        assert shell_measure(3, 2) == Fraction(1, 9)

    def test_thresholds(self):
        """Test gl1 and gl2-split thresholds"""
        from btbounds.services.integration_service import summability_threshold

        assert summability_threshold("gl1") == 1
        assert summability_threshold("gl2-split") == Fraction(1, 4)

    def test_threshold_error(self):
        """Test eps at the threshold is refused"""
        from btbounds.services.integration_service import MeasureContext, summability_report
        from btbounds.utils.errors import ThresholdError

        with pytest.raises(ThresholdError):
            summability_report("gl2-split", Fraction(1, 4), 0, 10, MeasureContext.build(3, 3))

    def test_gl2_sums_settle(self):
        """Test the differences decrease from shell 2 with m = 1"""
        from btbounds.services.integration_service import MeasureContext, summability_report

        report = summability_report("gl2-split", 0, 1, 10, MeasureContext.build(3, 3))
        assert report.decreasing_from == 2
        assert report.bounded_flag
        assert report.monotone
        assert report.partial_sums_exact[0] == "1/2"

    def test_gl2_cubic_weights(self):
        """Test GL_2 split with m = 1 weights shell r by (r + 1)^3"""
        from btbounds.services.integration_service import MeasureContext, shell_measure, summability_report

        report = summability_report("gl2-split", 0, 1, 3, MeasureContext.build(3, 3))
        expected = sum(((r + 1) ** 3 * shell_measure(3, r) for r in range(4)), Fraction(0))
        assert expected == Fraction(461, 54)
        assert report.partial_sums_exact[-1] == str(expected)

    def test_gl1_square_weights(self):
        """Test the one-dimensional torus with m = 1 weights shell r by (r + 1)^2"""
        from btbounds.services.integration_service import MeasureContext, shell_measure, summability_report

        report = summability_report("gl1", 0, 1, 2, MeasureContext.build(3, 3))
        expected = sum(((r + 1) ** 2 * shell_measure(3, r) for r in range(3)), Fraction(0))
        assert report.partial_sums_exact[-1] == str(expected)
