"""
Local Field Tests
Tests for truncated arithmetic, valuations, extensions and element literals
"""

import pytest
from unittest.mock import patch
from fractions import Fraction
from hypothesis import HealthCheck, given, settings as hsettings, strategies as st
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


nonzero = st.integers(min_value=-10_000, max_value=10_000).filter(lambda n: n != 0)


class TestValuation:
    """Tests for valuations of truncated elements"""

    def test_valuation_of_rationals(self):
        """Test valuations of p-powers and inverses"""
        from btbounds.models.localfield import base_field, from_rational

        f = base_field(3)
        assert from_rational(f, 9, 5).valuation == 2
        assert from_rational(f, Fraction(1, 3), 5).valuation == -1
        assert from_rational(f, 7, 5).valuation == 0

    def test_zero_is_a_marker(self):
        """Test that zero only exists as an above-precision marker"""
        from btbounds.models.localfield import base_field, from_rational

        z = from_rational(base_field(3), 0, 5)
        assert z.is_marker
        assert str(z.valuation) == ">=5"

    def test_cancellation_gives_marker(self):
        """Test x - x collapses to the marker"""
        from btbounds.models.localfield import base_field, from_rational

        x = from_rational(base_field(5), 26, 6)
        assert (x - x).is_marker

    def test_require_valuation_on_marker(self):
        """Test an uncertified valuation raises"""
        from btbounds.models.localfield import base_field, zero
        from btbounds.utils.errors import PrecisionInsufficientError

        with pytest.raises(PrecisionInsufficientError):
            zero(base_field(2), 4).require_valuation()

    def test_valuation_at_least_on_marker(self):
        """Test threshold checks decide when the bound is known"""
        from btbounds.models.localfield import base_field, zero
        from btbounds.utils.errors import PrecisionInsufficientError

        z = zero(base_field(2), 4)
        assert z.valuation_at_least(3)
        with pytest.raises(PrecisionInsufficientError):
            z.valuation_at_least(5)

    @hsettings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=50)
    @given(nonzero, nonzero)
    def test_valuation_is_additive(self, a, b):
        """Test v(ab) = v(a) + v(b)"""
        from btbounds.models.localfield import base_field, from_rational

        f = base_field(3)
        x, y = from_rational(f, a, 8), from_rational(f, b, 8)
        assert (x * y).valuation == x.valuation + y.valuation

    @hsettings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=50)
    @given(nonzero, nonzero)
    def test_ultrametric_inequality(self, a, b):
        """Test v(a + b) >= min(v(a), v(b))"""
        from btbounds.models.localfield import base_field, from_rational

        f = base_field(2)
        x, y = from_rational(f, a, 10), from_rational(f, b, 10)
        total = x + y
        if not total.is_marker:
            assert total.valuation >= min(x.valuation, y.valuation)

    @hsettings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=50)
    @given(nonzero, nonzero, st.integers(min_value=1, max_value=6))
    def test_marker_never_overstates(self, a, b, prec):
        """Test a difference is a marker only when the exact difference is that divisible"""
        from btbounds.models.localfield import base_field, from_rational, rational_valuation

        f = base_field(3)
        diff = from_rational(f, a, prec) - from_rational(f, b, prec)
        exact = rational_valuation(3, Fraction(a - b))
        if diff.is_marker:
            assert exact is None or exact >= diff.valuation.bound
        else:
            assert diff.valuation == exact


class TestInverse:
    """Tests for inverses of truncated elements"""

    @hsettings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=50)
    @given(nonzero)
    def test_two_sided(self, a):
        """Test x inv(x) and inv(x) x are both 1 to working precision"""
        from btbounds.models.localfield import base_field, from_rational, inv

        x = from_rational(base_field(3), a, 6)
        assert (x * inv(x) - 1).is_marker
        assert (inv(x) * x - 1).is_marker

    def test_two_sided_in_extension(self):
        """Test inverses in the unramified quadratic extension"""
        from btbounds.models.localfield import inv, make_field
        from btbounds.utils.literals import parse_element

        x = parse_element("2+3*s", make_field(3, "unramified"), 6)
        assert (x * inv(x) - 1).is_marker
        assert (inv(x) * x - 1).is_marker

    def test_geometric_series(self):
        """Test 1 / (1 + p) = 1 - p + p^2 - p^3 mod p^4"""
        from btbounds.models.localfield import base_field, from_rational, inv

        f = base_field(3)
        y = inv(from_rational(f, 4, 4))
        assert (y - from_rational(f, 1 - 3 + 9 - 27, 4)).is_marker
        assert y.to_fraction() == 61

    def test_marker_has_no_inverse(self):
        """Test inverting a marker raises"""
        from btbounds.models.localfield import base_field, inv, zero
        from btbounds.utils.errors import PrecisionInsufficientError

        with pytest.raises(PrecisionInsufficientError):
            inv(zero(base_field(3), 4))


class TestExtensions:
    """Tests for unramified and ramified quadratic extensions"""

    def test_ramified_uniformizer_has_half_valuation(self):
        """Test v(pi) = 1/2 in the ramified quadratic"""
        from btbounds.models.localfield import make_field, uniformizer

        E = make_field(3, "ramified")
        assert E.e == 2
        assert uniformizer(E, 6).valuation == Fraction(1, 2)

    def test_wild_ramification_rejected(self):
        """Test p = 2 ramified quadratics are refused"""
        from btbounds.models.localfield import make_field
        from btbounds.utils.errors import UnsupportedFieldError

        with pytest.raises(UnsupportedFieldError):
            make_field(2, "ramified")

    def test_non_prime_rejected(self):
        """Test a composite residue characteristic is a config error"""
        from btbounds.models.localfield import make_field
        from btbounds.utils.errors import ConfigError

        with pytest.raises(ConfigError):
            make_field(4)

    def test_unramified_q(self):
        """Test residue field order of the unramified quadratic"""
        from btbounds.models.localfield import make_field

        E = make_field(3, "unramified")
        assert E.degree == 2
        assert E.q == 9
        assert E.square_unit == -1

    def test_norm_of_unramified_element(self):
        """Test N(1 + 3s) = 10 when s^2 = -1"""
        from btbounds.models.localfield import make_field, norm
        from btbounds.utils.literals import parse_element

        E = make_field(3, "unramified")
        x = parse_element("1+3*s", E, 6)
        assert (norm(x) - 10).is_marker

    def test_norm_of_base_element_squares(self):
        """Test N(t) = t^2 for t in the base field"""
        from btbounds.models.localfield import base_field, embed, from_rational, make_field, norm

        E = make_field(3, "unramified")
        t = embed(from_rational(base_field(3), 2, 6), E)
        assert (norm(t) - 4).is_marker

    def test_norm_of_conjugate_ratio_is_one(self):
        """Test N(x / sigma(x)) = 1"""
        from btbounds.models.localfield import galois_conjugates, make_field, norm
        from btbounds.utils.literals import parse_element

        E = make_field(3, "unramified")
        x = parse_element("2+s", E, 6)
        ratio = x / galois_conjugates(x)[1]
        assert (norm(ratio) - 1).is_marker


class TestLiterals:
    """Tests for element and matrix literals"""

    def test_parse_rational(self):
        """Test rational literals"""
        from btbounds.utils.literals import parse_rational
        from btbounds.utils.errors import ConfigError

        assert parse_rational("3/2") == Fraction(3, 2)
        with pytest.raises(ConfigError):
            parse_rational("three")

    def test_explicit_literal(self):
        """Test v=..;u=.. literals"""
        from btbounds.models.localfield import base_field
        from btbounds.utils.literals import parse_element

        x = parse_element("v=1;u=2", base_field(3), 4)
        assert x.valuation == 1
        assert x.to_fraction() == 6

    def test_shorthand_literal(self):
        """Test 1+p^2 over Q_3"""
        from btbounds.models.localfield import base_field
        from btbounds.utils.literals import parse_element

        assert parse_element("1+p^2", base_field(3), 6).to_fraction() == 10

    def test_explicit_literal_needs_unit(self):
        """Test a non-unit unit part is rejected"""
        from btbounds.models.localfield import base_field
        from btbounds.utils.errors import ConfigError
        from btbounds.utils.literals import parse_element

        with pytest.raises(ConfigError):
            parse_element("v=0;u=3", base_field(3), 4)

    def test_generator_needs_extension(self):
        """Test s is refused over the base field"""
        from btbounds.models.localfield import base_field
        from btbounds.utils.errors import ConfigError
        from btbounds.utils.literals import parse_element

        with pytest.raises(ConfigError):
            parse_element("1+s", base_field(3), 4)

    def test_ragged_matrix(self):
        """Test ragged matrix literals fail"""
        from btbounds.models.localfield import base_field
        from btbounds.utils.errors import ConfigError
        from btbounds.utils.literals import parse_matrix

        with pytest.raises(ConfigError):
            parse_matrix("1,2;3", base_field(3), 4)

    def test_parse_polynomial(self):
        """Test JSON polynomial terms"""
        from btbounds.utils.literals import parse_polynomial

        terms = parse_polynomial('[{"exps": [1, 3], "coeff": 1}, {"exps": [0, 0], "coeff": "2"}]')
        assert terms == [((1, 3), "1"), ((0, 0), "2")]
