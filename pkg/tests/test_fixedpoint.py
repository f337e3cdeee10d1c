"""
Fixed-Point Tests
Tests for rank-1 coset counting and unipotent-orbit fixed points
"""

import pytest
from hypothesis import HealthCheck, given, settings as hsettings, strategies as st
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


class TestStabilizer:
    """Tests for U_x membership"""

    def test_stabilizes(self):
        """Test v(w_12) >= x_2 - x_1 decides membership"""
        from btbounds.services.fixedpoint_service import stabilizes_point

        w = [[1, Fraction(1, 3)], [0, 1]]
        assert stabilizes_point(3, w, [0, -1])
        assert not stabilizes_point(3, w, [0, 1])

    def test_not_unipotent(self):
        """Test non-unitriangular input is refused"""
        from btbounds.services.fixedpoint_service import stabilizes_point
        from btbounds.utils.errors import DegenerateInputError

        with pytest.raises(DegenerateInputError):
            stabilizes_point(3, [[2, 0], [0, 1]], [0, 0])

    def test_literal_entries_follow_precision(self):
        """Test literal entries are compared only as far as they are known"""
        from btbounds.services.fixedpoint_service import stabilizes_point
        from btbounds.utils.errors import PrecisionInsufficientError

        w = [["1", "0"], ["0", "1"]]
        with pytest.raises(PrecisionInsufficientError):
            stabilizes_point(3, w, [0, 10], prec=4)
        assert stabilizes_point(3, w, [0, 10], prec=12)
        assert stabilizes_point(3, [[1, 0], [0, 1]], [0, 10], prec=4)
        assert stabilizes_point(3, [["1", "p^5"], ["0", "1"]], [0, 3], prec=2)
        assert not stabilizes_point(3, [["1", "p^5"], ["0", "1"]], [0, 6], prec=2)

    @hsettings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=40)
    @given(
        st.lists(st.integers(-2, 2), min_size=3, max_size=3),
        st.lists(st.integers(-5, 5), min_size=6, max_size=6),
    )
    def test_closed_under_products(self, x, coeffs):
        """Test U_x is a group: products of members are members"""
        from btbounds.services.fixedpoint_service import stabilizes_point
        from btbounds.utils.matrices import mat_mul, unipotent

        roots = [(0, 1), (0, 2), (1, 2)]
        p = 3

        def member(cs):
            return unipotent(3, {(i, j): c * Fraction(p) ** (x[j] - x[i]) for (i, j), c in zip(roots, cs)})

        w1, w2 = member(coeffs[:3]), member(coeffs[3:])
        assert stabilizes_point(p, w1, x) and stabilizes_point(p, w2, x)
        assert stabilizes_point(p, mat_mul(w1, w2), x)


class TestRankOne:
    """Tests for rank-1 coset counting"""

    def test_count(self):
        """Test t = (1, 4), r = -2, s = 0 over Q_3"""
        from btbounds.services.fixedpoint_service import count_rank1

        report = count_rank1(3, (1, 4), -2, 0)
        assert report.count == 3
        assert report.representatives == 9
        assert report.bound_exponent == 1
        assert report.holds

    def test_second_filtration_exponent(self):
        """Test the exponent adds v(a^2 - 1)"""
        from btbounds.services.fixedpoint_service import count_rank1

        report = count_rank1(3, (1, 4), -1, 0, second_filtration=True)
        assert report.bound_exponent == 2
        assert report.representatives == 27

    def test_r_below_s(self):
        """Test r >= s is refused"""
        from btbounds.services.fixedpoint_service import count_rank1
        from btbounds.utils.errors import DegenerateInputError

        with pytest.raises(DegenerateInputError):
            count_rank1(3, (1, 4), 0, 0)

    def test_non_regular(self):
        """Test alpha(t) = 1 is refused"""
        from btbounds.services.fixedpoint_service import count_rank1
        from btbounds.utils.errors import DegenerateInputError

        with pytest.raises(DegenerateInputError):
            count_rank1(3, (4, 4), -1, 0)


class TestOrbitCount:
    """Tests for fixed points in unipotent orbit boxes"""

    def test_gl2_orbit(self):
        """Test diag(1, 4) over Q_3 fixes 3 points at y-depth 2"""
        from btbounds.services.fixedpoint_service import count_fixed_in_orbit

        report = count_fixed_in_orbit(3, [1, 4], [0, 0], [2, 0])
        assert report.count == 3
        assert report.box_size == 9
        assert report.holds

    def test_trivial_box(self):
        """Test y = x leaves a single point"""
        from btbounds.services.fixedpoint_service import count_fixed_in_orbit

        assert count_fixed_in_orbit(3, [1, 4], [0, 0], [0, 0]).count == 1

    def test_gl3_orbit(self):
        """Test diag(1, 3, 7) over Q_2 meets q^(v(D)/2)"""
        from btbounds.services.fixedpoint_service import count_fixed_in_orbit

        report = count_fixed_in_orbit(2, [1, 3, 7], [0, 0, 0], [4, 2, 0])
        assert report.count == 16
        assert report.bound_exponent == 4
        assert report.holds
        assert all(layer.holds for layer in report.layers)

    def test_translation(self):
        """Test shifting x and y together keeps the count"""
        from btbounds.services.fixedpoint_service import count_fixed_in_orbit

        base = count_fixed_in_orbit(3, [1, 4], [0, 0], [2, 0]).count
        assert count_fixed_in_orbit(3, [1, 4], [1, 1], [3, 1]).count == base

    @pytest.mark.parametrize("p,gamma,y", [
        (3, [1, 4], [2, 0]),
        (2, [1, 5], [3, 0]),
        (2, [1, 3, 7], [4, 2, 0]),
        (3, [1, 4, 10], [2, 1, 0]),
    ])
    def test_reversed_entries(self, p, gamma, y):
        """Test reversing the diagonal keeps the count on a symmetric box"""
        from btbounds.services.fixedpoint_service import count_fixed_in_orbit

        x = [0] * len(gamma)
        forward = count_fixed_in_orbit(p, gamma, x, y)
        backward = count_fixed_in_orbit(p, list(reversed(gamma)), x, y)
        assert forward.count == backward.count
        assert forward.bound_exponent == backward.bound_exponent

    def test_matches_tree(self):
        """Test the orbit count agrees with the tree oracle"""
        from btbounds.models.tree import TreeVertex
        from btbounds.services.fixedpoint_service import count_fixed_in_orbit
        from btbounds.services.tree_service import count_fixed_in_unipotent_orbit

        for depth in range(4):
            ours = count_fixed_in_orbit(2, [1, 5], [0, 0], [depth, 0]).count
            tree = count_fixed_in_unipotent_orbit(2, [[1, 0], [0, 5]], TreeVertex.origin(), depth)
            assert ours == tree == 2 ** min(depth, 2)

    def test_non_compact(self):
        """Test non-compact gamma is refused"""
        from btbounds.services.fixedpoint_service import count_fixed_in_orbit
        from btbounds.utils.errors import DegenerateInputError

        with pytest.raises(DegenerateInputError):
            count_fixed_in_orbit(3, [1, 3], [0, 0], [2, 0])

    def test_inverted_box(self):
        """Test alpha(y) below alpha(x) is refused"""
        from btbounds.services.fixedpoint_service import count_fixed_in_orbit
        from btbounds.utils.errors import DegenerateInputError

        with pytest.raises(DegenerateInputError):
            count_fixed_in_orbit(3, [1, 4], [2, 0], [0, 0])

    def test_orbit_limit(self):
        """Test the full-orbit count stabilizes past the horizon"""
        from btbounds.services.fixedpoint_service import orbit_fixed_count_limit

        assert orbit_fixed_count_limit(3, [1, 4], 2) == 3

    def test_orbit_limit_horizon_too_small(self):
        """Test a short horizon is reported"""
        from btbounds.services.fixedpoint_service import orbit_fixed_count_limit
        from btbounds.utils.errors import HorizonError

        with pytest.raises(HorizonError):
            orbit_fixed_count_limit(3, [1, 28], 1)
