"""
Root System Tests
Tests for heights, the invariant form and apartment vertices
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


coordinate = st.fractions(min_value=-5, max_value=5, max_denominator=6)
point2 = st.tuples(coordinate, coordinate)
names = st.sampled_from(["A2", "B2", "C2", "G2"])


class TestBuildRootSystem:
    """Tests for root system construction"""

    def test_a2_height(self):
        """Test A2 has ht(Phi) = 2 and c = (1, 1)"""
        from btbounds.models.rootsys import build_root_system

        rs = build_root_system("A2")
        assert rs.max_height == 2
        assert rs.c == (1, 1)
        assert len(rs.positive_roots) == 3

    def test_g2_height(self):
        """Test G2 has ht(Phi) = 5"""
        from btbounds.models.rootsys import build_root_system

        rs = build_root_system("G2")
        assert rs.max_height == 5
        assert len(rs.positive_roots) == 6

    def test_b2_long_root(self):
        """Test the B2 highest root has height 3"""
        from btbounds.models.rootsys import build_root_system, height

        rs = build_root_system("B2")
        assert height(rs, rs.highest_root) == 3

    def test_simple_root_height(self):
        """Test simple roots have height 1"""
        from btbounds.models.rootsys import build_root_system, height

        rs = build_root_system("A3")
        assert all(height(rs, a) == 1 for a in rs.simple_roots)

    def test_negative_root_rejected(self):
        """Test height refuses negative roots"""
        from btbounds.models.rootsys import build_root_system, height
        from btbounds.utils.errors import DegenerateInputError

        with pytest.raises(DegenerateInputError):
            height(build_root_system("A2"), (-1, 0))

    def test_unsupported(self):
        """Test unknown types raise"""
        from btbounds.models.rootsys import build_root_system
        from btbounds.utils.errors import UnsupportedRootSystemError

        with pytest.raises(UnsupportedRootSystemError):
            build_root_system("E8")

    @pytest.mark.parametrize("name", ["A1", "A2", "A3", "B2", "C2", "G2"])
    def test_special_vertices(self, name):
        """Test alpha_j(a_i) = delta_ij / c_i"""
        from btbounds.models.rootsys import build_root_system, evaluate_root

        rs = build_root_system(name)
        for i, a in enumerate(rs.special_vertices):
            for j, alpha in enumerate(rs.simple_roots):
                assert evaluate_root(alpha, a) == Fraction(int(i == j), rs.c[i])


class TestWeylForm:
    """Tests for the W-invariant form"""

    @hsettings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=40)
    @given(names, point2, point2)
    def test_symmetric(self, name, v, w):
        """Test <v, w> = <w, v>"""
        from btbounds.models.rootsys import ApartmentPoint, build_root_system, weyl_form

        rs = build_root_system(name)
        v, w = ApartmentPoint.of(v), ApartmentPoint.of(w)
        assert weyl_form(rs, v, w) == weyl_form(rs, w, v)

    @hsettings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=40)
    @given(names, point2, point2, st.integers(min_value=0, max_value=1))
    def test_reflection_invariant(self, name, v, w, i):
        """Test <s_i v, s_i w> = <v, w>"""
        from btbounds.models.rootsys import ApartmentPoint, build_root_system, reflect, weyl_form

        rs = build_root_system(name)
        v, w = ApartmentPoint.of(v), ApartmentPoint.of(w)
        assert weyl_form(rs, reflect(rs, i, v), reflect(rs, i, w)) == weyl_form(rs, v, w)

    @hsettings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=40)
    @given(names, point2)
    def test_positive_definite(self, name, v):
        """Test <v, v> > 0 away from the origin"""
        from btbounds.models.rootsys import ApartmentPoint, build_root_system, weyl_form

        rs = build_root_system(name)
        x = ApartmentPoint.of(v)
        if any(x.coords):
            assert weyl_form(rs, x, x) > 0

    @hsettings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=40)
    @given(
        names,
        st.tuples(st.fractions(min_value=0, max_value=4, max_denominator=4), st.fractions(min_value=0, max_value=4, max_denominator=4)),
        st.integers(min_value=0, max_value=1),
        st.fractions(min_value=Fraction(1, 4), max_value=3, max_denominator=4),
    )
    def test_distance_grows_along_special_vertices(self, name, x, i, t):
        """Test moving a dominant point along a_i moves it away from the origin"""
        from btbounds.models.rootsys import ApartmentPoint, build_root_system, distance_increases

        rs = build_root_system(name)
        assert distance_increases(rs, ApartmentPoint.of(x), i, t)


class TestVertices:
    """Tests for the polysimplicial vertex structure"""

    def test_origin_is_vertex(self):
        """Test the origin is a vertex"""
        from btbounds.models.rootsys import ApartmentPoint, build_root_system, is_vertex

        assert is_vertex(build_root_system("A2"), ApartmentPoint.of([0, 0]))

    def test_midpoint_is_not_vertex(self):
        """Test a point on one wall only is not a vertex"""
        from btbounds.models.rootsys import ApartmentPoint, build_root_system, is_vertex

        assert not is_vertex(build_root_system("A2"), ApartmentPoint.of([Fraction(1, 2), 0]))

    def test_a1_cone(self):
        """Test the A1 cone below 3 holds 0, 1 and 2"""
        from btbounds.models.rootsys import ApartmentPoint, build_root_system, enumerate_cone_vertices

        report = enumerate_cone_vertices(build_root_system("A1"), ApartmentPoint.of([0]), 3)
        assert report.count == 3

    @pytest.mark.parametrize("start", [[0, 0], [1, 2]])
    def test_a2_cone_against_grid(self, start):
        """Test the A2 cone vertices match a brute-force search on a finer grid"""
        from itertools import product
        from btbounds.models.rootsys import ApartmentPoint, build_root_system, enumerate_cone_vertices

        bound = 3
        report = enumerate_cone_vertices(build_root_system("A2"), ApartmentPoint.of(start), bound)

        # a point of the A2 apartment is a vertex when two of a, b, a + b are integers
        expected = set()
        grid = [Fraction(k, 6) for k in range(6 * bound)]
        for da, db in product(grid, repeat=2):
            a, b = start[0] + da, start[1] + db
            integral = [v.denominator == 1 for v in (a, b, a + b)]
            if sum(integral) >= 2:
                expected.add((a, b))
        assert {y.coords for y in report.vertices} == expected
        assert report.count == bound ** 2

    def test_gl_apartment_point(self):
        """Test GL_n coordinates map to simple-root differences"""
        from btbounds.models.rootsys import gl_apartment_point

        assert gl_apartment_point([2, 1, 0]).coords == (1, 1)
