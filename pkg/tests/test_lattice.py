"""
Lattice Tests
Tests for the Smith normal form and affine solution counting
"""

import pytest
from unittest.mock import patch
from hypothesis import HealthCheck, assume, given, settings as hsettings, strategies as st
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


entries = st.integers(min_value=0, max_value=26)


class TestSmithNormalForm:
    """Tests for SNF over Z_p"""

    def test_identity(self):
        """Test identity has trivial divisors"""
        from btbounds.services.lattice_service import smith_normal_form

        assert smith_normal_form([[1, 0], [0, 1]], p=3, prec=4).D == (0, 0)

    def test_scalar(self):
        """Test diag(p, p)"""
        from btbounds.services.lattice_service import smith_normal_form

        assert smith_normal_form([[3, 0], [0, 3]], p=3, prec=4).D == (1, 1)

    def test_unit_gcd(self):
        """Test [[p, 1], [0, p]] has divisors (0, 2)"""
        from btbounds.services.lattice_service import smith_normal_form

        form = smith_normal_form([[3, 1], [0, 3]], p=3, prec=4)
        assert form.D == (0, 2)
        assert form.det_valuation == 2

    def test_reconstruction(self):
        """Test P M Q equals the diagonal form"""
        from btbounds.services.lattice_service import smith_normal_form

        M = [[3, 1], [0, 3]]
        form = smith_normal_form(M, p=3, prec=4)
        assert form.reconstruct(M) == form.diagonal

    def test_insufficient_precision(self):
        """Test divisors beyond the entry precision are refused"""
        from btbounds.services.lattice_service import smith_normal_form
        from btbounds.utils.errors import PrecisionInsufficientError

        with pytest.raises(PrecisionInsufficientError):
            smith_normal_form([[3, 1], [0, 3]], p=3, prec=2)

    def test_singular(self):
        """Test singular input is degenerate"""
        from btbounds.services.lattice_service import smith_normal_form
        from btbounds.utils.errors import DegenerateInputError

        with pytest.raises(DegenerateInputError):
            smith_normal_form([[1, 1], [1, 1]], p=3, prec=4)

    @hsettings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=60)
    @given(entries, entries, entries, entries)
    def test_divisor_chain(self, a, b, c, d):
        """Test d_1 <= d_2 and sum d_i = v(det)"""
        from btbounds.services.lattice_service import lattice_determinant_valuation, smith_normal_form

        assume(a * d - b * c != 0)
        M = [[a, b], [c, d]]
        form = smith_normal_form(M, p=3, prec=8)
        assert list(form.D) == sorted(form.D)
        assert sum(form.D) == lattice_determinant_valuation(M, p=3, prec=8)
        assert form.reconstruct(M) == form.diagonal


class TestAffineSolutions:
    """Tests for counting l in L/L' with M l + v in L'"""

    def test_scalar_counts_everything(self):
        """Test M = p over Z_2 with L' = 2Z_2"""
        from btbounds.services.lattice_service import count_affine_solutions

        assert count_affine_solutions([[2]], [0], [[2]], p=2, prec=4) == 2

    def test_identity_counts_one(self):
        """Test M = 1 only admits l = 0"""
        from btbounds.services.lattice_service import count_affine_solutions

        assert count_affine_solutions([[1]], [0], [[2]], p=2, prec=4) == 1

    def test_v_outside_lattice(self):
        """Test non-integral v is refused"""
        from btbounds.services.lattice_service import count_affine_solutions
        from btbounds.utils.errors import DegenerateInputError

        with pytest.raises(DegenerateInputError):
            count_affine_solutions([[1]], ["1/2"], [[2]], p=2, prec=4)

    def test_sublattice_not_preserved(self):
        """Test M must map L' into itself"""
        from btbounds.services.lattice_service import count_affine_solutions
        from btbounds.utils.errors import DegenerateInputError

        with pytest.raises(DegenerateInputError):
            count_affine_solutions([[0, 1], [1, 0]], [0, 0], [[2, 0], [0, 1]], p=2, prec=4)

    def test_bound_with_equality(self):
        """Test p.I in dimension one meets its bound"""
        from btbounds.services.lattice_service import verify_lattice_bound

        report = verify_lattice_bound([[2]], [0], [[2]], p=2, prec=4)
        assert report.count == 2
        assert report.bound_exponent == 1
        assert report.holds

    @hsettings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=40)
    @given(
        st.lists(st.integers(min_value=0, max_value=7), min_size=4, max_size=4),
        st.lists(st.integers(min_value=0, max_value=3), min_size=2, max_size=2),
        st.lists(st.integers(min_value=-3, max_value=3), min_size=2, max_size=2),
    )
    def test_translation_invariance(self, m, v, l0):
        """Test count(v) = count(v + M l0)"""
        from btbounds.services.lattice_service import count_affine_solutions

        a, b, c, d = m
        assume(a * d - b * c != 0)
        M = [[a, b], [c, d]]
        shifted = [v[0] + a * l0[0] + b * l0[1], v[1] + c * l0[0] + d * l0[1]]
        B = [[4, 0], [0, 4]]
        assert count_affine_solutions(M, v, B, p=2, prec=8) == count_affine_solutions(M, shifted, B, p=2, prec=8)

    def test_small_exhaustive_sweep(self):
        """Test the bound on every 2x2 matrix mod 4 with v(det) in {1, 2}"""
        from btbounds.services.lattice_service import lattice_bound_sweep

        results = lattice_bound_sweep(p=2, prec=3, depth=2)
        assert results
        assert all(report.holds for _, _, report in results)


class TestMatrices:
    """Tests for exact matrix helpers"""

    def test_determinant_3x3(self):
        """Test an exact 3x3 determinant"""
        from btbounds.utils.matrices import as_matrix, determinant

        assert determinant(as_matrix([[2, 1, 0], [1, 3, 1], [0, 1, 4]])) == 18

    def test_inverse_is_two_sided(self):
        """Test the inverse multiplies to the identity on both sides"""
        from fractions import Fraction
        from btbounds.utils.matrices import as_matrix, identity, inverse, mat_mul

        M = as_matrix([[2, 1, 0], [1, 3, 1], [0, Fraction(1, 3), 4]])
        assert mat_mul(M, inverse(M)) == identity(3)
        assert mat_mul(inverse(M), M) == identity(3)

    def test_singular_inverse(self):
        """Test inverting a singular matrix is degenerate"""
        from btbounds.utils.matrices import as_matrix, inverse
        from btbounds.utils.errors import DegenerateInputError

        with pytest.raises(DegenerateInputError):
            inverse(as_matrix([[1, 2], [2, 4]]))

    def test_shape_mismatch(self):
        """Test multiplying incompatible shapes is degenerate"""
        from btbounds.utils.matrices import identity, mat_mul
        from btbounds.utils.errors import DegenerateInputError

        with pytest.raises(DegenerateInputError):
            mat_mul(identity(2), identity(3))

    @hsettings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=40)
    @given(st.lists(entries, min_size=4, max_size=4), st.lists(entries, min_size=4, max_size=4))
    def test_determinant_is_multiplicative(self, a, b):
        """Test det(AB) = det(A) det(B)"""
        from btbounds.utils.matrices import as_matrix, determinant, mat_mul

        A = as_matrix([a[:2], a[2:]])
        B = as_matrix([b[:2], b[2:]])
        assert determinant(mat_mul(A, B)) == determinant(A) * determinant(B)
        assert determinant(A) == a[0] * a[3] - a[1] * a[2]
