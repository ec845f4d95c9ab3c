import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpeg.errors import DomainError
from qpeg.rgmap import (
    AddressScheme,
    Ket,
    digits_to_index,
    digits_to_pixel,
    image_to_ket,
    ket_to_image,
    pixel_to_digits,
)


def brute_force_ket(block, scheme):
    """Oracle: place every pixel by walking the quadtree one level at a time."""
    side = scheme.side
    coeffs = np.full(scheme.size, np.nan)
    for row in range(side):
        for col in range(side):
            # descend from the whole image to the pixel, coarsest level first
            digits = []
            top, left, span = 0, 0, side
            for _ in range(scheme.n):
                span //= scheme.b
                r, c = (row - top) // span, (col - left) // span
                digits.append(r * scheme.b + c + 1)
                top, left = top + r * span, left + c * span
            index = sum((dig - 1) * scheme.d ** k for k, dig in enumerate(reversed(digits)))
            coeffs[index] = block[row, col]
    return coeffs


class TestScheme:
    def test_derived_fields(self):
        s = AddressScheme(3, 4)
        assert (s.d, s.side, s.size) == (9, 81, 6561)
        assert s.size == s.side**2

    @pytest.mark.parametrize("b, n", [(1, 2), (2, 0), (0, 1)])
    def test_rejects_bad_parameters(self, b, n):
        with pytest.raises(DomainError):
            AddressScheme(b, n)

    def test_for_side(self):
        assert AddressScheme.for_side(81, 3) == AddressScheme(3, 4)
        with pytest.raises(DomainError):
            AddressScheme.for_side(12, 2)

    def test_ket_length_checked(self):
        with pytest.raises(DomainError):
            Ket(AddressScheme(2, 2), np.zeros(15))


class TestPixelDigits:
    def test_origin_is_all_up_left(self):
        assert pixel_to_digits(0, 0, AddressScheme(2, 2)) == (1, 1)

    def test_up_right_corner(self):
        assert pixel_to_digits(0, 3, AddressScheme(2, 2)) == (2, 2)

    @pytest.mark.parametrize("row, col, digit", [(0, 0, 1), (0, 1, 2), (1, 0, 3), (1, 1, 4)])
    def test_single_level_labels(self, row, col, digit):
        assert pixel_to_digits(row, col, AddressScheme(2, 1)) == (digit,)

    def test_inverse_examples(self):
        assert digits_to_pixel((1, 1), AddressScheme(2, 2)) == (0, 0)
        assert digits_to_pixel((2, 2), AddressScheme(2, 2)) == (0, 3)
        assert digits_to_pixel((4,), AddressScheme(2, 1)) == (1, 1)

    def test_out_of_range(self):
        s = AddressScheme(2, 2)
        with pytest.raises(DomainError):
            pixel_to_digits(4, 0, s)
        with pytest.raises(DomainError):
            pixel_to_digits(0, -1, s)
        with pytest.raises(DomainError):
            digits_to_pixel((5, 1), s)
        with pytest.raises(DomainError):
            digits_to_pixel((0, 1), s)
        with pytest.raises(DomainError):
            digits_to_pixel((1,), s)

    @pytest.mark.parametrize("b, n", [(b, n) for b in (2, 3) for n in range(1, 5)])
    def test_bijective_exhaustive(self, b, n):
        s = AddressScheme(b, n)
        seen = set()
        for row in range(s.side):
            for col in range(s.side):
                digits = pixel_to_digits(row, col, s)
                assert len(digits) == n and all(1 <= x <= s.d for x in digits)
                assert digits_to_pixel(digits, s) == (row, col)
                seen.add(digits)
        assert len(seen) == s.size

    def test_digit_index_linearization(self):
        s = AddressScheme(2, 2)
        assert digits_to_index((1, 1), s) == 0
        assert digits_to_index((1, 2), s) == 1  # finest digit varies fastest
        assert digits_to_index((2, 1), s) == 4
        assert digits_to_index((4, 4), s) == 15


class TestCasting:
    def test_two_by_two(self):
        ket = image_to_ket([[10, 20], [30, 40]], AddressScheme(2, 1))
        np.testing.assert_array_equal(ket.coeffs, [10, 20, 30, 40])
        np.testing.assert_array_equal(ket_to_image(ket), [[10, 20], [30, 40]])

    def test_constant(self):
        ket = image_to_ket(np.full((4, 4), 255.0), AddressScheme(2, 2))
        np.testing.assert_array_equal(ket.coeffs, np.full(16, 255.0))

    def test_zero_ket(self):
        s = AddressScheme(3, 2)
        np.testing.assert_array_equal(ket_to_image(Ket(s, np.zeros(s.size))), np.zeros((9, 9)))

    def test_wrong_side(self):
        with pytest.raises(DomainError):
            image_to_ket(np.zeros((5, 5)), AddressScheme(2, 2))

    @pytest.mark.parametrize("b, n", [(2, 1), (2, 3), (3, 2), (2, 4), (3, 3)])
    def test_matches_quadtree_oracle(self, rng, b, n):
        s = AddressScheme(b, n)
        block = rng.integers(0, 256, (s.side, s.side)).astype(float)
        np.testing.assert_array_equal(image_to_ket(block, s).coeffs, brute_force_ket(block, s))

    def test_matches_pixel_to_digits(self, rng):
        s = AddressScheme(3, 2)
        block = rng.standard_normal((9, 9))
        ket = image_to_ket(block, s)
        for row, col in itertools.product(range(9), repeat=2):
            assert ket.coeffs[digits_to_index(pixel_to_digits(row, col, s), s)] == block[row, col]

    def test_locality_of_coarsest_digit(self):
        s = AddressScheme(2, 3)
        block = np.arange(64.0).reshape(8, 8)
        coeffs = image_to_ket(block, s).coeffs
        quarter = s.d ** (s.n - 1)
        for i_n, (r, c) in enumerate([(0, 0), (0, 4), (4, 0), (4, 4)]):
            expected = block[r:r + 4, c:c + 4]
            assert sorted(coeffs[i_n * quarter:(i_n + 1) * quarter]) == sorted(expected.ravel())

    @settings(max_examples=50, deadline=None)
    @given(st.sampled_from([(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)]), st.data())
    def test_round_trip_is_permutation(self, bn, data):
        s = AddressScheme(*bn)
        values = data.draw(st.lists(st.integers(0, 255), min_size=s.size, max_size=s.size))
        block = np.array(values, dtype=float).reshape(s.side, s.side)
        ket = image_to_ket(block, s)
        assert sorted(ket.coeffs) == sorted(block.ravel())
        np.testing.assert_array_equal(ket_to_image(ket), block)

    def test_random_8x8_round_trip(self, rng):
        s = AddressScheme(2, 3)
        for _ in range(20):
            block = rng.integers(0, 256, (8, 8)).astype(float)
            np.testing.assert_array_equal(ket_to_image(image_to_ket(block, s)), block)
