import numpy as np
import pytest

from qpeg.errors import DomainError, FormatError
from qpeg.imageio import (
    BoxLayout,
    ImageGrid,
    merge_boxes,
    pad_and_split,
    read_pgm,
    to_pixels,
    write_pgm,
)


class TestPgm:
    def test_read_small(self):
        grid = read_pgm(b"P5 2 2 255\n" + bytes([0, 128, 255, 64]))
        np.testing.assert_array_equal(grid.pixels, [[0, 128], [255, 64]])

    def test_comment_after_magic(self):
        grid = read_pgm(b"P5\n# made by hand\n2 1\n255\n" + bytes([7, 9]))
        assert (grid.width, grid.height) == (2, 1)
        np.testing.assert_array_equal(grid.pixels, [[7, 9]])

    def test_canonical_header(self):
        grid = ImageGrid(np.array([[1, 2, 3]], dtype=np.uint8))
        assert write_pgm(grid) == b"P5\n3 1\n255\n\x01\x02\x03"

    def test_round_trip(self, rng):
        for w, h in [(1, 1), (5, 3), (64, 17)]:
            grid = ImageGrid(rng.integers(0, 256, (h, w), dtype=np.uint8))
            data = write_pgm(grid)
            assert read_pgm(data) == grid
            assert write_pgm(read_pgm(data)) == data

    def test_round_trip_modulo_header_whitespace(self):
        raw = b"P5  2\t2\r\n255 " + bytes([1, 2, 3, 4])
        assert write_pgm(read_pgm(raw)) == b"P5\n2 2\n255\n" + bytes([1, 2, 3, 4])

    def test_rejects_16_bit(self):
        with pytest.raises(FormatError):
            read_pgm(b"P5 1 1 65535\n\x00\x00")

    def test_rejects_bad_magic(self):
        with pytest.raises(FormatError) as info:
            read_pgm(b"P2 1 1 255\n0")
        assert info.value.offset == 0

    def test_truncated_payload_reports_offset(self):
        with pytest.raises(FormatError) as info:
            read_pgm(b"P5 2 2 255\n" + bytes([1, 2, 3]))
        assert info.value.offset is not None

    @pytest.mark.parametrize("data", [b"P5", b"P5 2", b"P5 2 2", b"P5 2 x 255\n", b"P5 0 2 255\n"])
    def test_truncated_or_bad_header(self, data):
        with pytest.raises(FormatError):
            read_pgm(data)

    def test_pixel_above_maxval(self):
        with pytest.raises(FormatError):
            read_pgm(b"P5 2 1 100\n" + bytes([50, 200]))


class TestBoxes:
    def test_nine_boxes(self, rng):
        grid = ImageGrid(rng.integers(0, 256, (243, 243), dtype=np.uint8))
        layout, blocks = pad_and_split(grid, 81)
        assert (layout.rows, layout.cols, layout.pad_right, layout.pad_bottom) == (3, 3, 0, 0)
        assert len(blocks) == 9
        np.testing.assert_array_equal(blocks[5], grid.pixels[81:162, 162:243])
        assert merge_boxes(layout, blocks) == grid

    def test_single_box_identity(self):
        grid = ImageGrid(np.arange(16, dtype=np.uint8).reshape(4, 4))
        layout, blocks = pad_and_split(grid, 4)
        assert len(blocks) == 1
        np.testing.assert_array_equal(blocks[0], grid.pixels)

    def test_edge_replication(self):
        ramp = ImageGrid((np.arange(25).reshape(5, 5) * 10).astype(np.uint8))
        layout, blocks = pad_and_split(ramp, 4)
        assert (layout.rows, layout.cols, layout.pad_right, layout.pad_bottom) == (2, 2, 3, 3)
        # box (0, 1) covers cols 4..7: col 4 then three copies of it
        np.testing.assert_array_equal(blocks[1], [[40] * 4, [90] * 4, [140] * 4, [190] * 4])
        # bottom-right box is the corner pixel replicated
        np.testing.assert_array_equal(blocks[3], np.full((4, 4), 240))
        np.testing.assert_array_equal(blocks[2][0], [200, 210, 220, 230])
        assert merge_boxes(layout, blocks) == ramp

    def test_zero_box_side(self):
        with pytest.raises(DomainError):
            pad_and_split(ImageGrid(np.zeros((2, 2), dtype=np.uint8)), 0)

    def test_clamp_and_round(self):
        layout = BoxLayout.for_image(2, 2, 2)
        out = merge_boxes(layout, [np.array([[255.7, -0.4], [2.5, -2.5]])])
        np.testing.assert_array_equal(out.pixels, [[255, 0], [3, 0]])
        np.testing.assert_array_equal(to_pixels([0.5, 1.5, 254.49]), [1, 2, 254])

    def test_mismatched_count(self):
        layout = BoxLayout.for_image(4, 4, 2)
        with pytest.raises(DomainError):
            merge_boxes(layout, [np.zeros((2, 2))] * 3)
        with pytest.raises(DomainError):
            merge_boxes(layout, [np.zeros((3, 3))] * 4)

    def test_non_finite_rejected(self):
        with pytest.raises(DomainError):
            merge_boxes(BoxLayout.for_image(1, 1, 1), [np.array([[np.nan]])])

    def test_image_grid_validation(self):
        with pytest.raises(DomainError):
            ImageGrid(np.array([[256]]))
        with pytest.raises(DomainError):
            ImageGrid(np.zeros(4))
        assert ImageGrid(np.array([[3.0]])).pixels.dtype == np.uint8
