import numpy as np
import pytest
from optim.exceptions import DimensionMismatchError, ImageFormatError
from optim.imgio import read_imgf64, read_pgm, to_gray_levels, write_imgf64, write_pgm


class TestImgf64:

    def test_header_and_layout(self, tmp_path):
        path = tmp_path / 'x.imgf64'
        write_imgf64(path, np.array([[1.0, 2.0], [3.0, 4.0]]))
        data = path.read_bytes()

        assert data.startswith(b'IMGF64 2\n')
        assert np.frombuffer(data[9:], dtype='<f8').tolist() == [1.0, 2.0, 3.0, 4.0]

    def test_values_are_exact(self, tmp_path, rng):
        image = rng.standard_normal((16, 16)) * 1e6
        write_imgf64(tmp_path / 'x.imgf64', image)

        assert np.array_equal(read_imgf64(tmp_path / 'x.imgf64'), image)

    def test_no_temporary_files_are_left(self, tmp_path):
        write_imgf64(tmp_path / 'out' / 'x.imgf64', np.zeros((3, 3)))

        assert [p.name for p in (tmp_path / 'out').iterdir()] == ['x.imgf64']

    def test_if_not_square_raises(self, tmp_path):
        with pytest.raises(DimensionMismatchError):
            write_imgf64(tmp_path / 'x.imgf64', np.zeros((2, 3)))

    @pytest.mark.parametrize('payload', [b'IMGF64 2', b'PGM 2\n', b'IMGF64 2\n' + b'\0' * 8])
    def test_if_malformed_file_raises(self, tmp_path, payload):
        path = tmp_path / 'bad.imgf64'
        path.write_bytes(payload)

        with pytest.raises(ImageFormatError):
            read_imgf64(path)


class TestPgm:

    def test_gray_levels_span_the_range(self):
        levels = to_gray_levels(np.array([[0.0, 5.0], [10.0, 2.5]]))

        assert levels.tolist() == [[0, 128], [255, 64]]

    def test_if_flat_image_is_black(self):
        assert not np.any(to_gray_levels(np.full((3, 3), 7.0)))

    @pytest.mark.parametrize('maxval', [255, 65535])
    @pytest.mark.parametrize('binary', [True, False])
    def test_written_levels_read_back(self, tmp_path, rng, maxval, binary):
        image = rng.uniform(0, 1000, (5, 7))
        path = tmp_path / 'x.pgm'
        write_pgm(path, image, maxval=maxval, binary=binary)

        assert path.read_bytes().startswith(b'%s\n7 5\n%d\n' % (b'P5' if binary else b'P2', maxval))
        assert np.array_equal(read_pgm(path), to_gray_levels(image, maxval))

    @pytest.mark.parametrize('payload', [
        b'P2\n# preview\n3 1\n# levels\n255\n0 128 255\n',
        b'P5\n# preview\n3 1\n255\n\x00\x80\xff',
    ])
    def test_if_header_has_comments_it_is_read(self, tmp_path, payload):
        path = tmp_path / 'x.pgm'
        path.write_bytes(payload)

        assert read_pgm(path).tolist() == [[0, 128, 255]]

    def test_if_invalid_maxval_raises(self, tmp_path):
        with pytest.raises(ValueError):
            write_pgm(tmp_path / 'x.pgm', np.ones((2, 2)), maxval=1023)

    @pytest.mark.parametrize('payload', [b'P6\n1 1\n255\n\0\0\0', b'IMGF64 1\n' + b'\0' * 8])
    def test_if_not_pgm_raises(self, tmp_path, payload):
        path = tmp_path / 'x.pgm'
        path.write_bytes(payload)

        with pytest.raises(ImageFormatError):
            read_pgm(path)
