"""
Image files.

IMGF64 holds exact data: an ASCII header line ``IMGF64 N`` followed by N*N
little-endian float64 values in row-major order. PGM (P2 text or P5
binary, 8 or 16 bit) is written for previews only and read through Pillow.
"""
import io
import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .exceptions import DimensionMismatchError, ImageFormatError

IMGF64_MAGIC = b'IMGF64'
_LE_FLOAT64 = np.dtype('<f8')
PGM_MODES = ('L', 'I', 'I;16', 'I;16B')


def atomic_write(path, payload: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.')
    try:
        with os.fdopen(fd, 'wb') as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_imgf64(path, image):
    image = np.asarray(image, dtype=float)
    if image.ndim != 2 or image.shape[0] != image.shape[1]:
        raise DimensionMismatchError(f'IMGF64 stores square images, got shape {image.shape}.')
    header = IMGF64_MAGIC + b' %d\n' % image.shape[0]
    atomic_write(path, header + np.ascontiguousarray(image, dtype=_LE_FLOAT64).tobytes(order='C'))


def read_imgf64(path):
    data = Path(path).read_bytes()
    newline = data.find(b'\n')
    if newline < 0:
        raise ImageFormatError(f'{path}: missing IMGF64 header.')
    parts = data[:newline].split()
    if len(parts) != 2 or parts[0] != IMGF64_MAGIC or not parts[1].isdigit():
        raise ImageFormatError(f'{path}: malformed IMGF64 header {data[:newline]!r}.')
    N = int(parts[1])
    body = data[newline + 1:]
    if len(body) != N * N * _LE_FLOAT64.itemsize:
        raise ImageFormatError(f'{path}: expected {N * N} float64 values, found {len(body)} bytes.')
    return np.frombuffer(body, dtype=_LE_FLOAT64).reshape(N, N).astype(float)


def to_gray_levels(image, maxval=255):
    """
    Map the image range linearly onto 0..maxval.
    """
    image = np.asarray(image, dtype=float)
    lo, hi = float(image.min()), float(image.max())
    if hi <= lo:
        return np.zeros(image.shape, dtype=np.uint16)
    return np.rint((image - lo) / (hi - lo) * maxval).astype(np.uint16)


def write_pgm(path, image, maxval=255, binary=True):
    """
    Preview of ``image`` as a P5 graymap (Pillow) or, with binary=False,
    a P2 text graymap, scaled onto 0..maxval.
    """
    if maxval not in (255, 65535):
        raise ValueError(f'PGM maxval must be 255 or 65535, got {maxval}.')
    levels = to_gray_levels(image, maxval)
    buffer = io.BytesIO()
    if binary:
        Image.fromarray(levels.astype(np.uint8 if maxval == 255 else np.uint16)).save(buffer, format='PPM')
    else:
        rows, cols = levels.shape
        buffer.write(b'P2\n%d %d\n%d\n' % (cols, rows, maxval))
        np.savetxt(buffer, levels, fmt='%d')
    atomic_write(path, buffer.getvalue())


def read_pgm(path):
    """
    Gray levels of a P2 or P5 file (comment lines allowed) as uint16.
    """
    try:
        with Image.open(path) as im:
            if im.format != 'PPM' or im.mode not in PGM_MODES:
                raise ImageFormatError(f'{path}: not a PGM file ({im.format} {im.mode}).')
            return np.asarray(im).astype(np.uint16)
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f'{path}: not a PGM file.') from exc
