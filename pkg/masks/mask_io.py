"""
Binary mask files

Layout (little-endian):
    magic  b"CFMK"
    u32    T (frames)
    u32    F (bins)
    T*F    interleaved (real, imag) float32, row-major by frame
"""

import os
import struct

import numpy as np

from .mask import ComplexMask

MAGIC = b'CFMK'
HEADER = struct.Struct('<4sII')


class MaskFormatError(ValueError):
    """Malformed, truncated or mis-dimensioned mask file"""


def save_mask(path: str, mask: ComplexMask):
    frames, bins = mask.shape
    payload = np.empty((frames, bins, 2), dtype='<f4')
    payload[..., 0] = mask.values.real
    payload[..., 1] = mask.values.imag

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(HEADER.pack(MAGIC, frames, bins))
        f.write(payload.tobytes())


def load_mask(path: str, frames: int, bins: int) -> ComplexMask:
    """
    Read a mask and check it against the expected dimensions

    Raises:
        MaskFormatError: bad magic, dims differ from (frames, bins), or payload size wrong
    """
    with open(path, 'rb') as f:
        blob = f.read()

    if len(blob) < HEADER.size:
        raise MaskFormatError(f"{path}: file too short for header ({len(blob)} bytes)")
    magic, file_frames, file_bins = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise MaskFormatError(f"{path}: bad magic {magic!r}")
    if (file_frames, file_bins) != (frames, bins):
        raise MaskFormatError(
            f"{path}: declared dims {file_frames}x{file_bins}, expected {frames}x{bins}"
        )

    expected = file_frames * file_bins * 8
    payload = blob[HEADER.size:]
    if len(payload) != expected:
        raise MaskFormatError(
            f"{path}: payload is {len(payload)} bytes, dims {file_frames}x{file_bins} need {expected}"
        )

    pairs = np.frombuffer(payload, dtype='<f4').reshape(file_frames, file_bins, 2)
    values = pairs[..., 0].astype(np.float64) + 1j * pairs[..., 1].astype(np.float64)
    try:
        return ComplexMask(values)
    except ValueError as e:
        raise MaskFormatError(f"{path}: {e}") from e
