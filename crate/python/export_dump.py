"""Write integer arrays in the TUGW tensor dump format read by `tugemm profile`.

Layout: 4-byte magic b"TUGW", u8 element bits (8, 16 or 32), u8 rank (1..4),
two reserved zero bytes, four little-endian u16 dims (unused dims zero),
then the signed little-endian elements in row-major order.

Usage from a quantized model, e.g. with PyTorch:

    from export_dump import write_tugw
    write_tugw("conv1_weight.tugw", layer.weight().int_repr().numpy())
"""

import struct
import sys

import numpy as np

DTYPES = {8: "<i1", 16: "<i2", 32: "<i4"}


def write_tugw(path, array, bits=8):
    arr = np.asarray(array)
    if not 1 <= arr.ndim <= 4:
        raise ValueError(f"rank {arr.ndim} not in 1..4")
    if any(d == 0 or d > 0xFFFF for d in arr.shape):
        raise ValueError(f"dims {arr.shape} must be in 1..65535")
    lo, hi = -(1 << (bits - 1)), (1 << (bits - 1)) - 1
    if arr.size and (arr.min() < lo or arr.max() > hi):
        raise ValueError(f"values exceed the {bits}-bit range")
    dims = list(arr.shape) + [0] * (4 - arr.ndim)
    header = b"TUGW" + struct.pack("<BBH4H", bits, arr.ndim, 0, *dims)
    with open(path, "wb") as f:
        f.write(header)
        f.write(arr.astype(DTYPES[bits]).tobytes(order="C"))


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit("usage: export_dump.py INPUT.npy OUTPUT.tugw")
    write_tugw(sys.argv[2], np.load(sys.argv[1]))
