"""JSON encoding of complex arrays and small schema helpers."""

import numpy as np

__all__ = ["carray_to_json", "carray_from_json"]


def carray_to_json(a) -> dict:
    """Encode a complex ndarray as {shape, re, im} with flat real lists."""
    a = np.asarray(a, dtype=complex)
    return {
        "shape": list(a.shape),
        "re": [float(x) for x in a.real.reshape(-1)],
        "im": [float(x) for x in a.imag.reshape(-1)],
    }


def carray_from_json(d) -> np.ndarray:
    shape = tuple(d["shape"])
    re = np.array(d["re"], dtype=float).reshape(shape)
    im = np.array(d["im"], dtype=float).reshape(shape)
    return re + 1j * im
