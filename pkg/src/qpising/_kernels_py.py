"""Pure-numpy state-vector kernels (fallback backend).

Amplitudes are a contiguous complex128 array over 2^n basis states,
little-endian: bit j of the index is qubit j.  All kernels mutate the
array in place.  The compiled backend in ``_kernels`` exposes the same
four functions.
"""

from __future__ import annotations

import numpy as np


def apply_1q(amps: np.ndarray, q: int, m00: complex, m01: complex, m10: complex, m11: complex) -> None:
    v = amps.reshape(-1, 2, 1 << q)
    a0 = v[:, 0, :]
    a1 = v[:, 1, :]
    t0 = m00 * a0 + m01 * a1
    a1[...] = m10 * a0 + m11 * a1
    a0[...] = t0


def apply_diag_1q(amps: np.ndarray, q: int, p0: complex, p1: complex) -> None:
    v = amps.reshape(-1, 2, 1 << q)
    v[:, 0, :] *= p0
    v[:, 1, :] *= p1


def apply_diag_2q(
    amps: np.ndarray,
    qa: int,
    qb: int,
    p00: complex,
    p01: complex,
    p10: complex,
    p11: complex,
) -> None:
    """Multiply by phase p_{xb xa} where xa, xb are the bits of qa, qb."""
    lo, hi = (qa, qb) if qa < qb else (qb, qa)
    v = amps.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    phases = ((p00, p01), (p10, p11))  # indexed [xb][xa]
    for bhi in (0, 1):
        for blo in (0, 1):
            xa, xb = (blo, bhi) if qa == lo else (bhi, blo)
            v[:, bhi, :, blo, :] *= phases[xb][xa]


def expect_z(amps: np.ndarray, q: int) -> float:
    v = amps.reshape(-1, 2, 1 << q)
    a1 = v[:, 1, :].ravel()
    p1 = np.vdot(a1, a1).real
    a0 = v[:, 0, :].ravel()
    p0 = np.vdot(a0, a0).real
    return p0 - p1
