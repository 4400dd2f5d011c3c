"""In-place gate kernels on dense amplitude arrays.

Amplitude arrays have shape ``(..., 2**n)``; any leading axes are a batch of
independent states. Qubit 0 is the least-significant bit of the amplitude
index. A gate on qubit ``k`` pairs amplitudes whose indices differ only in
bit ``k``; the kernels expose those pairs as strided views rather than
looping over indices in Python.

Angles may be scalars or arrays broadcastable to the batch shape.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import _jit

# single-state calls with scalar angles go through the compiled loops
USE_JIT = True

SQRT_HALF = np.sqrt(0.5)

FIXED_MATRICES = {
    "H": np.array([[SQRT_HALF, SQRT_HALF], [SQRT_HALF, -SQRT_HALF]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def n_qubits_of(amps: np.ndarray) -> int:
    dim = amps.shape[-1]
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise ValueError(f"amplitude length {dim} is not a power of two")
    return n


def _pair_view(amps: np.ndarray, q: int) -> np.ndarray:
    # (..., high, 2, low): axis -2 is bit q
    n = n_qubits_of(amps)
    return amps.reshape(amps.shape[:-1] + (1 << (n - q - 1), 2, 1 << q))


def _quad_view(amps: np.ndarray, a: int, b: int) -> tuple[np.ndarray, int, int]:
    """View with separate axes for bits ``a`` and ``b``; returns (view, axis_a, axis_b)."""
    n = n_qubits_of(amps)
    hi, lo = max(a, b), min(a, b)
    shape = amps.shape[:-1] + (1 << (n - hi - 1), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    view = amps.reshape(shape)
    nb = amps.ndim - 1
    ax_hi, ax_lo = nb + 1, nb + 3
    return (view, ax_hi, ax_lo) if a == hi else (view, ax_lo, ax_hi)


def _bcast(x, amps: np.ndarray, extra: int):
    x = np.asarray(x)
    if x.ndim == 0:
        return x
    return x.reshape(x.shape + (1,) * extra)


def _scalar(amps: np.ndarray, theta=None) -> bool:
    return USE_JIT and amps.ndim == 1 and (theta is None or np.ndim(theta) == 0)


def apply_matrix_1q(amps: np.ndarray, q: int, u) -> None:
    """Apply a 2x2 matrix (or a batch of them, shape ``(..., 2, 2)``) to qubit ``q``."""
    u = np.asarray(u)
    if u.ndim == 2 and _scalar(amps):
        _jit.matrix_1q(amps, q, complex(u[0, 0]), complex(u[0, 1]), complex(u[1, 0]), complex(u[1, 1]))
        return
    v = _pair_view(amps, q)
    a0 = v[..., 0, :].copy()
    a1 = v[..., 1, :]
    u00, u01, u10, u11 = (_bcast(u[..., i, j], amps, 2) for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
    v[..., 0, :] = u00 * a0 + u01 * a1
    v[..., 1, :] = u10 * a0 + u11 * a1


def apply_pauli_1q(amps: np.ndarray, q: int, label: str) -> None:
    v = _pair_view(amps, q)
    if label == "Z":
        v[..., 1, :] *= -1
        return
    a0 = v[..., 0, :].copy()
    if label == "X":
        v[..., 0, :] = v[..., 1, :]
        v[..., 1, :] = a0
    elif label == "Y":
        v[..., 0, :] = -1j * v[..., 1, :]
        v[..., 1, :] = 1j * a0
    else:
        raise ValueError(f"unknown Pauli label {label!r}")


def apply_rx(amps: np.ndarray, q: int, theta) -> None:
    if _scalar(amps, theta):
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        _jit.matrix_1q(amps, q, complex(c), -1j * s, -1j * s, complex(c))
        return
    c = _bcast(np.cos(np.asarray(theta) / 2), amps, 2)
    s = _bcast(np.sin(np.asarray(theta) / 2), amps, 2)
    v = _pair_view(amps, q)
    a0 = v[..., 0, :].copy()
    a1 = v[..., 1, :]
    v[..., 0, :] = c * a0 - 1j * s * a1
    v[..., 1, :] = c * a1 - 1j * s * a0


def apply_ry(amps: np.ndarray, q: int, theta) -> None:
    if _scalar(amps, theta):
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        _jit.matrix_1q(amps, q, complex(c), complex(-s), complex(s), complex(c))
        return
    c = _bcast(np.cos(np.asarray(theta) / 2), amps, 2)
    s = _bcast(np.sin(np.asarray(theta) / 2), amps, 2)
    v = _pair_view(amps, q)
    a0 = v[..., 0, :].copy()
    a1 = v[..., 1, :]
    v[..., 0, :] = c * a0 - s * a1
    v[..., 1, :] = s * a0 + c * a1


def apply_rz(amps: np.ndarray, q: int, theta) -> None:
    if _scalar(amps, theta):
        _jit.phase_1q(amps, q, np.exp(-0.5j * theta))
        return
    ph = _bcast(np.exp(-0.5j * np.asarray(theta)), amps, 2)
    v = _pair_view(amps, q)
    v[..., 0, :] *= ph
    v[..., 1, :] *= np.conj(ph)


def apply_rzz(amps: np.ndarray, a: int, b: int, theta) -> None:
    """exp(-i theta/2 Z_a Z_b): phase e^{-i theta/2} on equal bits, conjugate otherwise."""
    if _scalar(amps, theta):
        _jit.phase_zz(amps, a, b, np.exp(-0.5j * theta))
        return
    ph = _bcast(np.exp(-0.5j * np.asarray(theta)), amps, 3)
    view, ax_a, ax_b = _quad_view(amps, a, b)
    for bit_a in (0, 1):
        for bit_b in (0, 1):
            idx = [slice(None)] * view.ndim
            idx[ax_a], idx[ax_b] = bit_a, bit_b
            view[tuple(idx)] *= ph if bit_a == bit_b else np.conj(ph)


def apply_zz(amps: np.ndarray, a: int, b: int) -> None:
    view, ax_a, ax_b = _quad_view(amps, a, b)
    for bit_a, bit_b in ((0, 1), (1, 0)):
        idx = [slice(None)] * view.ndim
        idx[ax_a], idx[ax_b] = bit_a, bit_b
        view[tuple(idx)] *= -1


def apply_cnot(amps: np.ndarray, control: int, target: int) -> None:
    if _scalar(amps):
        _jit.cnot(amps, control, target)
        return
    view, ax_c, ax_t = _quad_view(amps, control, target)
    i0 = [slice(None)] * view.ndim
    i1 = [slice(None)] * view.ndim
    i0[ax_c] = i1[ax_c] = 1
    i0[ax_t], i1[ax_t] = 0, 1
    tmp = view[tuple(i0)].copy()
    view[tuple(i0)] = view[tuple(i1)]
    view[tuple(i1)] = tmp


ROTATIONS = {"RX": apply_rx, "RY": apply_ry, "RZ": apply_rz}


@lru_cache(maxsize=256)
def z_signs(n: int, q: int) -> np.ndarray:
    """+1/-1 eigenvalues of Z_q over the computational basis."""
    idx = np.arange(1 << n)
    out = 1.0 - 2.0 * ((idx >> q) & 1)
    out.setflags(write=False)
    return out


def zz_signs(n: int, a: int, b: int) -> np.ndarray:
    return z_signs(n, a) * z_signs(n, b)


def linear_permutation(n: int, rows: tuple[int, ...]) -> np.ndarray:
    """Index array ``g`` with ``g[j] = M j`` over GF(2), where bit k of ``M j`` is parity(rows[k] & j)."""
    idx = np.arange(1 << n, dtype=np.int64)
    out = np.zeros_like(idx)
    for k, row in enumerate(rows):
        out |= (np.bitwise_count(idx & row) & 1).astype(np.int64) << k
    return out
