"""Compiled stride-loop kernels for single (unbatched) statevectors.

Each loop visits the 2**(n-1) index pairs that differ in the target bit:
``base`` walks blocks of ``2 * stride`` and ``j`` the lower half of a block.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def matrix_1q(amps, q, u00, u01, u10, u11):
    stride = 1 << q
    dim = amps.shape[0]
    for base in range(0, dim, 2 * stride):
        for j in range(base, base + stride):
            a0 = amps[j]
            a1 = amps[j + stride]
            amps[j] = u00 * a0 + u01 * a1
            amps[j + stride] = u10 * a0 + u11 * a1


@njit(cache=True)
def phase_1q(amps, q, ph):
    """Multiply bit-0 amplitudes by ``ph`` and bit-1 amplitudes by its conjugate."""
    stride = 1 << q
    dim = amps.shape[0]
    phc = np.conj(ph)
    for base in range(0, dim, 2 * stride):
        for j in range(base, base + stride):
            amps[j] *= ph
            amps[j + stride] *= phc


@njit(cache=True)
def phase_zz(amps, a, b, ph):
    phc = np.conj(ph)
    for j in range(amps.shape[0]):
        if ((j >> a) ^ (j >> b)) & 1:
            amps[j] *= phc
        else:
            amps[j] *= ph


@njit(cache=True)
def cnot(amps, control, target):
    cmask = 1 << control
    tmask = 1 << target
    for j in range(amps.shape[0]):
        if (j & cmask) and not (j & tmask):
            k = j | tmask
            tmp = amps[j]
            amps[j] = amps[k]
            amps[k] = tmp


@njit(cache=True)
def im_pauli_overlap(lam, psi, q, label):
    """Im <lam| P_q |psi> for P in {X=0, Y=1, Z=2}."""
    stride = 1 << q
    dim = psi.shape[0]
    total = 0.0
    for base in range(0, dim, 2 * stride):
        for j in range(base, base + stride):
            k = j + stride
            l0 = np.conj(lam[j])
            l1 = np.conj(lam[k])
            if label == 0:
                v = l0 * psi[k] + l1 * psi[j]
            elif label == 1:
                v = -1j * l0 * psi[k] + 1j * l1 * psi[j]
            else:
                v = l0 * psi[j] - l1 * psi[k]
            total += v.imag
    return total


@njit(cache=True)
def rotation_layer(amps, qubits, label, angles):
    """Same-axis rotations (X=0, Y=1) on the listed qubits, applied in order."""
    dim = amps.shape[0]
    for i in range(qubits.shape[0]):
        stride = 1 << qubits[i]
        c = np.cos(0.5 * angles[i])
        s = np.sin(0.5 * angles[i])
        for base in range(0, dim, 2 * stride):
            for j in range(base, base + stride):
                a0 = amps[j]
                a1 = amps[j + stride]
                if label == 0:
                    amps[j] = c * a0 - 1j * s * a1
                    amps[j + stride] = c * a1 - 1j * s * a0
                else:
                    amps[j] = c * a0 - s * a1
                    amps[j + stride] = s * a0 + c * a1


@njit(cache=True)
def im_pauli_overlaps(lam, psi, qubits, label):
    out = np.empty(qubits.shape[0])
    for i in range(qubits.shape[0]):
        out[i] = im_pauli_overlap(lam, psi, qubits[i], label)
    return out


@njit(cache=True)
def diagonal_phase(amps, qa, qb, angles, sign):
    """Multiply by exp(-i sign/2 sum_k angles[k] s_k(j)), s_k the Z (qb < 0) or ZZ eigenvalue."""
    m = qa.shape[0]
    ph = np.exp(-0.5j * sign * angles)
    phc = np.conj(ph)
    for j in range(amps.shape[0]):
        acc = 1.0 + 0.0j
        for k in range(m):
            bit = (j >> qa[k]) & 1
            if qb[k] >= 0:
                bit ^= (j >> qb[k]) & 1
            acc *= phc[k] if bit else ph[k]
        amps[j] *= acc


@njit(cache=True)
def signed_sums(w, qa, qb):
    out = np.zeros(qa.shape[0])
    for j in range(w.shape[0]):
        for k in range(qa.shape[0]):
            bit = (j >> qa[k]) & 1
            if qb[k] >= 0:
                bit ^= (j >> qb[k]) & 1
            if bit:
                out[k] -= w[j]
            else:
                out[k] += w[j]
    return out
