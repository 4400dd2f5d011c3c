"""Benchmark quantities of a prepared state or of an ansatz ensemble."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .circuit import ParametricCircuit, simulate
from .errors import ContractError, UndefinedVarianceError
from .pauli import PauliSum
from .statevector import (
    DEFAULT_DENSITY_CAP,
    StateVector,
    reduced_density,
    schmidt_spectrum,
    von_neumann_bits,
)

VARIANCE_FLOOR = 1e-9


class EntropyMethod(str, Enum):
    PARTIAL_TRACE = "PARTIAL_TRACE"
    SCHMIDT = "SCHMIDT"


@dataclass(frozen=True)
class ObservableReport:
    energy: float
    energy_per_site: float
    variance: float
    magnetization: float
    abs_magnetization: float
    spin_correlation: float
    entropy_single_site: float
    entropy_half: float


@dataclass(frozen=True)
class FramePotentialEstimate:
    t: int
    mean: float
    std_error: float
    n_samples: int
    seed: int
    overlaps: np.ndarray = field(repr=False, compare=False)


def energy_variance(state: StateVector, h: PauliSum, floor: float = VARIANCE_FLOOR) -> float:
    """Relative variance (<H^2> - <H>^2) / <H>^2, with <H^2> = ||H psi||^2."""
    h_psi = h.compiled(state.n_qubits).apply(state.amplitudes)
    mean = float(np.vdot(state.amplitudes, h_psi).real)
    if abs(mean) <= floor:
        raise UndefinedVarianceError(f"|<H>| = {abs(mean):.3e} is below the floor {floor:.1e}")
    second = float(np.vdot(h_psi, h_psi).real)
    return (second - mean * mean) / (mean * mean)


def z_expectations(state: StateVector) -> np.ndarray:
    n = state.n_qubits
    probs = state.probabilities()
    return np.array([probs @ kernels.z_signs(n, q) for q in range(n)])


def magnetization(state: StateVector) -> tuple[float, float]:
    """Mean z magnetization per site and its absolute value."""
    m = float(z_expectations(state).mean())
    return m, abs(m)


def spin_correlation(state: StateVector, n_sites: int | None = None) -> float:
    """Average of <Z_i Z_{i+N/2}> over the N/2 antipodal pairs of linearized sites."""
    n = state.n_qubits if n_sites is None else n_sites
    if n != state.n_qubits:
        raise ContractError(f"state has {state.n_qubits} qubits, expected {n}")
    if n % 2:
        raise ContractError(f"spin correlation needs an even number of sites, got {n}")
    probs = state.probabilities()
    half = n // 2
    return float(sum(probs @ kernels.zz_signs(n, i, i + half) for i in range(half)) / half)


def entanglement_entropy(
    state: StateVector,
    partition_a,
    method: EntropyMethod | str = EntropyMethod.PARTIAL_TRACE,
    cap: int = DEFAULT_DENSITY_CAP,
) -> float:
    """Von Neumann entropy in bits of the ``partition_a`` | rest bipartition."""
    method = EntropyMethod(method)
    part = sorted(set(int(q) for q in partition_a))
    if not part or len(part) >= state.n_qubits:
        raise ContractError(f"partition {part} is not a proper non-empty subset")
    if method is EntropyMethod.SCHMIDT:
        return von_neumann_bits(schmidt_spectrum(state, part) ** 2)
    rho = reduced_density(state, part, cap)
    return von_neumann_bits(np.clip(np.linalg.eigvalsh(rho), 0.0, None))


def single_site_entropy(state: StateVector, site: int = 0) -> float:
    return entanglement_entropy(state, [site])


def half_entropy(state: StateVector) -> float:
    """Entropy of the first floor(N/2) linearized sites (Schmidt route, no size cap)."""
    return entanglement_entropy(state, range(state.n_qubits // 2), EntropyMethod.SCHMIDT)


def observable_report(state: StateVector, h: PauliSum) -> ObservableReport:
    """All per-state observables; quantities undefined for this state are NaN."""
    n = state.n_qubits
    energy = float(np.vdot(state.amplitudes, h.compiled(n).apply(state.amplitudes)).real)
    try:
        variance = energy_variance(state, h)
    except UndefinedVarianceError:
        variance = float("nan")
    m, m_abs = magnetization(state)
    corr = spin_correlation(state) if n % 2 == 0 else float("nan")
    return ObservableReport(
        energy=energy,
        energy_per_site=energy / n,
        variance=variance,
        magnetization=m,
        abs_magnetization=m_abs,
        spin_correlation=corr,
        entropy_single_site=single_site_entropy(state) if n > 1 else 0.0,
        entropy_half=half_entropy(state) if n > 1 else 0.0,
    )


# --------------------------------------------------------------------------
# frame potential


def _estimate(overlaps: np.ndarray, t: int, seed: int) -> FramePotentialEstimate:
    values = overlaps ** t
    n = len(values)
    return FramePotentialEstimate(
        t=t,
        mean=float(values.mean()),
        std_error=float(values.std(ddof=1) / np.sqrt(n)),
        n_samples=n,
        seed=seed,
        overlaps=overlaps,
    )


def sample_angles(n_params: int, n_samples: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Two parameter sets per pair, uniform on [0, 2 pi); pair ``i`` uses stream (seed, i)."""
    first = np.empty((n_samples, n_params))
    second = np.empty((n_samples, n_params))
    for i in range(n_samples):
        draws = np.random.default_rng([seed, i]).uniform(0.0, 2 * np.pi, size=(2, n_params))
        first[i], second[i] = draws
    return first, second


def frame_potential(
    circuit: ParametricCircuit,
    initial=0,
    t: int = 1,
    n_samples: int = 10_000,
    seed: int = 0,
    batch_size: int = 1024,
) -> FramePotentialEstimate:
    """Mean of |<psi(a)|psi(b)>|^(2t) over random parameter pairs (a, b).

    ``overlaps`` on the result holds the raw |<psi|phi>|^2 values.
    """
    if t < 1:
        raise ContractError(f"t must be >= 1, got {t}")
    if n_samples < 2:
        raise ContractError(f"need at least 2 samples, got {n_samples}")
    first, second = sample_angles(circuit.n_params, n_samples, seed)
    overlaps = np.empty(n_samples)
    for lo in range(0, n_samples, batch_size):
        hi = min(lo + batch_size, n_samples)
        psi = simulate(circuit, first[lo:hi], initial)
        phi = simulate(circuit, second[lo:hi], initial)
        overlaps[lo:hi] = np.abs(np.einsum("bj,bj->b", psi.conj(), phi)) ** 2
    return _estimate(np.clip(overlaps, 0.0, 1.0), t, seed)


def haar_frame_potential(n_qubits: int, t: int = 1, n_samples: int = 10_000, seed: int = 0) -> FramePotentialEstimate:
    """Same estimator on Haar-random state pairs; the exact value is 1 / C(d + t - 1, t)."""
    if n_samples < 2:
        raise ContractError(f"need at least 2 samples, got {n_samples}")
    dim = 1 << n_qubits
    rng = np.random.default_rng(seed)
    overlaps = np.empty(n_samples)
    for lo in range(0, n_samples, 1024):
        hi = min(lo + 1024, n_samples)
        v = rng.normal(size=(2, hi - lo, dim)) + 1j * rng.normal(size=(2, hi - lo, dim))
        v /= np.linalg.norm(v, axis=-1, keepdims=True)
        overlaps[lo:hi] = np.abs(np.einsum("bj,bj->b", v[0].conj(), v[1])) ** 2
    return _estimate(np.clip(overlaps, 0.0, 1.0), t, seed)
