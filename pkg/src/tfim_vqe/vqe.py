"""Energy minimization over circuit parameters: restarts and field sweeps."""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np
import scipy.optimize

from .ansatz import AnsatzKind, AnsatzSpec
from .circuit import ParametricCircuit, energy_and_gradient, simulate
from .errors import ContractError, DomainError, OptimizationError
from .lattice import Lattice, TfimParams, build_tfim
from .pauli import PauliSum
from .statevector import StateVector

LAYER_PRESETS = (4, 8, 10, 15)


class Method(str, Enum):
    QUASI_NEWTON = "QUASI_NEWTON"
    DERIVATIVE_FREE = "DERIVATIVE_FREE"


@dataclass(frozen=True)
class OptimizerConfig:
    method: Method = Method.QUASI_NEWTON
    max_iterations: int = 1000
    gradient_tolerance: float = 1e-8
    simplex_tolerance: float = 1e-8
    history_size: int = 10
    n_restarts: int = 5
    init_scale: float = 0.1
    seed: int = 0
    # starting trust radius of the derivative-free method
    initial_step: float = 0.5

    def __post_init__(self):
        try:
            object.__setattr__(self, "method", Method(self.method))
        except ValueError:
            raise DomainError(f"unknown optimizer method {self.method!r}") from None
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        if self.n_restarts < 1:
            raise DomainError("n_restarts must be >= 1")
        if self.history_size < 1:
            raise DomainError("history_size must be >= 1")
        for name in ("gradient_tolerance", "simplex_tolerance", "initial_step"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        if not self.init_scale >= 0:
            raise DomainError("init_scale must be >= 0")

    @classmethod
    def for_ansatz(cls, kind, **overrides) -> "OptimizerConfig":
        """Defaults by family: HEA uses quasi-Newton from wide starts, HVA kinds derivative-free from narrow ones."""
        kind = AnsatzKind.parse(kind)
        if kind is AnsatzKind.HEA:
            base = dict(method=Method.QUASI_NEWTON, init_scale=math.pi)
        else:
            base = dict(method=Method.DERIVATIVE_FREE, init_scale=0.1)
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class VqeProblem:
    hamiltonian: PauliSum
    circuit: ParametricCircuit
    initial_state: int | StateVector = 0

    def __post_init__(self):
        if self.hamiltonian.min_qubits > self.circuit.n_qubits:
            raise ContractError(
                f"Hamiltonian acts on {self.hamiltonian.min_qubits} qubits, circuit has {self.circuit.n_qubits}"
            )

    @property
    def n_params(self) -> int:
        return self.circuit.n_params

    def energy(self, params) -> float:
        params = self._check(params)
        psi = simulate(self.circuit, params, self.initial_state)
        return float(self.hamiltonian.compiled(self.circuit.n_qubits).expectation_raw(psi).real)

    def energy_and_gradient(self, params) -> tuple[float, np.ndarray]:
        return energy_and_gradient(self.circuit, self._check(params), self.hamiltonian, self.initial_state)

    def state(self, params) -> StateVector:
        return StateVector(simulate(self.circuit, self._check(params), self.initial_state))

    def _check(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise ContractError(f"expected {self.n_params} parameters, got shape {params.shape}")
        return params


@dataclass
class OptResult:
    best_params: np.ndarray
    best_energy: float
    energy_trace: list[float] = field(default_factory=list)
    n_iterations: int = 0
    n_evaluations: int = 0
    converged: bool = False
    # -1 marks the warm-start candidate
    restart_index: int = 0
    failed: bool = False
    message: str = ""
    n_failed_restarts: int = 0


class _NonFinite(ArithmeticError):
    pass


def evaluate_energy(problem: VqeProblem, params) -> float:
    return problem.energy(params)


# --------------------------------------------------------------------------
# quasi-Newton


def lbfgs(
    fun_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: np.ndarray,
    max_iterations: int,
    gradient_tolerance: float,
    history_size: int = 10,
    c1: float = 1e-4,
    shrink: float = 0.5,
    max_backtracks: int = 40,
    stall_iterations: int = 5,
) -> OptResult:
    """Limited-memory BFGS with a backtracking Armijo line search.

    Stops with ``converged=True`` once the gradient infinity-norm drops below
    ``gradient_tolerance``. It also stops, unconverged, when the line search
    fails from a steepest-descent direction or when ``stall_iterations``
    consecutive steps change the energy by less than round-off. The trace
    holds the energy after every accepted step, so it never increases.
    """
    x = np.array(x0, dtype=float)
    f, g = fun_grad(x)
    n_eval = 1
    trace = [f]
    memory: deque[tuple[np.ndarray, np.ndarray, float]] = deque(maxlen=history_size)
    converged = False
    message = "iteration cap reached"
    it = stalled = 0
    while True:
        if np.max(np.abs(g), initial=0.0) < gradient_tolerance:
            converged, message = True, "gradient tolerance reached"
            break
        if it >= max_iterations:
            break
        d = -_two_loop(g, memory)
        slope = float(g @ d)
        if not slope < 0:
            memory.clear()
            d, slope = -g, -float(g @ g)
        # first step of a fresh memory is scaled so it moves at most ~1 radian
        step = 1.0 if memory else min(1.0, 1.0 / np.max(np.abs(g)))
        accepted = False
        for _ in range(max_backtracks):
            x_new = x + step * d
            f_new, g_new = fun_grad(x_new)
            n_eval += 1
            if f_new <= f + c1 * step * slope:
                accepted = True
                break
            step *= shrink
        if not accepted:
            if memory:
                memory.clear()
                continue
            message = "line search failed"
            break
        s, y = x_new - x, g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            memory.append((s, y, 1.0 / sy))
        stalled = stalled + 1 if f - f_new <= 4 * np.finfo(float).eps * max(1.0, abs(f)) else 0
        x, f, g = x_new, f_new, g_new
        trace.append(f)
        it += 1
        if stalled >= stall_iterations:
            message = "energy stalled at round-off"
            break
    return OptResult(x, f, trace, it, n_eval, converged, message=message)


def _two_loop(g: np.ndarray, memory) -> np.ndarray:
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(memory):
        a = rho * (s @ q)
        q -= a * y
        alphas.append(a)
    if memory:
        s, y, _ = memory[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(memory, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return q


# --------------------------------------------------------------------------
# derivative-free


def derivative_free(
    fun: Callable[[np.ndarray], float],
    x0: np.ndarray,
    max_iterations: int,
    tolerance: float,
    initial_step: float = 0.5,
) -> OptResult:
    """Linear-approximation trust-region search (scipy's COBYLA); no gradients.

    ``max_iterations`` caps function evaluations. The trace records every new
    best value, so it is non-increasing.
    """
    best = {"f": math.inf, "x": np.array(x0, dtype=float)}
    trace: list[float] = []
    count = [0]

    def wrapped(x):
        f = fun(x)
        count[0] += 1
        if f < best["f"]:
            best["f"], best["x"] = f, np.array(x)
            trace.append(f)
        return f

    res = scipy.optimize.minimize(
        wrapped,
        np.array(x0, dtype=float),
        method="COBYLA",
        tol=tolerance,
        options={"maxiter": max_iterations, "rhobeg": initial_step},
    )
    return OptResult(
        best["x"],
        best["f"],
        trace,
        n_iterations=int(getattr(res, "nit", count[0]) or count[0]),
        n_evaluations=count[0],
        converged=bool(res.success),
        message=str(res.message),
    )


# --------------------------------------------------------------------------
# restarts


def _single_run(problem: VqeProblem, config: OptimizerConfig, x0: np.ndarray) -> OptResult:
    if config.method is Method.QUASI_NEWTON:

        def fun_grad(x):
            f, g = problem.energy_and_gradient(x)
            if not (np.isfinite(f) and np.all(np.isfinite(g))):
                raise _NonFinite("non-finite energy or gradient")
            return f, g

        return lbfgs(fun_grad, x0, config.max_iterations, config.gradient_tolerance, config.history_size)

    def fun(x):
        f = problem.energy(x)
        if not np.isfinite(f):
            raise _NonFinite("non-finite energy")
        return f

    return derivative_free(fun, x0, config.max_iterations, config.simplex_tolerance, config.initial_step)


def initial_points(n_params: int, config: OptimizerConfig, stream: Sequence[int] = ()) -> list[np.ndarray]:
    """Uniform draws in [-init_scale, init_scale]; restart ``r`` uses stream (seed, *stream, r)."""
    return [
        np.random.default_rng([config.seed, *stream, r]).uniform(-config.init_scale, config.init_scale, n_params)
        for r in range(config.n_restarts)
    ]


def minimize(
    problem: VqeProblem,
    config: OptimizerConfig,
    warm_start: np.ndarray | None = None,
    stream: Sequence[int] = (),
) -> OptResult:
    """Lowest-energy result over seeded random restarts (plus an optional warm start).

    A restart that meets a non-finite energy is recorded as failed; if every
    candidate fails an ``OptimizationError`` is raised.
    """
    starts = [(r, x0) for r, x0 in enumerate(initial_points(problem.n_params, config, stream))]
    if warm_start is not None:
        warm = np.asarray(warm_start, dtype=float)
        if warm.shape != (problem.n_params,):
            raise ContractError(f"warm start has shape {warm.shape}, expected ({problem.n_params},)")
        starts.insert(0, (-1, warm))
    best: OptResult | None = None
    failures = []
    for index, x0 in starts:
        try:
            result = _single_run(problem, config, x0)
        except _NonFinite as exc:
            failures.append(f"restart {index}: {exc}")
            continue
        result.restart_index = index
        if best is None or result.best_energy < best.best_energy:
            best = result
    if best is None:
        raise OptimizationError("all restarts failed: " + "; ".join(failures))
    best.n_failed_restarts = len(failures)
    return best


# --------------------------------------------------------------------------
# field sweeps


def failed_result(n_params: int, message: str) -> OptResult:
    return OptResult(np.full(n_params, np.nan), float("nan"), failed=True, message=message)


def sweep_field(
    lattice: Lattice,
    spec: AnsatzSpec,
    field_grid: Sequence[float],
    config: OptimizerConfig,
    *,
    j_z: float = -1.0,
    dedupe: bool = False,
    mode: str = "warm",
    workers: int | None = None,
) -> list[OptResult]:
    """Optimize at every field value of a monotone grid.

    In ``"warm"`` mode each point after the first also starts from the previous
    point's best parameters. ``"cold_parallel"`` drops warm starts and runs the
    points concurrently. A point whose restarts all fail is returned with
    ``failed=True`` and the sweep carries on.
    """
    grid = [float(h) for h in field_grid]
    if not grid:
        raise ContractError("field grid is empty")
    diffs = np.diff(grid)
    if len(grid) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ContractError("field grid must be strictly monotone")
    circuit = spec.build(lattice, dedupe)

    def problem_at(h):
        return VqeProblem(build_tfim(lattice, TfimParams(h, j_z), dedupe), circuit)

    def run_point(i, warm):
        try:
            return minimize(problem_at(grid[i]), config, warm, stream=(i,))
        except OptimizationError as exc:
            return failed_result(circuit.n_params, str(exc))

    if mode == "cold_parallel":
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda i: run_point(i, None), range(len(grid))))
    if mode != "warm":
        raise ContractError(f"unknown sweep mode {mode!r}")
    results: list[OptResult] = []
    warm = None
    for i in range(len(grid)):
        result = run_point(i, warm)
        results.append(result)
        if not result.failed:
            warm = result.best_params
    return results


def with_method(config: OptimizerConfig, method: Method | str) -> OptimizerConfig:
    return replace(config, method=Method(method))
