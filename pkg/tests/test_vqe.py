import numpy as np
import pytest

from tfim_vqe.ansatz import AnsatzSpec, build_hea, build_hva
from tfim_vqe.circuit import Op, ParametricCircuit
from tfim_vqe.errors import ContractError, DomainError, OptimizationError
from tfim_vqe.lattice import TfimParams, build_tfim, chain
from tfim_vqe.oracle import lowest_eigenpairs, toy_circuit, toy_hamiltonian
from tfim_vqe.pauli import identity
from tfim_vqe.vqe import (
    LAYER_PRESETS,
    Method,
    OptimizerConfig,
    VqeProblem,
    derivative_free,
    evaluate_energy,
    initial_points,
    lbfgs,
    minimize,
    sweep_field,
)

QN = OptimizerConfig(method="QUASI_NEWTON")
DF = OptimizerConfig(method="DERIVATIVE_FREE")


def toy_problem(ansatz_id=2):
    return VqeProblem(toy_hamiltonian(), toy_circuit(ansatz_id))


def test_config_validation_and_defaults():
    with pytest.raises(DomainError):
        OptimizerConfig(method="ADAM")
    with pytest.raises(DomainError):
        OptimizerConfig(n_restarts=0)
    with pytest.raises(DomainError):
        OptimizerConfig(init_scale=-1.0)
    assert OptimizerConfig.for_ansatz("HEA").method is Method.QUASI_NEWTON
    assert OptimizerConfig.for_ansatz("HEA").init_scale == pytest.approx(np.pi)
    hva = OptimizerConfig.for_ansatz("HVA_SB", n_restarts=2)
    assert (hva.method, hva.init_scale, hva.n_restarts) == (Method.DERIVATIVE_FREE, 0.1, 2)
    assert LAYER_PRESETS == (4, 8, 10, 15)


def test_evaluate_energy_examples():
    assert evaluate_energy(toy_problem(2), [-np.pi / 2]) == pytest.approx(-1.0)
    for theta in np.linspace(-3, 3, 7):
        assert evaluate_energy(toy_problem(1), [theta]) == pytest.approx(0.0, abs=1e-15)
    lat = chain(10)
    problem = VqeProblem(build_tfim(lat, TfimParams(0.5)), build_hva(lat, 10))
    assert evaluate_energy(problem, np.zeros(20)) == pytest.approx(-5.0)
    with pytest.raises(ContractError):
        evaluate_energy(problem, np.zeros(3))


@pytest.mark.parametrize("config", [QN, DF], ids=["quasi-newton", "derivative-free"])
def test_toy_minimum_from_every_restart(config):
    problem = toy_problem(2)
    result = minimize(problem, config)
    assert result.best_energy == pytest.approx(-1.0, abs=1e-8)
    assert np.cos(result.best_params[0] + np.pi / 2) == pytest.approx(1.0, abs=1e-6)
    wide = OptimizerConfig(method=config.method, init_scale=3.0)
    for x0 in initial_points(1, config) + initial_points(1, wide):
        if config.method is Method.QUASI_NEWTON:
            run = lbfgs(problem.energy_and_gradient, x0, config.max_iterations, config.gradient_tolerance)
        else:
            run = derivative_free(problem.energy, x0, config.max_iterations, config.simplex_tolerance)
        assert run.best_energy == pytest.approx(-1.0, abs=1e-6)


def test_constant_hamiltonian_converges_immediately():
    problem = VqeProblem(identity(2.5), build_hea(2, 1))
    result = minimize(problem, QN)
    assert result.best_energy == pytest.approx(2.5)
    assert result.converged and result.n_iterations <= 2


def test_converged_flag_tracks_the_stopping_rule():
    quad = lambda x: (float(x @ x), 2 * x)  # noqa: E731
    done = lbfgs(quad, np.array([1.0, -2.0]), 100, 1e-8)
    assert done.converged and done.message == "gradient tolerance reached"
    capped = lbfgs(lambda x: (float(np.sum(x**4)), 4 * x**3), np.array([3.0, 1.0]), 2, 1e-12)
    assert not capped.converged and capped.n_iterations == 2


def test_quasi_newton_trace_never_increases():
    lat = chain(6)
    problem = VqeProblem(build_tfim(lat, TfimParams(0.9)), build_hva(lat, 4))
    result = minimize(problem, QN)
    assert np.all(np.diff(result.energy_trace) <= 0)
    assert result.energy_trace[-1] == result.best_energy


def test_seeded_determinism():
    lat = chain(4)
    problem = VqeProblem(build_tfim(lat, TfimParams(1.2)), build_hea(4, 1))
    cfg = OptimizerConfig(method="QUASI_NEWTON", n_restarts=2, seed=9, init_scale=np.pi)
    a, b = minimize(problem, cfg), minimize(problem, cfg)
    np.testing.assert_array_equal(a.best_params, b.best_params)
    assert a.energy_trace == b.energy_trace and a.restart_index == b.restart_index
    other = minimize(problem, OptimizerConfig(method="QUASI_NEWTON", n_restarts=2, seed=10, init_scale=np.pi))
    assert not np.array_equal(other.best_params, a.best_params)


@pytest.mark.parametrize("h_x", [0.3, 1.0, 1.6])
@pytest.mark.parametrize("kind", ["HEA", "HVA", "HVA_SB"])
def test_variational_bound(kind, h_x):
    lat = chain(6)
    h = build_tfim(lat, TfimParams(h_x))
    problem = VqeProblem(h, AnsatzSpec(kind, 2).build(lat))
    cfg = OptimizerConfig.for_ansatz(kind, n_restarts=2, max_iterations=200)
    result = minimize(problem, cfg)
    assert result.best_energy >= lowest_eigenpairs(h, 6)[0].value - 1e-9


def test_hva_reaches_ground_energy_at_unit_field():
    lat = chain(10)
    h = build_tfim(lat, TfimParams(1.0))
    result = minimize(VqeProblem(h, build_hva(lat, 10)), OptimizerConfig(method="QUASI_NEWTON", n_restarts=2))
    assert result.best_energy == pytest.approx(-12.78491, abs=1e-2)


class FlakyProblem(VqeProblem):
    """Returns NaN whenever the first parameter is positive."""

    def energy(self, params):
        return float("nan") if params[0] > 0 else super().energy(params)

    def energy_and_gradient(self, params):
        if params[0] > 0:
            return float("nan"), np.zeros_like(params)
        return super().energy_and_gradient(params)


class AlwaysNan(VqeProblem):
    def energy(self, params):
        return float("nan")

    def energy_and_gradient(self, params):
        return float("nan"), np.zeros_like(params)


def test_non_finite_restarts_are_recorded():
    problem = FlakyProblem(toy_hamiltonian(), toy_circuit(2))
    result = minimize(problem, OptimizerConfig(method="QUASI_NEWTON", n_restarts=6, init_scale=1.0))
    assert 0 < result.n_failed_restarts < 6
    assert result.best_energy == pytest.approx(-1.0, abs=1e-8)
    always = AlwaysNan(toy_hamiltonian(), toy_circuit(2))
    with pytest.raises(OptimizationError):
        minimize(always, OptimizerConfig(n_restarts=2), warm_start=[0.5])


def test_warm_start_shape_is_checked():
    with pytest.raises(ContractError):
        minimize(toy_problem(), QN, warm_start=[0.0, 1.0])


def test_single_point_sweep_is_one_minimize_call():
    lat = chain(4)
    spec = AnsatzSpec("HVA", 2)
    cfg = OptimizerConfig(method="QUASI_NEWTON", n_restarts=2)
    [swept] = sweep_field(lat, spec, [0.7], cfg)
    direct = minimize(VqeProblem(build_tfim(lat, TfimParams(0.7)), spec.build(lat)), cfg, stream=(0,))
    np.testing.assert_array_equal(swept.best_params, direct.best_params)


def test_sweep_grid_checks():
    lat = chain(4)
    with pytest.raises(ContractError):
        sweep_field(lat, AnsatzSpec("HVA", 1), [], QN)
    with pytest.raises(ContractError):
        sweep_field(lat, AnsatzSpec("HVA", 1), [0.1, 0.3, 0.2], QN)
    with pytest.raises(ContractError):
        sweep_field(lat, AnsatzSpec("HVA", 1), [0.1], QN, mode="sideways")


def test_failed_points_do_not_abort_the_sweep(monkeypatch):
    from tfim_vqe import vqe

    real = vqe.minimize

    def flaky(problem, config, warm_start=None, stream=()):
        if stream == (1,):
            raise OptimizationError("forced")
        return real(problem, config, warm_start, stream)

    monkeypatch.setattr(vqe, "minimize", flaky)
    results = sweep_field(chain(4), AnsatzSpec("HVA", 2), [0.2, 0.4, 0.6], OptimizerConfig(method="QUASI_NEWTON", n_restarts=1))
    assert [r.failed for r in results] == [False, True, False]
    assert np.isnan(results[1].best_energy)


def test_reversed_sweep_agrees_with_forward_sweep():
    lat = chain(6)
    spec = AnsatzSpec("HVA", 6)
    cfg = OptimizerConfig(method="QUASI_NEWTON", n_restarts=2)
    grid = [0.5, 0.75, 1.0, 1.25, 1.5]
    forward = [r.best_energy for r in sweep_field(lat, spec, grid, cfg)]
    backward = [r.best_energy for r in sweep_field(lat, spec, grid[::-1], cfg)][::-1]
    np.testing.assert_allclose(forward, backward, atol=1e-2)


def test_cold_parallel_sweep_matches_independent_runs():
    lat = chain(4)
    spec = AnsatzSpec("HVA", 2)
    cfg = OptimizerConfig(method="QUASI_NEWTON", n_restarts=2)
    grid = [0.3, 0.9, 1.5]
    parallel = sweep_field(lat, spec, grid, cfg, mode="cold_parallel", workers=3)
    for i, (h, res) in enumerate(zip(grid, parallel)):
        alone = minimize(VqeProblem(build_tfim(lat, TfimParams(h)), spec.build(lat)), cfg, stream=(i,))
        np.testing.assert_array_equal(res.best_params, alone.best_params)
        assert res.restart_index >= 0


def test_problem_checks_register_size():
    with pytest.raises(ContractError):
        VqeProblem(build_tfim(chain(4), TfimParams(1.0)), ParametricCircuit(3, (Op("RX", (0,), 0),)))
