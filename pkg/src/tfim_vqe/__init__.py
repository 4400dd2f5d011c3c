"""Variational ground-state search for the transverse-field Ising model on dense statevectors."""

__version__ = "0.1.0"

from .ansatz import AnsatzKind, AnsatzSpec, ResourceEstimate, count_resources, resource_estimate
from .circuit import Op, ParametricCircuit, energy_and_gradient, prepare_state, simulate
from .lattice import Lattice, TfimParams, build_lattice, build_tfim, chain
from .oracle import EigenPair, ParityResolvedGround, lowest_eigenpairs, parity_resolved_ground, toy_energy_curve
from .pauli import PauliString, PauliSum
from .statevector import StateVector, apply_gate, expectation, init_basis_state
from .vqe import Method, OptimizerConfig, OptResult, VqeProblem, evaluate_energy, minimize, sweep_field

__all__ = [
    "AnsatzKind",
    "AnsatzSpec",
    "EigenPair",
    "Lattice",
    "Method",
    "Op",
    "OptResult",
    "OptimizerConfig",
    "ParametricCircuit",
    "ParityResolvedGround",
    "PauliString",
    "PauliSum",
    "ResourceEstimate",
    "StateVector",
    "TfimParams",
    "VqeProblem",
    "apply_gate",
    "build_lattice",
    "build_tfim",
    "chain",
    "count_resources",
    "energy_and_gradient",
    "evaluate_energy",
    "expectation",
    "init_basis_state",
    "lowest_eigenpairs",
    "minimize",
    "parity_resolved_ground",
    "prepare_state",
    "resource_estimate",
    "simulate",
    "sweep_field",
    "toy_energy_curve",
]
