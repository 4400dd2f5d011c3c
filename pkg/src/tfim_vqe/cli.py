"""Command-line entry point.

Exit status: 0 on success, 2 when a comparison fails, 1 on configuration or
runtime errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .ansatz import AnsatzKind, AnsatzSpec, count_resources, resource_estimate
from .errors import TfimVqeError
from .experiment import (
    OUTPUT_DIR_ENV,
    bundled_reference,
    compare_to_reference,
    frame_potential_report,
    load_config,
    output_directory,
    run_experiment,
)
from .lattice import Lattice, extents_for

log = logging.getLogger("tfim_vqe")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_COMPARE_FAILED = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tfim-vqe", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a field sweep described by a JSON config")
    run.add_argument("config")
    run.add_argument("--output-dir", help=f"overrides ${OUTPUT_DIR_ENV} and the config value")

    cmp_ = sub.add_parser("compare", help="compare a results CSV with a reference CSV")
    cmp_.add_argument("results")
    cmp_.add_argument("reference", help="reference CSV path, or 'bundled' for the shipped 1D N=10 table")
    cmp_.add_argument("--tol-energy", type=float, default=1e-2)
    cmp_.add_argument("--tol-entropy", type=float, default=None, help="also check entropy_single_site")
    cmp_.add_argument("--oracle", action="store_true", help="compare the oracle_* columns instead")

    fp = sub.add_parser("frame-potential", help="frame-potential estimates and overlap histograms")
    fp.add_argument("config")
    fp.add_argument("--output-dir")

    res = sub.add_parser("resources", help="closed-form vs counted parameter, CNOT and depth figures")
    res.add_argument("ansatz", type=AnsatzKind.parse)
    res.add_argument("n_qubits", type=int)
    res.add_argument("layers", type=int)
    res.add_argument("dim", type=int, nargs="?", default=1)
    return parser


def _run(args) -> int:
    config = load_config(args.config)
    records = run_experiment(config, args.output_dir)
    directory = output_directory(config, args.output_dir)
    for r in records:
        flag = " FAILED" if r.failed else ""
        energy = "" if r.energy is None else f"{r.energy:.6f}"
        print(f"h_x={r.h_x:g} energy={energy} restart={r.restart_index}{flag}")
    print(f"wrote {directory / (config.output.name + '.csv')}")
    return EXIT_OK


def _compare(args) -> int:
    reference = bundled_reference() if args.reference == "bundled" else args.reference
    tolerances = {"energy": args.tol_energy}
    if args.tol_entropy is not None:
        tolerances["entropy_single_site"] = args.tol_entropy
    column_map = {"energy": "oracle_energy", "entropy_single_site": "oracle_entropy_single_site"} if args.oracle else None
    report = compare_to_reference(args.results, reference, tolerances, column_map)
    print(report.format())
    return EXIT_OK if report.passed else EXIT_COMPARE_FAILED


def _frame_potential(args) -> int:
    config = load_config(args.config)
    for label, est in frame_potential_report(config, args.output_dir).items():
        print(f"{label}: F_{est.t} = {est.mean:.6f} +- {est.std_error:.6f} ({est.n_samples} pairs)")
    print(f"Haar value 1/2^N = {1 / 2 ** config.build_lattice().n_sites:.6f}")
    return EXIT_OK


def _resources(args) -> int:
    lattice = Lattice(args.dim, extents_for(args.n_qubits, args.dim))
    spec = AnsatzSpec(args.ansatz, args.layers)
    formula = resource_estimate(spec, args.n_qubits, args.dim)
    counted = count_resources(spec.build(lattice))
    print(f"{spec.kind.value} N_Q={args.n_qubits} N_L={args.layers} d={args.dim} extents={lattice.extents}")
    print(f"{'':10s}{'formula':>10s}{'counted':>10s}")
    for name in ("n_params", "n_cnots", "depth"):
        print(f"{name:10s}{getattr(formula, name):>10d}{getattr(counted, name):>10d}")
    return EXIT_OK


COMMANDS = {"run": _run, "compare": _compare, "frame-potential": _frame_potential, "resources": _resources}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (TfimVqeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
