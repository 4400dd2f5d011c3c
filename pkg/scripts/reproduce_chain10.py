"""Run the 10-site chain sweep and compare energies and entropies with the bundled reference table.

    python scripts/reproduce_chain10.py [config] [--output-dir DIR]
"""

import argparse
import sys

from tfim_vqe.experiment import bundled_reference, compare_to_reference, load_config, run_experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("config", nargs="?", default="configs/chain10_hva.json")
    parser.add_argument("--output-dir")
    args = parser.parse_args()

    records = run_experiment(load_config(args.config), args.output_dir)
    reference = bundled_reference()
    vqe = compare_to_reference(records, reference, {"energy": 1e-2})
    oracle = compare_to_reference(
        records, reference, {"energy": 1e-4}, {"energy": "oracle_energy"}
    )
    print("VQE energies vs reference (tol 1e-2)")
    print(vqe.format())
    print("\noracle energies vs reference (tol 1e-4)")
    print(oracle.format())
    return 0 if vqe.passed and oracle.passed else 2


if __name__ == "__main__":
    sys.exit(main())
