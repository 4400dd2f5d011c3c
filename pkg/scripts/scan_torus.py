"""Oracle entropy curves on the 3x3 torus: single-site and 4|5 block entropy versus h_x.

    python scripts/scan_torus.py [--start 0.5 --stop 6.0 --step 0.25]
"""

import argparse

import numpy as np

from tfim_vqe.lattice import Lattice, TfimParams, build_tfim
from tfim_vqe.observables import entanglement_entropy, spin_correlation
from tfim_vqe.oracle import parity_resolved_ground


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--start", type=float, default=0.5)
    parser.add_argument("--stop", type=float, default=6.0)
    parser.add_argument("--step", type=float, default=0.25)
    args = parser.parse_args()

    lattice = Lattice(2, (3, 3))
    block = [0, 1, 3, 4]
    print("h_x,energy,parity,gap,entropy_single_site,entropy_block")
    for h in np.arange(args.start, args.stop + 1e-9, args.step):
        res = parity_resolved_ground(build_tfim(lattice, TfimParams(h)), lattice.n_sites)
        g = res.ground
        print(
            f"{h:.2f},{g.value:.8f},{res.ground_parity},{res.gap:.3e},"
            f"{entanglement_entropy(g.vector, [0]):.6f},{entanglement_entropy(g.vector, block):.6f}"
        )


if __name__ == "__main__":
    main()
