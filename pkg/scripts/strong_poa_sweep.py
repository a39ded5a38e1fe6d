"""k-strong PoA on the cooperation gadget for a range of horizons.

The empty profile should stay an equilibrium up to k = T-2, which pins the
k-strong PoA at infinity, and break at k = T-1.
"""

import argparse
import time

from chargegame.equilibria import efficiency_ratios
from chargegame.instances import paper_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--T", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--g", default="1")
    args = ap.parse_args()
    print("T\tk\tequilibria\tOPT\tPoA\tPoS\tseconds")
    for T in args.T:
        inst, prices = paper_instance(f"fig7_strong_poa:{T}")
        for k in range(1, len(inst.agents) + 1):
            start = time.perf_counter()
            rep = efficiency_ratios(inst, prices, args.g, k=k)
            print(f"{T}\t{k}\t{len(rep.equilibria)}\t{rep.opt}\t{rep.poa}\t{rep.pos}\t{time.perf_counter() - start:.1f}", flush=True)


if __name__ == "__main__":
    main()
