"""Exhaustive search of the four-step gadget and a replay of the hand-built deviations."""

import argparse

from chargegame.equilibria import verify_no_ne_construction
from chargegame.report import rational_text, strategy_text


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--g", default="1/2")
    args = ap.parse_args()
    cert = verify_no_ne_construction(args.g)
    print(f"g={cert.granularity} prices={strategy_text(cert.prices)} profiles={cert.profiles}")
    print("witnesses:", ", ".join(f"{k} {v}" for k, v in cert.witness_counts.items()))
    print(f"profiles without an improving deviation: {len(cert.failures)}")
    for prof in cert.failures:
        print("  a", strategy_text(prof[0]), "c", strategy_text(prof[1]))
    print(f"candidates meeting the preconditions: {len(cert.targeted)}")
    for c in cert.targeted:
        devs = "; ".join(
            f"{a}->{strategy_text(s)} formula {rational_text(f)} actual {rational_text(u)}"
            for a, (s, f, u) in c.deviations.items()
        )
        print(
            f"  a {strategy_text(c.profile[0])} c {strategy_text(c.profile[1])} "
            f"u=({rational_text(c.current[0])},{rational_text(c.current[1])}) ineq {c.inequality_holds} | {devs}"
        )
    print("certificate holds:", cert.holds)


if __name__ == "__main__":
    main()
