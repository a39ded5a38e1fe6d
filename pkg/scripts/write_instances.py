"""Write every built-in figure instance to instances/<name>.json."""

import argparse
from pathlib import Path

from chargegame.instances import paper_instance, save_instance

FIGURES = {
    "fig1_structure": "fig1_structure",
    "fig2_flow_example": "fig2_flow_example",
    "fig3_t2poa": "fig3_t2poa",
    "fig4_no_ne": "fig4_no_ne",
    "fig5_asc_pos_T4": "fig5_asc_pos:4",
    "fig6_supply_sign_q1_r1": "fig6_supply_sign:1,1",
    "fig7_strong_poa_T4": "fig7_strong_poa:4",
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dir", default=str(Path(__file__).resolve().parent.parent / "instances"))
    args = ap.parse_args()
    out = Path(args.dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, ident in FIGURES.items():
        path = out / f"{name}.json"
        path.write_text(save_instance(paper_instance(ident)[0]))
        print(path)


if __name__ == "__main__":
    main()
