"""Admissibility verdicts for the four flow-example profiles, plus DOT drawings."""

import argparse
from pathlib import Path

from chargegame import flow as fl
from chargegame.game import admissibility, utilities, welfare
from chargegame.instances import paper_instance
from chargegame.model import TRANSACTION, apply_strategy, build_expanded_graph
from chargegame.report import export_dot, rational_text
from chargegame.verify import FIG2_PROFILES


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dot-dir", help="also write fig2<label>.dot files here")
    args = ap.parse_args()
    inst, prices = paper_instance("fig2_flow_example")
    graph = build_expanded_graph(inst)
    for label, prof in FIG2_PROFILES.items():
        verdict = admissibility(inst, prof)
        u = utilities(inst, prof, prices)
        cells = " ".join(f"{a}:{'ok' if verdict.agents[a] else 'inadmissible'}/{rational_text(u[a])}" for a in inst.agent_ids)
        print(f"({label}) welfare {welfare(inst, prof)}  {cells}")
        if args.dot_dir:
            gs = apply_strategy(graph, prof)
            flow, _ = fl.max_flow(gs)
            tx = [e.index for e in gs.edges if e.kind in TRANSACTION and e.capacity > 0]
            Path(args.dot_dir).mkdir(parents=True, exist_ok=True)
            (Path(args.dot_dir) / f"fig2{label}.dot").write_text(export_dot(gs, flow, fl.saturation_verdicts(gs, flow, tx)))


if __name__ == "__main__":
    main()
