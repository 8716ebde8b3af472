"""Remove generators from the coprime-case resolution and see whether the master equation still extends."""

from __future__ import annotations

import argparse
import itertools
from dataclasses import dataclass

from bvtate.cme import NotLiftable, extend_action
from bvtate.tate import build_extended_space, build_resolution, drop_generators
from bvtate.u2 import SAMPLE_G, build_u2


@dataclass
class AblationConfig:
    case: int = 2
    max_drop: int = 1


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--case", type=int, default=2, choices=(2, 3))
    parser.add_argument("--max-drop", type=int, default=1)
    args = parser.parse_args()
    cfg = AblationConfig(args.case, args.max_drop)
    state = build_resolution(build_u2(SAMPLE_G[cfg.case]).S0)
    names = [g.name for g in state.generators if g.depth > 1]
    for k in range(1, cfg.max_drop + 1):
        for drop in itertools.combinations(names, k):
            cut = drop_generators(state, drop)
            kept = [g.name for g in cut.generators if g.depth > 1]
            try:
                theory = extend_action(build_extended_space(cut))
                verdict = f"{theory.status} after {len(theory.trace)} step(s)"
            except NotLiftable as exc:
                verdict = f"not liftable at q={exc.q}, ghost {exc.ghost_monomial}"
            print(f"drop {','.join(drop):<12} keep {','.join(kept):<40} {verdict}")


if __name__ == "__main__":
    main()
