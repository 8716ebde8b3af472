"""Time resolution, extension and the closed-form checks for each sample model."""

from __future__ import annotations

import argparse
import statistics
import time
from dataclasses import dataclass

from bvtate.cme import extend_action
from bvtate.tate import build_extended_space, build_resolution
from bvtate.u2 import SAMPLE_G, build_u2


@dataclass
class BenchConfig:
    repeats: int = 3


def timed(fn, repeats: int) -> float:
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    cfg = BenchConfig(parser.parse_args().repeats)
    print(f"{'case':>4} {'resolution s':>13} {'extension s':>12}")
    for case in (1, 2, 3):
        S0 = build_u2(SAMPLE_G[case]).S0
        t_res = timed(lambda: build_resolution(S0), cfg.repeats)
        space = build_extended_space(build_resolution(S0))
        t_ext = timed(lambda: extend_action(space), cfg.repeats)
        print(f"{case:>4} {t_res:>13.3f} {t_ext:>12.3f}")


if __name__ == "__main__":
    main()
