"""Run the three two-sector sample models end to end and write one JSON report per case."""

from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from bvtate.cme import check_cme, extend_action, linear_action
from bvtate.tate import build_extended_space, build_resolution, delta_squared_defects
from bvtate.u2 import SAMPLE_G, build_u2, case2_space, expected_extension, p_family, closed_form_action


@dataclass
class RunConfig:
    cases: tuple[int, ...] = (1, 2, 3)
    cap: int = 8
    max_q: int = 8
    out_dir: str = "results"


def run_case(case: int, cfg: RunConfig) -> dict:
    t0 = time.perf_counter()
    spec = build_u2(SAMPLE_G[case])
    state = build_resolution(spec.S0, cap=cfg.cap)
    space = build_extended_space(state)
    theory = extend_action(space, max_q=cfg.max_q)
    report = {
        "case": case,
        "action": str(spec.S0),
        "D": str(spec.D),
        "roster_sizes": list(state.roster_sizes()),
        "expected_strata": {str(k): v for k, v in expected_extension(case).sizes().items()},
        "strata": {str(k): v for k, v in space.stratum_sizes().items()},
        "delta_squared_zero": not delta_squared_defects(state),
        "status": theory.status,
        "steps": len(theory.trace),
        "action_terms": len(theory.action),
        "cme_holds": check_cme(theory.action).holds,
    }
    if case == 2:
        aligned = case2_space(spec, state)
        report["closed_form_linear_action"] = str(linear_action(aligned))
        for T in ("0", "M4"):
            solved = extend_action(aligned, max_q=cfg.max_q, injection={1: p_family(T, aligned.ctx)})
            report[f"solver_equals_closed_form_T={T}"] = solved.action == closed_form_action(spec, T, aligned.ctx)
    report["seconds"] = round(time.perf_counter() - t0, 3)
    return report


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cases", type=int, nargs="+", default=[1, 2, 3])
    parser.add_argument("--cap", type=int, default=8)
    parser.add_argument("--max-q", type=int, default=8)
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args()
    cfg = RunConfig(tuple(args.cases), args.cap, args.max_q, args.out_dir)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for case in cfg.cases:
        report = run_case(case, cfg)
        report["config"] = asdict(cfg)
        path = out / f"u2_case{case}.json"
        path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        print(
            f"case {case}: roster {report['roster_sizes']}, strata {report['strata']}, "
            f"{report['status']} after {report['steps']} step(s), CME {report['cme_holds']} "
            f"({report['seconds']} s) -> {path}"
        )


if __name__ == "__main__":
    main()
