"""Run the three Victoria demand experiments and compare with published results.

Usage: python scripts/run_demand_examples.py [--data PATH] [--out DIR]
"""

import argparse
import logging
from pathlib import Path

from msaci.config import load_config
from msaci.evaluation import render_table
from msaci.pipeline import run_experiment

ROOT = Path(__file__).resolve().parents[1]

PUBLISHED = {
    "example1": ((0.102, 0.102, 0.0964, 0.0905, 0.0869, 0.0957), (0.541, 0.994, 1.21, 1.49, 1.71, None)),
    "example2": ((0.102, 0.148, 0.194, 0.243, 0.295, 0.196), None),
    "example3": ((0.102, 0.148, 0.195, 0.246, 0.298, 0.198), None),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data", default=str(ROOT / "data" / "demand_temperature.csv"))
    parser.add_argument("--out", default=str(ROOT / "out"))
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    if not Path(args.data).exists():
        raise SystemExit(f"dataset not found at {args.data}; download demand_temperature.csv from the MAPIE examples")

    for name, (rates, lengths) in PUBLISHED.items():
        cfg = load_config(ROOT / "configs" / f"{name}.ini", [f"data.path={args.data}", f"output.dir={Path(args.out) / name}"])
        res = run_experiment(cfg)
        m = res.metrics
        print(f"== {name}: a = {res.ridge_param:.4g}, T = {res.n_test}")
        print(render_table(m)[0], end="")
        ours = list(m.error_rates) + [m.overall_error_rate]
        print("published error rate  " + "  ".join(f"{v:.3g}" for v in rates))
        print("difference            " + "  ".join(f"{o - v:+.3f}" for o, v in zip(ours, rates)))
        if lengths:
            print("published avg length  " + "  ".join("-" if v is None else f"{v:.3g}" for v in lengths))
        print(res.bounds.render())


if __name__ == "__main__":
    main()
