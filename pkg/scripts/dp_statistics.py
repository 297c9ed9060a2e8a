"""Empirical bias and spread of Laplace-noised counts across epsilons."""

import argparse
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ctiprivacy.anonymity import RecordTable, dp_count


@dataclass
class Config:
    true_count: int = 50
    draws: int = 10_000
    epsilons: list[float] = field(default_factory=lambda: [0.1, 0.5, 1.0, 2.0])
    seed0: int = 0


def main(cfg: Config) -> dict:
    t = RecordTable((("x", "text"),), [("1",)] * cfg.true_count)
    results = []
    for eps in cfg.epsilons:
        xs = np.array([dp_count(t, lambda _row: True, eps, cfg.seed0 + i) for i in range(cfg.draws)])
        sd = math.sqrt(2) / eps
        results.append({
            "epsilon": eps,
            "mean": float(xs.mean()),
            "std": float(xs.std(ddof=1)),
            "expected_std": sd,
            "mean_within_3se": bool(abs(xs.mean() - cfg.true_count) <= 3 * sd / math.sqrt(cfg.draws)),
        })
    return {"config": asdict(cfg), "results": results}


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--true-count", type=int, default=Config.true_count)
    ap.add_argument("--draws", type=int, default=Config.draws)
    ap.add_argument("--epsilons", type=float, nargs="+", default=Config().epsilons)
    ap.add_argument("--seed0", type=int, default=Config.seed0)
    print(json.dumps(main(Config(**vars(ap.parse_args()))), indent=2))
