"""Per-standard leakage totals: rule tables, full-coverage documents, and stored values."""

import argparse
import json
from dataclasses import asdict, dataclass

from ctiprivacy.registry import builtin_registry, static_schema_score
from ctiprivacy.samples import synthesize_full_coverage
from ctiprivacy.scoring import DISTINCT, OCCURRENCE, score_tree


@dataclass
class Config:
    as_json: bool = False


def main(cfg: Config) -> int:
    r = builtin_registry()
    rows = []
    for std in r.standards:
        if std.table_score is None:
            continue
        doc = synthesize_full_coverage(std.id, r)
        rows.append({
            "standard": std.id,
            "stored": std.table_score,
            "rules": static_schema_score(r, std.id),
            "occurrence": score_tree(doc, r, std.id, mode=OCCURRENCE).score,
            "distinct": score_tree(doc, r, std.id, mode=DISTINCT).score,
            "flags": list(std.flags),
        })
    if cfg.as_json:
        print(json.dumps({"config": asdict(cfg), "rows": rows}, indent=2))
    else:
        print(f"{'standard':<10}{'stored':>8}{'rules':>8}{'occ':>6}{'dist':>6}  flags")
        for row in rows:
            print(f"{row['standard']:<10}{row['stored']:>8}{row['rules']:>8}"
                  f"{row['occurrence']:>6}{row['distinct']:>6}  {','.join(row['flags'])}")
    # flagged standards carry a known disagreement between their own listing and total
    mismatches = [row["standard"] for row in rows if not row["flags"]
                  and not row["stored"] == row["rules"] == row["occurrence"] == row["distinct"]]
    return 1 if mismatches else 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", dest="as_json", action="store_true")
    raise SystemExit(main(Config(**vars(ap.parse_args()))))
