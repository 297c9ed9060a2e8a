"""Share of fields needing heavy sanitization once a document is split by category,
and the leakage score each default tier would receive."""

import argparse
import json
from dataclasses import asdict, dataclass, field

from ctiprivacy.ingest import load_document
from ctiprivacy.partition import DEFAULT_TIERS, partition_document, tier_view, workload
from ctiprivacy.registry import builtin_registry
from ctiprivacy.samples import BUNDLED, load_sample, synthesize_full_coverage
from ctiprivacy.scoring import classify_document, detect_standard, score_tree


@dataclass
class Config:
    documents: list[str] = field(default_factory=list)   # extra files to include
    full_coverage: list[str] = field(default_factory=lambda: ["iodef", "maec", "stix"])


def measure(doc, sid, r):
    ps = partition_document(doc, classify_document(doc, r, sid))
    w = workload(ps)
    return {
        "document": doc.origin,
        "standard": sid,
        "fields": w.total_fields,
        "heavy": w.heavy_fields,
        "reduction": round(w.reduction, 4),
        "tier_scores": {t.id: score_tree(tier_view(ps, t), r, sid).score for t in DEFAULT_TIERS.tiers},
    }


def main(cfg: Config) -> dict:
    r = builtin_registry()
    rows = [measure(load_sample(sid), sid, r) for sid in BUNDLED]
    rows += [measure(synthesize_full_coverage(sid, r), sid, r) for sid in cfg.full_coverage]
    for path in cfg.documents:
        doc = load_document(path)
        rows.append(measure(doc, detect_standard(doc, r) or "unknown", r))
    return {"config": asdict(cfg), "rows": rows}


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("documents", nargs="*")
    ap.add_argument("--full-coverage", nargs="*", default=Config().full_coverage)
    print(json.dumps(main(Config(**vars(ap.parse_args()))), indent=2))
