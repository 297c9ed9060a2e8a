"""Indicator quality: timeliness decay, per-class provider history, label agreement."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

DEFAULT_HALF_LIFE = timedelta(days=7)
DEFAULT_WEIGHTS = (1 / 3, 1 / 3, 1 / 3)


class IndicatorClass(str, Enum):
    DOMAIN = "domain"
    IP = "ip"
    URL = "url"
    FILE_HASH = "file-hash"
    BINARY = "binary"
    EMAIL = "email"
    OTHER = "other"


def parse_time(value: str | datetime) -> datetime:
    if isinstance(value, datetime):
        ts = value
    else:
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_time(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class IndicatorRecord:
    value: str
    indicator_class: IndicatorClass
    provider_id: str
    first_shared: datetime
    labels: tuple[tuple[str, str], ...] = ()
    useful: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "indicator_class", IndicatorClass(self.indicator_class))
        object.__setattr__(self, "first_shared", parse_time(self.first_shared))
        object.__setattr__(self, "labels", tuple((str(p), str(l)) for p, l in self.labels))


@dataclass
class ProviderProfile:
    provider_id: str
    history: dict[IndicatorClass, tuple[int, int]] = field(default_factory=dict)  # (useful, total)
    volume: int = 0
    last_contribution: datetime | None = None

    def __post_init__(self):
        self.history = {IndicatorClass(c): (int(u), int(t)) for c, (u, t) in self.history.items()}
        for c, (u, t) in self.history.items():
            if not 0 <= u <= t:
                raise ValueError(f"{self.provider_id}/{c.value}: need 0 <= useful <= total")


@dataclass(frozen=True)
class QualityScore:
    timeliness: float
    provider_component: float
    agreement: float
    composite: float
    weights: tuple[float, float, float]


def timeliness_score(first_shared: datetime, now: datetime,
                     half_life: timedelta = DEFAULT_HALF_LIFE) -> float:
    if half_life <= timedelta(0):
        raise ValueError("half_life must be positive")
    age = parse_time(now) - parse_time(first_shared)
    if age < timedelta(0):
        raise ValueError("indicator was shared after the evaluation time")
    return 2.0 ** (-(age / half_life))


def provider_class_score(profile: ProviderProfile, c: IndicatorClass) -> float:
    useful, total = profile.history.get(IndicatorClass(c), (0, 0))
    return (useful + 1) / (total + 2)


def label_agreement(labels: Sequence[tuple[str, str]]) -> float:
    """Share of labels equal to the most common one; fewer than two labels give 0.5."""
    if len(labels) < 2:
        return 0.5
    counts = Counter(label.strip().lower() for _, label in labels)
    return max(counts.values()) / len(labels)


def _check_weights(weights: Sequence[float]) -> tuple[float, float, float]:
    w = tuple(float(x) for x in weights)
    if len(w) != 3 or any(not math.isfinite(x) or x < 0 for x in w) or not math.isclose(sum(w), 1.0):
        raise ValueError("weights must be three non-negative numbers summing to 1")
    return w  # type: ignore[return-value]


def indicator_quality(rec: IndicatorRecord, profile: ProviderProfile,
                      weights: Sequence[float] = DEFAULT_WEIGHTS, now: datetime | None = None,
                      half_life: timedelta = DEFAULT_HALF_LIFE) -> QualityScore:
    w = _check_weights(weights)
    t = timeliness_score(rec.first_shared, now if now is not None else datetime.now(timezone.utc), half_life)
    p = provider_class_score(profile, rec.indicator_class)
    a = label_agreement(rec.labels)
    return QualityScore(t, p, a, w[0] * t + w[1] * p + w[2] * a, w)


def build_profiles(records: Iterable[IndicatorRecord]) -> dict[str, ProviderProfile]:
    """Fold records into per-provider profiles; only adjudicated records enter the class history."""
    profiles: dict[str, ProviderProfile] = {}
    for rec in records:
        prof = profiles.setdefault(rec.provider_id, ProviderProfile(rec.provider_id))
        prof.volume += 1
        if prof.last_contribution is None or rec.first_shared > prof.last_contribution:
            prof.last_contribution = rec.first_shared
        if rec.useful is not None:
            u, t = prof.history.get(rec.indicator_class, (0, 0))
            prof.history[rec.indicator_class] = (u + int(rec.useful), t + 1)
    return dict(sorted(profiles.items()))


def evaluate(records: Sequence[IndicatorRecord], profiles: dict[str, ProviderProfile],
             now: datetime, weights: Sequence[float] = DEFAULT_WEIGHTS,
             half_life: timedelta = DEFAULT_HALF_LIFE) -> list[tuple[IndicatorRecord, QualityScore]]:
    out = []
    for rec in records:
        prof = profiles.get(rec.provider_id) or ProviderProfile(rec.provider_id)
        out.append((rec, indicator_quality(rec, prof, weights, now, half_life)))
    return out


def flag_free_riders(profiles: Iterable[ProviderProfile],
                     evaluated: Sequence[tuple[IndicatorRecord, QualityScore]],
                     min_volume: int, min_mean_quality: float,
                     window: timedelta, now: datetime) -> list[tuple[str, tuple[str, ...]]]:
    """Providers contributing too little, or too poorly, within ``window`` before ``now``.

    Reasons are ``low-volume`` and ``low-quality``; a provider with nothing in the
    window has no mean quality and is only flagged for volume.
    """
    if min_volume < 0 or not 0 <= min_mean_quality <= 1 or window < timedelta(0):
        raise ValueError("invalid free-rider thresholds")
    now = parse_time(now)
    recent: dict[str, list[float]] = {}
    for rec, score in evaluated:
        if timedelta(0) <= now - rec.first_shared <= window:
            recent.setdefault(rec.provider_id, []).append(score.composite)
    flagged = []
    for prof in sorted(profiles, key=lambda p: p.provider_id):
        scores = recent.get(prof.provider_id, [])
        reasons = []
        if len(scores) < min_volume:
            reasons.append("low-volume")
        if scores and sum(scores) / len(scores) < min_mean_quality:
            reasons.append("low-quality")
        if reasons:
            flagged.append((prof.provider_id, tuple(reasons)))
    return flagged


# -- files -------------------------------------------------------------------

def record_from_dict(obj: dict) -> IndicatorRecord:
    labels = []
    for item in obj.get("labels", []):
        if isinstance(item, dict):
            labels.append((item["provider"], item["label"]))
        else:
            labels.append(tuple(item))
    return IndicatorRecord(
        value=obj["value"],
        indicator_class=obj.get("class", obj.get("indicator_class", "other")),
        provider_id=obj.get("provider", obj.get("provider_id")),
        first_shared=obj["first_shared"],
        labels=tuple(labels),
        useful=obj.get("useful"),
    )


def record_to_dict(rec: IndicatorRecord) -> dict:
    return {
        "value": rec.value,
        "class": rec.indicator_class.value,
        "provider": rec.provider_id,
        "first_shared": format_time(rec.first_shared),
        "labels": [{"provider": p, "label": l} for p, l in rec.labels],
        "useful": rec.useful,
    }


def read_feed(path: str | Path) -> list[IndicatorRecord]:
    records = []
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            records.append(record_from_dict(json.loads(line)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}:{n}: bad indicator record: {exc}") from None
    return records


def write_feed(records: Iterable[IndicatorRecord], path: str | Path) -> None:
    lines = [json.dumps(record_to_dict(r), ensure_ascii=False) for r in records]
    Path(path).write_text("".join(l + "\n" for l in lines), encoding="utf-8")


def profiles_to_json(profiles: dict[str, ProviderProfile]) -> str:
    data = {
        pid: {
            "history": {c.value: [u, t] for c, (u, t) in sorted(p.history.items(), key=lambda kv: kv[0].value)},
            "volume": p.volume,
            "last_contribution": format_time(p.last_contribution) if p.last_contribution else None,
        }
        for pid, p in sorted(profiles.items())
    }
    return json.dumps(data, indent=2) + "\n"


def profiles_from_json(text: str) -> dict[str, ProviderProfile]:
    out = {}
    for pid, d in json.loads(text).items():
        last = d.get("last_contribution")
        out[pid] = ProviderProfile(pid, {c: tuple(v) for c, v in d.get("history", {}).items()},
                                   int(d.get("volume", 0)), parse_time(last) if last else None)
    return out


def latest(records: Iterable[IndicatorRecord]) -> datetime | None:
    times = [r.first_shared for r in records]
    return max(times) if times else None
