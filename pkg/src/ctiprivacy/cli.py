"""Command-line front end.

Exit codes: 0 success, 1 threshold exceeded or check failed, 2 input or parse
error, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import warnings
from datetime import timedelta
from pathlib import Path
from typing import Sequence

from . import __version__
from .anonymity import (QuasiIdentifierSpec, check_k_anonymity, check_l_diversity, dp_count,
                        enforce_k_anonymity, load_table, parse_where, table_to_csv)
from .annotate import RenderOptions, number, render_report, report_to_dict
from .ingest import MalformedInput, UnsupportedConstruct, detect_standard, load_document, parse_document
from .partition import (DEFAULT_TIERS, PartitionIntegrityError, merge_partitions, partition_document,
                        read_partitions, tier_view, write_partitions)
from .quality import (DEFAULT_HALF_LIFE, ProviderProfile, build_profiles, evaluate, flag_free_riders, latest,
                      parse_time, profiles_from_json, profiles_to_json, read_feed)
from .registry import (Registry, RegistryError, UnknownStandard, WeightProfile, builtin_registry,
                       dump_registry, load_rules, static_schema_score, validate_registry)
from .samples import BUNDLED, sample_bytes, synthesize_full_coverage
from .sanitize import GeneralizationError, load_policy, apply_policy
from .scoring import MODES, OCCURRENCE, classify_document, score_corpus, score_tree, weights_from_file
from .writer import serialize

EXIT_OK, EXIT_THRESHOLD, EXIT_INPUT, EXIT_USAGE = 0, 1, 2, 3
DOC_SUFFIXES = (".xml", ".json")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


# -- shared helpers ----------------------------------------------------------

def _out(data: bytes | str) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    sys.stdout.buffer.write(data)
    sys.stdout.flush()


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _registry(args) -> Registry:
    path = getattr(args, "rules", None)
    if not path:
        return builtin_registry()
    try:
        return load_rules(Path(path).read_bytes())
    except OSError as exc:
        raise InputError(f"cannot read rules file: {exc}") from None


def _weights(args, r: Registry) -> WeightProfile:
    path = getattr(args, "weights", None)
    if not path:
        return r.default_weights
    try:
        return weights_from_file(path)
    except OSError as exc:
        raise InputError(f"cannot read weights file: {exc}") from None


def _load(path: str, r: Registry, standard: str):
    if path == "-":
        doc = parse_document(sys.stdin.buffer.read(), origin="<stdin>")
    else:
        doc = load_document(path)
    sid = standard
    if sid == "auto":
        sid = detect_standard(doc, r)
        if sid == "unknown":
            raise InputError(f"{path}: cannot detect the standard; pass --standard")
    return doc, sid


def parse_duration(text: str) -> timedelta:
    """``7d``, ``12h``, ``30m``, ``45s`` or a bare number of days."""
    m = re.fullmatch(r"\s*(\d+(?:\.\d+)?)\s*([dhms]?)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"invalid duration {text!r}")
    value, unit = float(m.group(1)), m.group(2) or "d"
    d = {"d": timedelta(days=value), "h": timedelta(hours=value),
         "m": timedelta(minutes=value), "s": timedelta(seconds=value)}[unit]
    if d <= timedelta(0):
        raise argparse.ArgumentTypeError("duration must be positive")
    return d


def _weight_triple(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid weights {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("weights need three comma-separated numbers")
    if any(not math.isfinite(x) or x < 0 for x in parts) or not math.isclose(sum(parts), 1.0):
        raise argparse.ArgumentTypeError("weights must be non-negative and sum to 1")
    return parts  # type: ignore[return-value]


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


# -- commands ----------------------------------------------------------------

def cmd_registry(args) -> int:
    r = _registry(args)
    if args.action == "list":
        for s in r.standards:
            _out(f"{s.id}\t{s.category.value}\t{s.name}\n")
        return EXIT_OK
    if args.action == "show":
        if not args.id:
            raise UsageError("registry show: a standard id is required")
        try:
            s = r.standard(args.id)
        except UnknownStandard as exc:
            raise InputError(str(exc)) from None
        lines = [f"id: {s.id}", f"name: {s.name}", f"category: {s.category.value}",
                 f"description: {s.description}",
                 f"score: {number(static_schema_score(r, s.id))}"]
        if s.table_score is not None:
            lines.append(f"table score: {s.table_score}")
        if s.flags:
            lines.append(f"flags: {', '.join(s.flags)}")
        if s.note:
            lines.append(f"note: {s.note}")
        lines.append("rules:")
        for rule in sorted(r.rules_for(s.id), key=lambda x: (-x.category, x.pattern)):
            lines.append(f"  {rule.category.label:<9} {rule.pattern}")
        _out("\n".join(lines) + "\n")
        return EXIT_OK
    if args.action == "validate":
        issues = validate_registry(r)
        for issue in issues:
            _out(f"{issue.code}\t{issue.element}\t{issue.message}\n")
        if issues:
            _err(f"{len(issues)} issue(s) found")
            return EXIT_INPUT
        _out("ok\n")
        return EXIT_OK
    _out(dump_registry(r))
    return EXIT_OK


def cmd_score(args) -> int:
    r = _registry(args)
    w = _weights(args, r)
    reports, failed = [], False
    for path in args.files:
        try:
            doc, sid = _load(path, r, args.standard)
            reports.append(score_tree(doc, r, sid, w, args.mode))
        except (OSError, MalformedInput, UnsupportedConstruct, InputError, UnknownStandard) as exc:
            _err(f"{path}: {exc}" if not str(exc).startswith(path) else str(exc))
            failed = True
    if args.format == "json":
        payload = [report_to_dict(rep) for rep in reports]
        _out(json.dumps(payload[0] if len(args.files) == 1 and payload else payload,
                        indent=2, ensure_ascii=False) + "\n")
    else:
        for rep in reports:
            prefix = f"{rep.document_origin}: " if len(args.files) > 1 else ""
            _out(f"{prefix}score: {number(rep.score)}\n")
    if failed:
        return EXIT_INPUT
    if args.fail_over is not None and any(rep.score > args.fail_over for rep in reports):
        return EXIT_THRESHOLD
    return EXIT_OK


def _use_color(args) -> bool:
    if args.no_color or os.environ.get("NO_COLOR"):
        return False
    return sys.stdout.isatty()


def cmd_annotate(args) -> int:
    r = _registry(args)
    doc, sid = _load(args.file, r, args.standard)
    report = score_tree(doc, r, sid, _weights(args, r), args.mode, args.excerpt)
    opts = RenderOptions(args.format, args.show_public, _use_color(args), args.excerpt)
    _out(render_report(report, doc, opts))
    return EXIT_OK


def cmd_sanitize(args) -> int:
    r = _registry(args)
    doc, sid = _load(args.file, r, args.standard)
    try:
        policy = load_policy(args.policy)
    except OSError as exc:
        raise InputError(f"cannot read policy: {exc}") from None
    findings = classify_document(doc, r, sid)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        clean = apply_policy(doc, findings, policy)
    for w in caught:
        _err(f"warning: {w.message}")
    data = serialize(clean)
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        _out(data)
    return EXIT_OK


def cmd_partition(args) -> int:
    if args.target == "merge":
        if not args.source:
            raise UsageError("partition merge: a partition directory is required")
        if not args.output:
            raise UsageError("partition merge: -o OUT is required")
        doc = merge_partitions(read_partitions(args.source))
        Path(args.output).write_bytes(serialize(doc))
        return EXIT_OK
    if args.source:
        raise UsageError(f"partition: unexpected argument {args.source!r}")
    if not args.output:
        raise UsageError("partition: -o DIR is required")
    r = _registry(args)
    doc, sid = _load(args.target, r, args.standard)
    ps = partition_document(doc, classify_document(doc, r, sid))
    written = write_partitions(ps, args.output)
    if args.tier:
        try:
            tier = DEFAULT_TIERS.tier(args.tier)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        target = Path(args.output) / f"view-{tier.id}.{doc.format}"
        target.write_bytes(serialize(tier_view(ps, tier)))
        written.append(target)
    for p in written:
        _out(f"{p}\n")
    return EXIT_OK


def _table_args(args):
    try:
        return load_table(args.table, args.types)
    except OSError as exc:
        raise InputError(f"cannot read table: {exc}") from None


def cmd_anonymize(args) -> int:
    t = _table_args(args)
    qi = tuple(c.strip() for c in args.qi.split(",") if c.strip())
    if not qi:
        raise UsageError("anonymize: --qi needs at least one column")
    q = QuasiIdentifierSpec(qi, args.sensitive)
    if args.l is not None and not args.sensitive:
        raise UsageError("anonymize: --l requires --sensitive")
    if args.action == "check":
        ok = check_k_anonymity(t, q, args.k)
        _out(f"k-anonymous (k={args.k}): {str(ok).lower()}\n")
        if args.l is not None:
            l_ok = check_l_diversity(t, q, args.l)
            _out(f"l-diverse (l={args.l}): {str(l_ok).lower()}\n")
            ok = ok and l_ok
        return EXIT_THRESHOLD if args.require and not ok else EXIT_OK
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = enforce_k_anonymity(t, q, args.k)
    for w in caught:
        _err(f"warning: {w.message}")
    text = table_to_csv(out)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        _out(text)
    _err(f"kept {len(out)} of {len(t)} rows")
    return EXIT_OK


def cmd_dp_count(args) -> int:
    t = _table_args(args)
    try:
        pred = parse_where(t, args.where)
    except ValueError as exc:
        raise UsageError(f"dp-count: {exc}") from None
    _out(f"{dp_count(t, pred, args.epsilon, args.seed)!r}\n")
    return EXIT_OK


def _feed(args):
    try:
        records = read_feed(args.feed)
    except OSError as exc:
        raise InputError(f"cannot read feed: {exc}") from None
    if args.profiles:
        try:
            profiles = profiles_from_json(Path(args.profiles).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InputError(f"cannot read profiles: {exc}") from None
    else:
        profiles = build_profiles(records)
    now = parse_time(args.now) if args.now else latest(records)
    return records, profiles, now


def cmd_quality(args) -> int:
    records, profiles, now = _feed(args)
    if args.action == "profiles":
        _out(profiles_to_json(profiles))
        return EXIT_OK
    if now is None:
        _out("[]\n" if args.action == "free-riders" else "")
        return EXIT_OK
    try:
        evaluated = evaluate(records, profiles, now, args.weights, args.half_life)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.action == "score":
        for rec, q in evaluated:
            _out(json.dumps({
                "value": rec.value, "class": rec.indicator_class.value, "provider": rec.provider_id,
                "timeliness": q.timeliness, "provider_component": q.provider_component,
                "agreement": q.agreement, "composite": q.composite,
            }, ensure_ascii=False) + "\n")
        return EXIT_OK
    everyone = dict(profiles)
    for rec in records:
        everyone.setdefault(rec.provider_id, ProviderProfile(rec.provider_id))
    flagged = flag_free_riders(everyone.values(), evaluated, args.min_volume, args.min_quality,
                               args.window, now)
    _out(json.dumps([{"provider": p, "reasons": list(reasons)} for p, reasons in flagged],
                    indent=2) + "\n")
    return EXIT_OK


def cmd_corpus(args) -> int:
    r = _registry(args)
    root = Path(args.directory)
    if not root.is_dir():
        raise InputError(f"{root}: not a directory")
    files = sorted(p for p in root.rglob("*") if p.is_file() and p.suffix in DOC_SUFFIXES)
    summary = score_corpus([str(p) for p in files], r, _weights(args, r), args.mode,
                           args.standard, args.jobs)
    if args.format == "json":
        payload = {
            "documents": len(summary.reports),
            "errors": [{"origin": o, "error": e} for o, e in summary.errors],
            "mode": summary.mode,
            "total": number(summary.total),
            "mean": None if summary.mean is None else number(summary.mean),
            "max": None if summary.max is None else number(summary.max),
            "counts": summary.category_counts,
            "per_standard": {k: {"documents": v["documents"], "total": number(v["total"])}
                             for k, v in summary.per_standard.items()},
            "reports": [{"origin": rep.document_origin, "standard": rep.standard_id,
                         "score": number(rep.score)} for rep in summary.reports],
        }
        _out(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    else:
        for rep in summary.reports:
            _out(f"{rep.document_origin}\t{rep.standard_id}\t{number(rep.score)}\n")
        mean = "-" if summary.mean is None else f"{summary.mean:.2f}"
        _out(f"documents: {len(summary.reports)}  total: {number(summary.total)}  mean: {mean}\n")
    for origin, err in summary.errors:
        _err(f"{origin}: {err}")
    return EXIT_INPUT if summary.errors else EXIT_OK


def cmd_samples(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for sid, fname in BUNDLED.items():
        (out / fname).write_bytes(sample_bytes(sid))
        written.append(out / fname)
    r = _registry(args)
    for sid in args.full_coverage or []:
        try:
            doc = synthesize_full_coverage(sid, r)
        except UnknownStandard as exc:
            raise InputError(str(exc)) from None
        target = out / f"{sid}_full_coverage.xml"
        target.write_bytes(serialize(doc))
        written.append(target)
    for p in written:
        _out(f"{p}\n")
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ctiprivacy", description="Privacy linting, scoring, sanitization and "
                                                "partitioning for threat-intelligence documents.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    def rules_opt(sp):
        sp.add_argument("--rules", metavar="FILE", help="registry JSON file (default: built-in tables)")

    def doc_opts(sp, mode=True):
        rules_opt(sp)
        sp.add_argument("--standard", default="auto", metavar="ID",
                        help="standard id, or 'auto' to detect from the root element (default)")
        sp.add_argument("--weights", metavar="FILE", help="weight profile JSON")
        if mode:
            sp.add_argument("--mode", choices=MODES, default=OCCURRENCE, help="scoring mode")

    sp = sub.add_parser("registry", help="inspect the standards and rule tables")
    sp.add_argument("action", choices=("list", "show", "validate", "dump"))
    sp.add_argument("id", nargs="?", help="standard id for 'show'")
    rules_opt(sp)
    sp.set_defaults(func=cmd_registry)

    sp = sub.add_parser("score", help="leakage score of one or more documents")
    sp.add_argument("files", nargs="+", help="documents to score ('-' reads standard input)")
    doc_opts(sp)
    sp.add_argument("--format", choices=("json", "text"), default="text")
    sp.add_argument("--fail-over", type=float, metavar="N",
                    help="exit 1 when any document scores above N")
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("annotate", help="show leaking fields of a document")
    sp.add_argument("file", help="document ('-' reads standard input)")
    doc_opts(sp)
    sp.add_argument("--format", choices=("text", "html", "json"), default="text")
    sp.add_argument("--no-color", action="store_true", help="disable ANSI color (also NO_COLOR)")
    sp.add_argument("--show-public", action="store_true", help="include non-leaking fields")
    sp.add_argument("--excerpt", type=_positive_int, default=64, metavar="N",
                    help="value excerpt length")
    sp.set_defaults(func=cmd_annotate)

    sp = sub.add_parser("sanitize", help="apply a sanitization policy to a document")
    sp.add_argument("file")
    doc_opts(sp, mode=False)
    sp.add_argument("--policy", required=True, metavar="FILE", help="policy JSON")
    sp.add_argument("-o", "--output", metavar="OUT")
    sp.set_defaults(func=cmd_sanitize)

    sp = sub.add_parser("partition", help="split a document by leak category, or merge partitions",
                        usage="%(prog)s FILE -o DIR [--tier ID] | %(prog)s merge DIR -o OUT")
    sp.add_argument("target", metavar="FILE|merge")
    sp.add_argument("source", nargs="?", metavar="DIR", help="partition directory for 'merge'")
    doc_opts(sp, mode=False)
    sp.add_argument("-o", "--output", metavar="DIR|OUT")
    sp.add_argument("--tier", choices=[t.id for t in DEFAULT_TIERS.tiers],
                    help="also write the view for this tier")
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("anonymize", help="k-anonymity and l-diversity over a CSV table")
    sp.add_argument("action", choices=("check", "enforce"))
    sp.add_argument("--table", required=True, metavar="CSV")
    sp.add_argument("--types", metavar="JSON", help="column type declaration")
    sp.add_argument("--qi", required=True, metavar="COLS", help="comma-separated quasi-identifiers")
    sp.add_argument("--k", type=_positive_int, required=True)
    sp.add_argument("--l", type=_positive_int)
    sp.add_argument("--sensitive", metavar="COL")
    sp.add_argument("--require", action="store_true", help="exit 1 when a check fails")
    sp.add_argument("-o", "--output", metavar="OUT")
    sp.set_defaults(func=cmd_anonymize)

    sp = sub.add_parser("dp-count", help="Laplace-noised count of matching rows")
    sp.add_argument("--table", required=True, metavar="CSV")
    sp.add_argument("--types", metavar="JSON")
    sp.add_argument("--where", required=True, metavar="EXPR", help="'column OP literal'")
    sp.add_argument("--epsilon", type=_positive_float, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.set_defaults(func=cmd_dp_count)

    sp = sub.add_parser("quality", help="indicator quality and free-rider detection")
    sp.add_argument("action", choices=("score", "free-riders", "profiles"))
    sp.add_argument("--feed", required=True, metavar="JSONL")
    sp.add_argument("--profiles", metavar="JSON", help="profile snapshot (default: built from the feed)")
    sp.add_argument("--half-life", type=parse_duration, default=DEFAULT_HALF_LIFE, metavar="DUR")
    sp.add_argument("--weights", type=_weight_triple, default=(1 / 3, 1 / 3, 1 / 3), metavar="a,b,c")
    sp.add_argument("--now", metavar="TIMESTAMP", help="evaluation time (default: newest record)")
    sp.add_argument("--min-volume", type=int, default=1)
    sp.add_argument("--min-quality", type=float, default=0.5)
    sp.add_argument("--window", type=parse_duration, default=timedelta(days=30), metavar="DUR")
    sp.set_defaults(func=cmd_quality)

    sp = sub.add_parser("corpus", help="score every document under a directory")
    sp.add_argument("directory")
    doc_opts(sp)
    sp.add_argument("--format", choices=("json", "text"), default="text")
    sp.add_argument("--jobs", type=_positive_int, default=1)
    sp.set_defaults(func=cmd_corpus)

    sp = sub.add_parser("samples", help="write the bundled sample documents")
    sp.add_argument("-o", "--output", required=True, metavar="DIR")
    sp.add_argument("--full-coverage", nargs="*", metavar="ID",
                    help="also synthesize documents that match every rule of these standards")
    rules_opt(sp)
    sp.set_defaults(func=cmd_samples)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:   # --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except (InputError, OSError, MalformedInput, UnsupportedConstruct, RegistryError,
            PartitionIntegrityError, GeneralizationError, UnknownStandard, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        _err(f"error: {msg}")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
