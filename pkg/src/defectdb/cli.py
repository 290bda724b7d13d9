"""Command-line interface: ingest, validate, stats, export, serve.

The bundle path argument falls back to the DEFECTDB_HOME environment
variable wherever it is optional.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .errors import DefectDbError


def _bundle_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "bundle",
        nargs="?",
        default=os.environ.get("DEFECTDB_HOME"),
        help="bundle directory (default: $DEFECTDB_HOME)",
    )


def _require_bundle(args) -> Path:
    if not args.bundle:
        raise DefectDbError("no bundle path given and DEFECTDB_HOME is not set")
    return Path(args.bundle)


def _cmd_ingest(args) -> int:
    from .ingest import ingest

    report = ingest(
        args.manifest,
        args.out,
        refractive_index=args.refractive_index,
        strict=args.strict,
        jobs=args.jobs,
        force=args.force,
    )
    print(f"ingested {len(report.bundle.records)} record(s) -> {args.out}")
    for failure in report.failures:
        print(f"  FAILED {failure.entry}: {failure.message}", file=sys.stderr)
    return 1 if (args.strict and report.failures) else 0


def _cmd_validate(args) -> int:
    from .bundle import load_bundle

    bundle = load_bundle(_require_bundle(args), strict=False)
    if not bundle.violations:
        print(f"OK: {len(bundle.records)} record(s), no violations")
        return 0
    for rid, msg in bundle.violations:
        print(f"{rid}: {msg}")
    print(f"{len(bundle.violations)} violation(s) in {len(bundle.records)} record(s)")
    return 1


def _cmd_stats(args) -> int:
    from .bundle import load_bundle
    from .stats import histogram, render_histogram_figure, write_histogram_csv

    bundle = load_bundle(_require_bundle(args))
    report = histogram(bundle, args.property, args.bin)
    print(f"{report.property_name}: {report.total} transition(s) in {report.n_bins} bin(s)")
    for i in range(report.n_bins):
        row = " ".join(f"{g}={report.counts[g][i]}" for g in sorted(report.counts))
        print(f"  [{report.bin_edges[i]:g}, {report.bin_edges[i + 1]:g}): {row}")

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"{report.property_name}_histogram.csv"
    write_histogram_csv(report, csv_path)
    print(f"wrote {csv_path}")
    if not args.no_figure:
        fig_path = outdir / f"{report.property_name}_histogram.png"
        render_histogram_figure(report, fig_path)
        print(f"wrote {fig_path}")
    return 0


def _cmd_export(args) -> int:
    from .bundle import load_bundle
    from .export import export_records

    bundle = load_bundle(_require_bundle(args))
    if args.id:
        records = [r for r in bundle.records if r.id in set(args.id)]
        missing = set(args.id) - {r.id for r in records}
        if missing:
            raise DefectDbError(f"unknown record id(s): {', '.join(sorted(missing))}")
    else:
        records = list(bundle.records)
    written = export_records(bundle, records, Path(args.out), args.format, spectra=args.spectra)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_serve(args) -> int:
    from .api import ApiConfig, serve

    config = ApiConfig(
        bundle_path=str(_require_bundle(args)),
        host=args.host,
        port=args.port,
        cors_origins=tuple(args.cors or ()),
        refractive_index_override=args.refractive_index,
        static_dir=args.webapp,
    )
    serve(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="defectdb", description=__doc__)
    parser.add_argument("--version", action="version", version=f"defectdb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="assemble a bundle from a raw-input manifest")
    p.add_argument("manifest", help="ingest manifest (JSON)")
    p.add_argument("-o", "--out", required=True, help="output bundle directory")
    p.add_argument("--strict", action="store_true", help="exit nonzero if any entry fails")
    p.add_argument("--jobs", type=int, default=1, help="parallel derivation workers")
    p.add_argument("--refractive-index", type=float, default=1.85,
                   help="host refractive index entering radiative rates (default 1.85)")
    p.add_argument("--force", action="store_true", help="replace an existing bundle directory")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("validate", help="validate every record in a bundle")
    _bundle_arg(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("stats", help="property histogram by periodic group (CSV + figure)")
    _bundle_arg(p)
    p.add_argument("--property", choices=("zpl", "lifetime", "misalignment"), default="zpl")
    p.add_argument("--bin", type=float, default=None, help="bin width (property units)")
    p.add_argument("-o", "--out", default=".", help="output directory for CSV/figure")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("export", help="export records as CSV and structures as XYZ/CIF")
    _bundle_arg(p)
    p.add_argument("--id", action="append", help="record id (repeatable; default: all)")
    p.add_argument("--format", choices=("csv", "xyz", "cif"), default="csv")
    p.add_argument("-o", "--out", default="export", help="output directory")
    p.add_argument("--spectra", action="store_true", help="also export PL spectra (CSV + figure)")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("serve", help="serve the HTTP API over a bundle")
    _bundle_arg(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8533)
    p.add_argument("--cors", action="append", help="allowed CORS origin (repeatable)")
    p.add_argument("--refractive-index", type=float, default=None,
                   help="recompute rates/lifetimes with this refractive index")
    p.add_argument("--webapp", default=None, help="static webapp directory to serve at /")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DefectDbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
