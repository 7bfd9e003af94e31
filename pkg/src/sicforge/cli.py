"""`sicforge` command line: fetch-taxonomy, fetch-edgar, fetch-tickers,
match, backtest and report.

Every command resolves its configuration first (defaults < --config file <
SICFORGE_USER_AGENT < flags), writes outputs into the run directory and
echoes the effective configuration there. Exit codes: 0 success, 1
internal or network error, 2 input or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .backtest import (
    BacktestReport, Classification, PricePanel, classify_by_ranges, format_report_table, horserace,
    load_price_panel, parse_sic_ranges, read_reports, render_svg, write_reports,
)
from .config import Config, ConfigError, load_config
from .edgar import ScanPlan, read_download_table, scan, write_download_table, write_fetch_log
from .errors import FetchError, InputError, ParseError
from .matcher import match_stats, read_matrix, run_matching, write_outputs
from .osha import fetch_osha_taxonomy
from .synthetic import SyntheticConfig, fine_and_coarse, synthetic_panel
from .tables import read_table
from .taxonomy import (
    amend_with_sec_codes, bundled_sec_codes, canonicalize, read_sec_codes, sic_level_maps, sic_name_map,
)
from .tickers import DEFAULT_FILES, DEFAULT_URLS, load_universe
from .transport import FixtureFetcher, HttpFetcher, PageFetcher

log = logging.getLogger("sicforge")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2
STATS_FILE = "MATCH.STATS.txt"


def make_transport(config: Config) -> PageFetcher:
    """Fixture directory set -> offline fetcher; otherwise live HTTP."""
    if config.fixture_dir is not None:
        if not Path(config.fixture_dir).is_dir():
            raise ConfigError(f"fixture directory not found: {config.fixture_dir}")
        return FixtureFetcher(config.fixture_dir)
    if not config.user_agent:
        raise ConfigError("live fetching needs a User-Agent: set user_agent or SICFORGE_USER_AGENT")
    return HttpFetcher(config.user_agent, rate_ms=config.rate_ms)


def _sec_codes(path: str | None):
    return read_sec_codes(path) if path else bundled_sec_codes()


def cmd_fetch_taxonomy(config: Config, sec_codes: str | None = None, amend: bool = False) -> dict[str, Path]:
    tax = fetch_osha_taxonomy(make_transport(config))
    out = {"table": tax.write(Path(config.run_dir) / "SIC.table.txt")}
    if amend:
        out["amended"] = amend_with_sec_codes(tax, _sec_codes(sec_codes)).write(
            Path(config.run_dir) / "SIC.Amended.txt")
    return out


def cmd_fetch_edgar(config: Config, all_sic: bool = False, codes_file: str | None = None) -> dict[str, Path]:
    plan = ScanPlan.all_codes() if all_sic else ScanPlan.listed(_sec_codes(codes_file))
    records, fetch_log = scan(plan, make_transport(config))
    run = Path(config.run_dir)
    return {"download": write_download_table(records, run / "SIC.Download.txt"),
            "log": write_fetch_log(fetch_log, run)}


def cmd_fetch_tickers(config: Config) -> dict[str, Path]:
    """Download the raw ticker files into the data directory."""
    transport = make_transport(config)
    keys = [k for k in DEFAULT_FILES if k != "otc" or config.include_otc]
    out = {}
    for key in keys:
        text = transport.fetch(DEFAULT_URLS[key])
        path = Path(config.data_dir) / DEFAULT_FILES[key]
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        out[key] = path
    return out


def cmd_match(config: Config, download: str | None = None, codes_file: str | None = None) -> dict[str, Path]:
    data = Path(config.data_dir)
    if config.include_otc and not (data / DEFAULT_FILES["otc"]).exists():
        raise InputError(f"include_otc is set but {data / DEFAULT_FILES['otc']} is missing")
    for key, name in DEFAULT_FILES.items():
        if key != "otc" and not (data / name).exists():
            raise InputError(f"missing ticker file {data / name}")
    universe = load_universe(data, include_otc=config.include_otc, dedupe=config.dedupe)
    dl = Path(download) if download else data / "SIC.Download.txt"
    if not dl.exists():
        raise InputError(f"missing EDGAR download table {dl}")
    matched, unmatched = run_matching(universe, read_download_table(dl), sic_name_map(_sec_codes(codes_file)))
    out = write_outputs(config.run_dir, matched, unmatched)
    stats = match_stats(matched, unmatched)
    out["stats"] = Path(config.run_dir) / STATS_FILE
    out["stats"].write_text(stats.format(), encoding="utf-8")
    print(stats.format(), end="")
    return out


def load_classification(label: str, path: str | Path, sic_hierarchy: bool = False) -> Classification:
    """Read a 0/1 matrix file (SIC.IND.CLASS layout) or a two-column
    `ticker TAB label` file with a header row. With `sic_hierarchy`, SIC
    column labels get the Industry Group / Major Group nest."""
    rows = read_table(path)
    if not rows:
        raise InputError(f"{path}: empty classification file")
    data_rows = rows[1:]
    is_mapping = len(rows[0]) == 2 and data_rows and all(len(r) == 2 for r in data_rows) and not all(
        r[1] in ("0", "1") for r in data_rows)
    if is_mapping:
        assignment: dict = {}
        for r in data_rows:
            assignment.setdefault(r[0], r[1])
        cls = Classification(label, assignment)
    else:
        cls = Classification.from_matrix(label, read_matrix(path))
    if sic_hierarchy:
        codes = sorted(set(cls.assignment.values()))
        try:
            codes = [canonicalize(c) for c in codes]
        except InputError as exc:
            raise InputError(f"{path}: --sic-hierarchy needs SIC labels ({exc})") from exc
        cls.level_maps = sic_level_maps(codes)
    return cls


def load_ticker_sic(path: str | Path) -> dict[str, str]:
    rows = read_table(path)
    if not rows or rows[0][:3] != ["TICKER", "EXCH", "SIC"]:
        raise ParseError(f"{path}: expected a TICKER.SIC table")
    out: dict[str, str] = {}
    for r in rows[1:]:
        out.setdefault(r[0], r[2])
    return out


def _split_label(spec: str, flag: str) -> tuple[str, str]:
    label, sep, path = spec.partition("=")
    if not sep or not label or not path:
        raise ConfigError(f"{flag} expects LABEL=PATH, got {spec!r}")
    return label, path


def synthetic_inputs(config: Config, seed: int) -> tuple[PricePanel, list[Classification]]:
    spec = SyntheticConfig(n_industries=config.synthetic_industries, per_industry=config.synthetic_per_industry,
                           n_days=config.synthetic_days)
    panel, assignment = synthetic_panel(spec, seed)
    return panel, fine_and_coarse(assignment)


def cmd_backtest(config: Config, panel: PricePanel, classifications: Sequence[Classification],
                 directory: Path | None = None, svg: bool = False) -> list[BacktestReport]:
    reports = horserace(panel, classifications, config.backtest_config(), workers=config.workers)
    out = directory or Path(config.run_dir)
    write_reports(reports, out)
    if svg:
        (out / "report.svg").write_text(render_svg(reports), encoding="utf-8")
    return reports


def cmd_report(config: Config, directory: Path | None = None, svg: bool = False) -> list[BacktestReport]:
    d = directory or Path(config.run_dir)
    reports = read_reports(d, config.investment)
    (d / "report.txt").write_text(format_report_table(reports), encoding="utf-8")
    if svg:
        (d / "report.svg").write_text(render_svg(reports), encoding="utf-8")
    print(format_report_table(reports), end="")
    return reports


def _run_backtest(config: Config, args) -> None:
    classifications = [load_classification(*_split_label(s, "--classification"), args.sic_hierarchy)
                       for s in args.classification]
    if args.ranges:
        if not args.ticker_sic:
            raise ConfigError("--ranges needs --ticker-sic")
        sic = load_ticker_sic(args.ticker_sic)
        for spec in args.ranges:
            label, path = _split_label(spec, "--ranges")
            ranges = parse_sic_ranges(Path(path).read_text(encoding="utf-8"))
            classifications.append(Classification(label, classify_by_ranges(sic, ranges, args.ranges_default)))
    if args.synthetic:
        seeds = range(config.seed, config.seed + config.seeds)
        summary = []
        for seed in seeds:
            panel, default = synthetic_inputs(config, seed)
            target = Path(config.run_dir) / f"seed-{seed}" if config.seeds > 1 else None
            reports = cmd_backtest(config, panel, classifications or default, target, args.svg)
            summary.append((seed, reports))
        if config.seeds > 1:
            labels = [r.label for r in summary[0][1]]
            lines = ["seed\t" + "\t".join(f"ROC.{lab}" for lab in labels)]
            lines += [f"{s}\t" + "\t".join(f"{100 * r.roc:.4f}" for r in reps) for s, reps in summary]
            means = np.mean([[r.roc for r in reps] for _, reps in summary], axis=0)
            lines.append("mean\t" + "\t".join(f"{100 * m:.4f}" for m in means))
            (Path(config.run_dir) / "seeds.txt").write_text("".join(x + "\n" for x in lines), encoding="utf-8")
        print(format_report_table(summary[-1][1]), end="")
        return
    if not args.panel:
        raise ConfigError("backtest needs --panel PATH or --synthetic")
    if not classifications:
        raise ConfigError("backtest needs at least one --classification or --ranges")
    reports = cmd_backtest(config, load_price_panel(args.panel), classifications, svg=args.svg)
    print(format_report_table(reports), end="")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sicforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"sicforge {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--data-dir")
    common.add_argument("--fixture-dir", "--fixtures", dest="fixture_dir", help="serve pages from this fixture directory (offline mode)")
    common.add_argument("--run-dir", help="output directory")
    common.add_argument("--rate-ms", help="minimum interval between live requests")
    common.add_argument("--user-agent")
    common.add_argument("--include-otc", action="store_const", const=True, default=None)
    common.add_argument("--dedupe", action="store_const", const=True, default=None)
    common.add_argument("--top-n")
    common.add_argument("--interval")
    common.add_argument("--lookback")
    common.add_argument("--ridge")
    common.add_argument("--investment")
    common.add_argument("--seed")
    common.add_argument("--seeds")
    common.add_argument("--workers")
    common.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fetch-taxonomy", parents=[common], help="crawl the OSHA SIC manual into SIC.table.txt")
    s.add_argument("--amend", action="store_true", help="also write SIC.Amended.txt with SEC-only codes")
    s.add_argument("--codes-file", help="SEC code list (default: bundled)")

    s = sub.add_parser("fetch-edgar", parents=[common], help="download EDGAR company lists per SIC code")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--all-sic", action="store_true", help="scan every code 0100..9999")
    g.add_argument("--codes-file", help="scan the codes in this SEC code list (default: bundled)")

    sub.add_parser("fetch-tickers", parents=[common], help="download the raw ticker files into the data dir")

    s = sub.add_parser("match", parents=[common], help="match tickers to SIC codes by company name")
    s.add_argument("--download", help="SIC.Download.txt (default: <data-dir>/SIC.Download.txt)")
    s.add_argument("--codes-file", help="SEC code list for industry names (default: bundled)")

    s = sub.add_parser("backtest", parents=[common], help="run the classification horserace")
    s.add_argument("--panel", help="price panel CSV or directory of per-ticker CSVs")
    s.add_argument("--synthetic", action="store_true", help="use a seeded synthetic panel")
    s.add_argument("--classification", action="append", default=[], metavar="LABEL=PATH")
    s.add_argument("--sic-hierarchy", action="store_true", help="nest SIC columns by group and major group")
    s.add_argument("--ranges", action="append", default=[], metavar="LABEL=PATH", help="SIC-range industry file")
    s.add_argument("--ranges-default", help="industry for SIC codes outside every range")
    s.add_argument("--ticker-sic", help="TICKER.SIC.txt used with --ranges")
    s.add_argument("--svg", action="store_true", help="also write report.svg")

    s = sub.add_parser("report", parents=[common], help="rebuild report.txt from saved P&L series")
    s.add_argument("--svg", action="store_true", help="also write report.svg")
    return p


_OVERRIDES = ("data_dir", "fixture_dir", "run_dir", "rate_ms", "user_agent", "include_otc", "dedupe", "top_n",
              "interval", "lookback", "ridge", "investment", "seed", "seeds", "workers")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    offline = False
    try:
        config = load_config(args.config, {k: getattr(args, k) for k in _OVERRIDES})
        offline = config.fixture_dir is not None
        config.write_echo()
        if args.command == "fetch-taxonomy":
            cmd_fetch_taxonomy(config, args.codes_file, args.amend)
        elif args.command == "fetch-edgar":
            cmd_fetch_edgar(config, args.all_sic, args.codes_file)
        elif args.command == "fetch-tickers":
            cmd_fetch_tickers(config)
        elif args.command == "match":
            cmd_match(config, args.download, args.codes_file)
        elif args.command == "backtest":
            _run_backtest(config, args)
        elif args.command == "report":
            cmd_report(config, svg=args.svg)
    except (InputError, FileNotFoundError) as exc:
        print(f"sicforge: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FetchError as exc:
        print(f"sicforge: fetch failed: {exc}", file=sys.stderr)
        return EXIT_INPUT if offline else EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - top-level guard maps everything else to exit 1
        log.debug("internal error", exc_info=True)
        print(f"sicforge: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
