"""Exchange symbol directories: NQ company lists (CSV), NT symbol
directories (pipe-delimited) and the OTC symbol list, with the symbol
validity rules used to drop warrants, rights, units and similar issues."""

from __future__ import annotations

import csv
import enum
import io
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ParseError

NASDAQ_BAD_FIFTH = frozenset("GHIRTVWX")
NYSE_CLASSES = frozenset("ABC")
_LETTERS = re.compile(r"^[A-Z]+$")
_CLASS_SHARE = re.compile(r"^[A-Z]+\.([A-Z])$")
_BLANKS = re.compile(r"[ \t]")

DEFAULT_FILES = {
    "nq_amex": "NQ_AMEX.csv",
    "nq_nyse": "NQ_NYSE.csv",
    "nq_nasdaq": "NQ_NASDAQ.csv",
    "nt_other": "NT_otherlisted.txt",
    "nt_nasdaq": "NT_nasdaqlisted.txt",
    "otc": "otctickers.csv",
}

# Historical download locations; the nasdaq.com screening endpoint has since
# been retired, so these are defaults for `fetch-tickers` and can be overridden.
DEFAULT_URLS = {
    "nq_amex": "http://www.nasdaq.com/screening/companies-by-name.aspx?exchange=amex&render=download",
    "nq_nyse": "http://www.nasdaq.com/screening/companies-by-name.aspx?exchange=nyse&render=download",
    "nq_nasdaq": "http://www.nasdaq.com/screening/companies-by-name.aspx?exchange=nasdaq&render=download",
    "nt_nasdaq": "http://www.nasdaqtrader.com/dynamic/SymDir/nasdaqlisted.txt",
    "nt_other": "http://www.nasdaqtrader.com/dynamic/SymDir/otherlisted.txt",
    "otc": "http://www.otcmarkets.com/reports/symbol_info.csv",
}


class Validity(enum.Enum):
    VALID = "Valid"
    REJECTED = "Rejected"


class NtKind(enum.Enum):
    NASDAQ_LISTED = "NasdaqListed"
    OTHER_LISTED = "OtherListed"


@dataclass(frozen=True)
class TickerRecord:
    symbol: str
    exchange: str
    name: str = ""
    market_cap: str | None = None
    last_sale: float | None = None


@dataclass
class NtResult:
    tickers: list[tuple[str, str]]
    test_symbols: list[str]


@dataclass
class TickerUniverse:
    records: list[TickerRecord] = field(default_factory=list)
    test_symbols: set[str] = field(default_factory=set)


def validate_nasdaq_symbol(symbol: str) -> Validity:
    """Five-letter NASDAQ symbols whose fifth letter marks a warrant, right,
    unit, when-issued or similar issue are rejected."""
    if len(symbol) == 5 and symbol[4] in NASDAQ_BAD_FIFTH:
        return Validity.REJECTED
    return Validity.VALID


def validate_nyse_symbol(symbol: str) -> Validity:
    """Letters only, or letters followed by a class-share suffix .A/.B/.C."""
    if _LETTERS.match(symbol):
        return Validity.VALID
    m = _CLASS_SHARE.match(symbol)
    if m and m.group(1) in NYSE_CLASSES:
        return Validity.VALID
    return Validity.REJECTED


VALIDATORS = {"A": validate_nyse_symbol, "N": validate_nyse_symbol, "Q": validate_nasdaq_symbol}


def _strip_all(text: str) -> str:
    return _BLANKS.sub("", text or "")


def _read_text(source: str | os.PathLike | io.TextIOBase) -> str:
    if hasattr(source, "read"):
        return source.read()
    with open(source, encoding="utf-8-sig", newline="") as fh:
        return fh.read()


def _to_float(text: str) -> float | None:
    try:
        return float(text.replace("$", "").replace(",", ""))
    except ValueError:
        return None


def _require(header: Sequence[str], columns: Iterable[str], source) -> None:
    missing = [c for c in columns if c not in header]
    if missing:
        raise ParseError(f"{source}: missing column(s) {', '.join(missing)}")


def load_nq_file(source, exchange: str) -> list[TickerRecord]:
    """Read an NQ company list. `exchange` is A, N or Q and selects the validator."""
    if exchange not in VALIDATORS:
        raise ValueError(f"exchange must be one of A/N/Q, got {exchange!r}")
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return []
    header = [h.strip() for h in header]
    _require(header, ("Symbol", "Name", "LastSale", "MarketCap"), source)
    idx = {h: i for i, h in enumerate(header)}
    validate = VALIDATORS[exchange]
    out = []
    for row in reader:
        if not any(cell.strip() for cell in row):
            continue
        row = row + [""] * (len(header) - len(row))
        symbol = _strip_all(row[idx["Symbol"]])
        if not symbol or validate(symbol) is Validity.REJECTED:
            continue
        out.append(
            TickerRecord(
                symbol=symbol,
                exchange=exchange,
                name=row[idx["Name"]],
                market_cap=_strip_all(row[idx["MarketCap"]]),
                last_sale=_to_float(_strip_all(row[idx["LastSale"]])),
            )
        )
    return out


def load_nt_file(source, kind: NtKind) -> NtResult:
    """Read an NT symbol directory (nasdaqlisted or otherlisted)."""
    text = _read_text(source).replace("'", "")
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        return NtResult([], [])
    header = [h.strip() for h in lines[0].split("|")]
    if kind is NtKind.NASDAQ_LISTED:
        symbol_col, exchange_col, validate = "Symbol", None, validate_nasdaq_symbol
    else:
        symbol_col, exchange_col, validate = "CQS Symbol", "Exchange", validate_nyse_symbol
    required = [symbol_col, "Test Issue"] + ([exchange_col] if exchange_col else [])
    _require(header, required, source)
    idx = {h: i for i, h in enumerate(header)}
    tickers: list[tuple[str, str]] = []
    tests: list[str] = []
    for line in lines[1:]:
        cells = [c.strip() for c in line.split("|")]
        cells += [""] * (len(header) - len(cells))
        test = cells[idx["Test Issue"]]
        if test == "":
            continue
        symbol = cells[idx[symbol_col]]
        if not symbol or validate(symbol) is Validity.REJECTED:
            continue
        if test == "Y":
            tests.append(symbol)
            continue
        exch = "Q" if exchange_col is None else cells[idx[exchange_col]]
        tickers.append((symbol, "N" if exch == "P" else exch))
    return NtResult(tickers, tests)


OTC_SYMBOL, OTC_TIER, OTC_NAME = 0, 3, 9


def load_otc_file(source) -> list[TickerRecord]:
    """Read the OTC symbol list: symbol, tier and name are columns 1, 4 and 10."""
    reader = csv.reader(io.StringIO(_read_text(source)))
    header = next(reader, None)
    if header is None:
        return []
    if len(header) <= OTC_NAME:
        raise ParseError(f"{source}: expected at least {OTC_NAME + 1} columns, got {len(header)}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) <= OTC_NAME:
            raise ParseError(f"expected at least {OTC_NAME + 1} columns, got {len(row)}", row=lineno)
        out.append(TickerRecord(symbol=row[OTC_SYMBOL], exchange=row[OTC_TIER], name=row[OTC_NAME]))
    return out


def merge_universe(
    nq: Sequence[list[TickerRecord]],
    nt: Sequence[NtResult],
    otc: list[TickerRecord] | None = None,
    dedupe: bool = False,
) -> TickerUniverse:
    """Concatenate NQ lists (callers pass them in A, N, Q order), drop NT test
    symbols, append OTC records. Duplicates are kept unless `dedupe`."""
    tests = {s for result in nt for s in result.test_symbols}
    records = [r for part in nq for r in part if r.symbol not in tests]
    if otc:
        records.extend(otc)
    if dedupe:
        seen: set[str] = set()
        unique = []
        for r in records:
            if r.symbol not in seen:
                seen.add(r.symbol)
                unique.append(r)
        records = unique
    return TickerUniverse(records, tests)


def load_universe(directory: str | os.PathLike, files: dict[str, str] | None = None,
                  include_otc: bool = False, dedupe: bool = False) -> TickerUniverse:
    """Load the five (or six with OTC) standard files from `directory`."""
    names = {**DEFAULT_FILES, **(files or {})}
    base = Path(directory)

    def path(key):
        p = Path(names[key])
        return p if p.is_absolute() else base / p

    nq = [load_nq_file(path("nq_amex"), "A"), load_nq_file(path("nq_nyse"), "N"), load_nq_file(path("nq_nasdaq"), "Q")]
    nt = [load_nt_file(path("nt_other"), NtKind.OTHER_LISTED), load_nt_file(path("nt_nasdaq"), NtKind.NASDAQ_LISTED)]
    otc = load_otc_file(path("otc")) if include_otc else None
    return merge_universe(nq, nt, otc, dedupe=dedupe)
