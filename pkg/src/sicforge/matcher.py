"""Company-name normalization and ticker -> SIC matching.

Matching runs in two stages. Stage 1 compares lightly normalized names
(uppercase, punctuation rules) for exact equality. Stage 2 additionally
strips a leading THE and trailing corporate suffixes / US state
abbreviations from both sides and compares again. A ticker is matched
when exactly one distinct SIC code survives.
"""

from __future__ import annotations

import enum
import logging
import os
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .edgar import CompanyRecord
from .errors import EmptyMatrix, ParseError
from .tables import format_table, read_table, write_table
from .tickers import TickerRecord, TickerUniverse

log = logging.getLogger(__name__)

CORPORATE_SUFFIXES = (
    "INC", "INCORPORATED", "LP", "CORPORATION", "CORP", "PLC", "LTD", "LIMITED", "COMPANY", "AG", "SA",
    "LLC", "PLLC", "DBA", "THE", "NEW", "NV", "HOLDING", "HOLDINGS", "CO", "HLDGS", "HLDG", "PARTNERSHIP",
)
STATE_ABBREVIATIONS = (
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "FL", "GA", "HI", "ID", "IL", "IN", "IA", "KS", "KY",
    "LA", "ME", "MD", "MA", "MI", "MN", "MS", "MO", "MT", "NE", "NV", "NH", "NJ", "NM", "NY", "NC", "ND",
    "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VT", "VA", "WA", "WV", "WI", "WY",
)
FUND_KEYWORDS = (
    "FUND", "TRUST", "PORTFOLIO", "ETF", "INCOME", "DIVIDEND", "SHARES", " BOND", " RETURN", " SECURITIES",
    " INVESTMENT", " INVESTOR", " MUNICIPAL", " GROWTH", " INFLATION", " VOLATILITY", "DOW 30", "TREASURY",
    "CONTINGENT", "FLOATING", " RATE", "INDEX",
)

TICKER_SIC_HEADER = ("TICKER", "EXCH", "SIC", "SIC.NAME", "MKT.CAP")
NO_SIC_HEADER = ("TICKER", "EXCH", "MKT.CAP", "FUND.ETC", "NO.MATCH")
STATS_HEADER = ("Total", "w/ SIC", "w/o SIC", "No match", "Multiple matches", "Funds, etc.")


@dataclass(frozen=True)
class NormalizationRules:
    """Ordered (pattern, replacement) substitutions and the droppable tail tokens."""

    replacements: tuple[tuple[str, str], ...] = (
        ("D/B/A", ""),
        (".COM", " COM"),
        (",", ""),
        ("'", ""),
        (".", ""),
        (";", ""),
        ("(", ""),
        (")", ""),
        ("/", " "),
        ("!", " "),
        ("&AMP", "AND"),
        ("&", "AND"),
        ("-", " "),
        ("CORPORATION", "CORP"),
    )
    drop_suffixes: frozenset[str] = frozenset(CORPORATE_SUFFIXES + STATE_ABBREVIATIONS)
    drop_leading_the: bool = True


DEFAULT_RULES = NormalizationRules()
_SPACES = re.compile(" +")


def _light(name: str, rules: NormalizationRules) -> str:
    text = name.upper()
    for old, new in rules.replacements:
        text = text.replace(old, new)
    return _SPACES.sub(" ", text).strip(" ")


def _drop_tail(text: str, rules: NormalizationRules) -> str:
    # A leading THE is only discarded together with a trailing suffix, so
    # "THE BOEING" is kept whole while "THE COCA COLA COMPANY" loses both.
    while text:
        tokens = text.split(" ")
        if rules.drop_leading_the and tokens[0] == "THE":
            tokens = tokens[1:]
        if len(tokens) > 1 and tokens[-1] in rules.drop_suffixes:
            text = " ".join(tokens[:-1])
        else:
            break
    return text


def normalize_name(name: str, rules: NormalizationRules = DEFAULT_RULES, drop_last: bool = False) -> str:
    text = _light(name, rules)
    return _drop_tail(text, rules) if drop_last else text


def is_fund_like(normalized_name: str, keywords: Sequence[str] = FUND_KEYWORDS) -> bool:
    return any(k in normalized_name for k in keywords)


class MatchKind(enum.Enum):
    MATCHED = "Matched"
    NO_MATCH = "NoMatch"
    AMBIGUOUS = "Ambiguous"


@dataclass(frozen=True)
class MatchOutcome:
    kind: MatchKind
    sic: str | None = None
    industry_name: str = ""
    fund_like: bool = False


@dataclass
class SecIndex:
    """EDGAR records indexed by light and stripped normalized names.

    Looking up the stripped name directly is equivalent to scanning for
    EDGAR names that contain it and then filtering on equality, because a
    stripped name is always a contiguous token run of its light name.
    """

    light: dict[str, list[str]] = field(default_factory=dict)
    stripped: dict[str, list[str]] = field(default_factory=dict)
    sic_names: dict[str, str] = field(default_factory=dict)
    rules: NormalizationRules = DEFAULT_RULES

    @classmethod
    def build(cls, records: Iterable[CompanyRecord], sic_names: Mapping[str, str] | None = None,
              rules: NormalizationRules = DEFAULT_RULES) -> "SecIndex":
        light: dict[str, list[str]] = defaultdict(list)
        stripped: dict[str, list[str]] = defaultdict(list)
        for rec in records:
            name = normalize_name(rec.name, rules)
            _add(light, name, rec.sic)
            _add(stripped, _drop_tail(name, rules), rec.sic)
        return cls(dict(light), dict(stripped), dict(sic_names or {}), rules)

    def industry_name(self, sic: str) -> str:
        name = self.sic_names.get(sic)
        if name is None:
            log.warning("SIC %s not in the SIC code list; industry name left empty", sic)
            return ""
        return name


def _add(index: dict[str, list[str]], key: str, sic: str) -> None:
    sics = index[key]
    if sic not in sics:
        sics.append(sic)


def match_one(ticker: TickerRecord, index: SecIndex) -> MatchOutcome:
    name = normalize_name(ticker.name, index.rules)
    sics = index.light.get(name, [])
    if len(sics) == 1:
        return MatchOutcome(MatchKind.MATCHED, sics[0], index.industry_name(sics[0]))
    stripped = _drop_tail(name, index.rules)
    sics = index.stripped.get(stripped, [])
    fund = is_fund_like(stripped)
    if not sics:
        return MatchOutcome(MatchKind.NO_MATCH, fund_like=fund)
    if len(sics) > 1:
        return MatchOutcome(MatchKind.AMBIGUOUS, fund_like=fund)
    return MatchOutcome(MatchKind.MATCHED, sics[0], index.industry_name(sics[0]))


@dataclass(frozen=True)
class MatchedRow:
    ticker: str
    exchange: str
    sic: str
    sic_name: str
    market_cap: str | None

    def as_row(self):
        return (self.ticker, self.exchange, self.sic, self.sic_name, self.market_cap)


@dataclass(frozen=True)
class UnmatchedRow:
    ticker: str
    exchange: str
    market_cap: str | None
    fund_like: bool
    no_match: bool

    def as_row(self):
        return (self.ticker, self.exchange, self.market_cap, self.fund_like, self.no_match)


@dataclass(frozen=True)
class MatchStats:
    total: int
    with_sic: int
    without_sic: int
    no_match: int
    multiple: int
    fund_like: int

    def as_row(self):
        return (self.total, self.with_sic, self.without_sic, self.no_match, self.multiple, self.fund_like)

    def format(self) -> str:
        return format_table([self.as_row()], STATS_HEADER)


def run_matching(universe: TickerUniverse | Sequence[TickerRecord], edgar: Iterable[CompanyRecord],
                 sic_names: Mapping[str, str], rules: NormalizationRules = DEFAULT_RULES
                 ) -> tuple[list[MatchedRow], list[UnmatchedRow]]:
    records = universe.records if isinstance(universe, TickerUniverse) else list(universe)
    index = SecIndex.build(edgar, sic_names, rules)
    matched, unmatched = [], []
    for t in records:
        out = match_one(t, index)
        if out.kind is MatchKind.MATCHED:
            matched.append(MatchedRow(t.symbol, t.exchange, out.sic, out.industry_name, t.market_cap))
        else:
            unmatched.append(UnmatchedRow(t.symbol, t.exchange, t.market_cap, out.fund_like,
                                          out.kind is MatchKind.NO_MATCH))
    return matched, unmatched


def match_stats(matched: Sequence[MatchedRow], unmatched: Sequence[UnmatchedRow]) -> MatchStats:
    no_match = sum(r.no_match for r in unmatched)
    return MatchStats(
        total=len(matched) + len(unmatched),
        with_sic=len(matched),
        without_sic=len(unmatched),
        no_match=no_match,
        multiple=len(unmatched) - no_match,
        fund_like=sum(r.fund_like for r in unmatched),
    )


@dataclass
class ClassificationMatrix:
    """Binary ticker x industry membership matrix, one 1 per row."""

    tickers: list[str]
    columns: list[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int8)
        if self.values.shape != (len(self.tickers), len(self.columns)):
            raise ParseError(f"matrix shape {self.values.shape} does not match labels "
                             f"({len(self.tickers)} x {len(self.columns)})")

    @classmethod
    def from_assignments(cls, tickers: Sequence[str], labels: Sequence[str]) -> "ClassificationMatrix":
        if not tickers:
            raise EmptyMatrix("no rows to classify")
        columns = list(dict.fromkeys(labels))
        pos = {c: j for j, c in enumerate(columns)}
        values = np.zeros((len(tickers), len(columns)), dtype=np.int8)
        values[np.arange(len(tickers)), [pos[l] for l in labels]] = 1
        return cls(list(tickers), columns, values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def assignments(self) -> list[str]:
        """Column label of each row."""
        return [self.columns[j] for j in self.values.argmax(axis=1)]

    def column_sums(self) -> np.ndarray:
        return self.values.sum(axis=0)

    def subset(self, tickers: Sequence[str]) -> "ClassificationMatrix":
        """Rows for `tickers` (first occurrence of each label), dropping empty columns."""
        row = {}
        for i, t in enumerate(self.tickers):
            row.setdefault(t, i)
        labels = [self.assignments()[row[t]] for t in tickers]
        return ClassificationMatrix.from_assignments(list(tickers), labels)

    def format(self) -> str:
        lines = ["\t".join(self.columns)]
        for t, r in zip(self.tickers, self.values):
            lines.append("\t".join([t, *map(str, r.tolist())]))
        return "".join(line + "\n" for line in lines)

    def write(self, path: str | os.PathLike) -> Path:
        rows = [(t, *r.tolist()) for t, r in zip(self.tickers, self.values)]
        return write_table(path, rows, self.columns)


def build_matrix(matched: Sequence[MatchedRow]) -> ClassificationMatrix:
    if not matched:
        raise EmptyMatrix("no matched tickers; classification matrix would be empty")
    return ClassificationMatrix.from_assignments([r.ticker for r in matched], [r.sic for r in matched])


def read_matrix(path: str | os.PathLike) -> ClassificationMatrix:
    """Read a matrix written as column-label header + labeled 0/1 rows. A
    header with a leading empty cell (row-name column) is also accepted."""
    rows = read_table(path)
    if not rows:
        raise EmptyMatrix(f"{path}: empty classification file")
    columns = rows[0][1:] if rows[0] and rows[0][0] == "" else rows[0]
    tickers, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(columns) + 1:
            raise ParseError(f"expected {len(columns) + 1} fields, got {len(row)}", row=lineno)
        try:
            vals = [int(float(v)) for v in row[1:]]
        except ValueError as exc:
            raise ParseError(f"non-numeric entry: {exc}", row=lineno) from exc
        if any(v not in (0, 1) for v in vals):
            raise ParseError("entries must be 0 or 1", row=lineno)
        tickers.append(row[0])
        values.append(vals)
    if not tickers:
        raise EmptyMatrix(f"{path}: no rows")
    return ClassificationMatrix(tickers, columns, np.array(values))


@dataclass(frozen=True)
class MatrixSummary:
    min: float
    q1: float
    median: float
    mean: float
    q3: float
    max: float

    def as_tuple(self):
        return (self.min, self.q1, self.median, self.mean, self.q3, self.max)

    def format(self) -> str:
        names = ("Min", "1st Qu.", "Median", "Mean", "3rd Qu.", "Max")
        return format_table([[f"{v:.6g}" for v in self.as_tuple()]], names)


def summarize_counts(counts: Sequence[float]) -> MatrixSummary:
    """Six-number summary with linearly interpolated quartiles."""
    x = np.asarray(counts, dtype=float)
    if x.size == 0:
        raise EmptyMatrix("no columns to summarize")
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75], method="linear")
    return MatrixSummary(float(x.min()), float(q1), float(med), float(x.mean()), float(q3), float(x.max()))


def summarize_matrix(matrix: ClassificationMatrix) -> MatrixSummary:
    return summarize_counts(matrix.column_sums())


def write_outputs(directory: str | os.PathLike, matched: Sequence[MatchedRow],
                  unmatched: Sequence[UnmatchedRow]) -> dict[str, Path]:
    """TICKER.SIC.txt, NO.SIC.txt and (when anything matched) SIC.IND.CLASS.txt."""
    d = Path(directory)
    out = {
        "ticker_sic": write_table(d / "TICKER.SIC.txt", (r.as_row() for r in matched), TICKER_SIC_HEADER),
        "no_sic": write_table(d / "NO.SIC.txt", (r.as_row() for r in unmatched), NO_SIC_HEADER),
    }
    if matched:
        out["ind_class"] = build_matrix(matched).write(d / "SIC.IND.CLASS.txt")
    return out
