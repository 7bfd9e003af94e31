"""EDGAR company-by-SIC listing scrape.

For every SIC code the browse-edgar listing is requested 100 rows at a
time. A page is one of three kinds: a company list (header "SIC <code> -
<industry>" plus a table of CIK / name / location rows), a single-company
detail page (EDGAR redirects there when only one filer carries the code),
or neither. Paging continues while a list page is full.
"""

from __future__ import annotations

import enum
import logging
import os
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable

from .errors import FetchError, ParseError
from .htmltext import clean_line, element_lines, table_rows
from .tables import read_table, write_table
from .taxonomy import canonicalize
from .transport import PageFetcher

log = logging.getLogger(__name__)

PAGE_SIZE = 100
DOWNLOAD_HEADER = ("CIK", "Name", "SIC", "Industry", "Location")
URL_TEMPLATE = (
    "https://www.sec.gov/cgi-bin/browse-edgar?action=getcompany&SIC={sic}"
    "&owner=include&match=&start={start}&count={count}&hidefilings=0"
)
LIST_TAIL = " Click on CIK"
CIK_MARKER = "CIK#: "
LOCATION_MARKER = "State location: "


@dataclass(frozen=True)
class CompanyRecord:
    cik: str
    name: str
    sic: str
    industry_name: str
    location: str

    def as_row(self) -> tuple[str, str, str, str, str]:
        return (self.cik, self.name, self.sic, self.industry_name, self.location)


class PageKind(enum.Enum):
    COMPANY_LIST = "CompanyList"
    SINGLE_COMPANY = "SingleCompany"
    EMPTY = "Empty"


class ScanMode(enum.Enum):
    ALL_CODES = "AllCodes"
    LISTED_CODES = "ListedCodes"


@dataclass(frozen=True)
class ScanPlan:
    mode: ScanMode
    codes: tuple[str, ...]
    page_size: int = PAGE_SIZE

    @classmethod
    def all_codes(cls) -> "ScanPlan":
        return cls(ScanMode.ALL_CODES, tuple(f"{c:04d}" for c in range(100, 10000)))

    @classmethod
    def listed(cls, sec_list: Iterable[tuple[str, str]] | Iterable[str]) -> "ScanPlan":
        codes = [item[0] if isinstance(item, tuple) else item for item in sec_list]
        return cls(ScanMode.LISTED_CODES, tuple(canonicalize(c) for c in codes))


@dataclass
class FetchLog:
    start_time: datetime
    end_time: datetime | None = None
    pages_fetched: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)

    def format(self) -> str:
        lines = [str(self.start_time), str(self.end_time)]
        lines += [f"{url}\t{status}" for url, status in self.failures]
        return "".join(line + "\n" for line in lines)


def log_file_name(when: datetime) -> str:
    return "log." + when.strftime("%Y-%m-%d.%H.%M.%S") + ".txt"


def build_query_url(sic: str, start: int = 0, count: int = PAGE_SIZE) -> str:
    if start < 0 or start % PAGE_SIZE:
        raise ValueError(f"start must be a non-negative multiple of {PAGE_SIZE}: {start}")
    return URL_TEMPLATE.format(sic=sic, start=start, count=count)


def classify_page(html: str, sic: str) -> PageKind:
    lines = element_lines(html)
    if any(f"SIC {sic} - " in line for line in lines):
        return PageKind.COMPANY_LIST
    if any(f"SIC: {sic} - " in line for line in lines):
        return PageKind.SINGLE_COMPANY
    return PageKind.EMPTY


def _list_industry(lines: list[str], sic: str) -> str:
    marker = f"SIC {sic} - "
    for line in lines:
        if marker in line:
            return line.split(marker, 1)[1].split(LIST_TAIL, 1)[0].strip()
    raise ParseError(f"listing header for SIC {sic} not found")


def parse_company_list(html: str, sic: str) -> tuple[list[CompanyRecord], bool]:
    """Records from a listing page and whether the page was full."""
    industry = _list_industry(element_lines(html), sic)
    records = []
    for cells in table_rows(html):
        anchor = next((k for k, c in enumerate(cells) if c.isdigit()), None)
        if anchor is None:
            continue
        rest = cells[anchor + 1 :] + ["", ""]
        records.append(CompanyRecord(cells[anchor].zfill(10), clean_line(rest[0]), sic, industry, rest[1].strip()))
    if not records:
        raise ParseError(f"SIC {sic} listing header present but no company rows parsed")
    return records, len(records) == PAGE_SIZE


def parse_single_company(html: str, sic: str) -> CompanyRecord:
    lines = element_lines(html)
    cik_line = next((s for s in lines if CIK_MARKER in s), None)
    sic_marker = f"SIC: {sic} - "
    sic_idx = next((i for i, s in enumerate(lines) if sic_marker in s), None)
    loc_line = next((s for s in lines if LOCATION_MARKER in s), None)
    if cik_line is None:
        raise ParseError(f"marker {CIK_MARKER!r} not found on SIC {sic} detail page")
    if sic_idx is None:
        raise ParseError(f"marker {sic_marker!r} not found on SIC {sic} detail page")
    if loc_line is None:
        raise ParseError(f"marker {LOCATION_MARKER!r} not found on SIC {sic} detail page")
    name, _, after = cik_line.partition(CIK_MARKER)
    cik = after.split(" ", 1)[0]
    if not cik.isdigit():
        raise ParseError(f"non-numeric CIK {cik!r} on SIC {sic} detail page")
    industry = lines[sic_idx].split(sic_marker, 1)[1].split(LOCATION_MARKER, 1)[0].strip()
    location = (loc_line.split(LOCATION_MARKER, 1)[1].split(" ") + [""])[0]
    return CompanyRecord(cik.zfill(10), clean_line(name), sic, industry, location)


def scan_code(sic: str, transport: PageFetcher, fetch_log: FetchLog) -> list[CompanyRecord]:
    records: list[CompanyRecord] = []
    start = 0
    while True:
        url = build_query_url(sic, start)
        try:
            page = transport.fetch(url)
        except FetchError as exc:
            log.warning("%s", exc)
            fetch_log.failures.append((url, str(exc.status)))
            return records
        fetch_log.pages_fetched += 1
        try:
            kind = classify_page(page, sic)
            if kind is PageKind.COMPANY_LIST:
                page_records, full = parse_company_list(page, sic)
                records.extend(page_records)
                if not full:
                    return records
            elif kind is PageKind.SINGLE_COMPANY:
                records.append(parse_single_company(page, sic))
                return records
            else:
                return records
        except ParseError as exc:
            log.warning("%s: %s", url, exc)
            fetch_log.failures.append((url, f"parse: {exc}"))
            return records
        start += PAGE_SIZE


def scan(plan: ScanPlan, transport: PageFetcher, clock=datetime.now) -> tuple[list[CompanyRecord], FetchLog]:
    fetch_log = FetchLog(start_time=clock())
    records: list[CompanyRecord] = []
    for sic in plan.codes:
        log.info("Processing %s", sic)
        records.extend(scan_code(sic, transport, fetch_log))
    fetch_log.end_time = clock()
    return records, fetch_log


def write_download_table(records: Iterable[CompanyRecord], path: str | os.PathLike) -> Path:
    return write_table(path, (r.as_row() for r in records), DOWNLOAD_HEADER)


def read_download_table(path: str | os.PathLike) -> list[CompanyRecord]:
    rows = read_table(path)
    if rows and rows[0][0] == DOWNLOAD_HEADER[0]:
        rows = rows[1:]
    out = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 5:
            raise ParseError(f"expected 5 columns, got {len(row)}", row=lineno)
        out.append(CompanyRecord(*row))
    return out


def write_fetch_log(fetch_log: FetchLog, directory: str | os.PathLike) -> Path:
    path = Path(directory) / log_file_name(fetch_log.start_time)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(fetch_log.format(), encoding="utf-8")
    return path
