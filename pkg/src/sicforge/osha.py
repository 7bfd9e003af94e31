"""Crawl the OSHA SIC manual into a Taxonomy.

The root page lists "Division X: <name>" and "Major Group NN: <name>"
entries between the "SIC Division Structure" heading and the last major
group ("Major Group 99"). Each major group links to a page
(`sic_manual.display?id=<id>&tab=group`) listing "Industry Group NNN:
<name>" headings followed by "NNNN <industry>" lines, terminated by the
"SIC Search Division Structure" footer.
"""

from __future__ import annotations

import re

from .errors import StructureError
from .htmltext import element_lines, find_links
from .taxonomy import Taxonomy, TaxonomyNode, canonicalize, is_canonical, level_of
from .transport import PageFetcher

OSHA_BASE = "https://www.osha.gov/pls/imis/"
ROOT_URL = OSHA_BASE + "sic_manual.html"
ROOT_START = "SIC Division Structure"
ROOT_END = "Major Group 99"
GROUP_END = "SIC Search Division Structure"

_DIVISION = re.compile(r"^Division ([A-Z]): (.+)$")
_MAJOR = re.compile(r"^Major Group (\d{2}): (.+)$")
_GROUP = re.compile(r"^Industry Group (\d{3}): ?(.*)$")
_INDUSTRY = re.compile(r"^(\d{4}) (.+)$")
_ID = re.compile(r"id=([^&]+)&")


def group_url(page_id: str) -> str:
    return f"{OSHA_BASE}sic_manual.display?id={page_id}&tab=group"


def _first(lines: list[str], predicate) -> int | None:
    for i, line in enumerate(lines):
        if predicate(line):
            return i
    return None


def parse_root_page(html: str) -> list[tuple[str, str, str, str]]:
    """(major code, division name, major group name, page id) per major group."""
    lines = element_lines(html)
    start = _first(lines, lambda s: ROOT_START in s)
    end = _first(lines, lambda s: s.startswith(ROOT_END))
    if start is None:
        raise StructureError(f"anchor {ROOT_START!r} not found on root page")
    if end is None:
        raise StructureError(f"anchor {ROOT_END!r} not found on root page")
    ids = {}
    for href, text in find_links(html):
        m = _MAJOR.match(text)
        idm = _ID.search(href or "")
        if m and idm:
            ids.setdefault(m.group(1), idm.group(1))
    out = []
    division = ""
    for line in lines[start + 1 : end + 1]:
        if m := _DIVISION.match(line):
            division = m.group(2).strip()
        elif m := _MAJOR.match(line):
            code = m.group(1)
            if code not in ids:
                raise StructureError(f"no group-page link for Major Group {code}")
            out.append((code, division, m.group(2).strip(), ids[code]))
    return out


def parse_group_page(html: str, major: str) -> list[tuple[str, str, str]]:
    """(code, industry group name, industry name) rows of one major-group page."""
    lines = element_lines(html)
    start = _first(lines, lambda s: (m := _GROUP.match(s)) is not None and m.group(1).startswith(major))
    end = _first(lines, lambda s: GROUP_END in s)
    if start is None:
        raise StructureError(f"no 'Industry Group {major}..' heading on the Major Group {major} page")
    if end is None or end < start:
        raise StructureError(f"anchor {GROUP_END!r} not found on the Major Group {major} page")
    rows = []
    group = ""
    for line in lines[start:end]:
        if m := _GROUP.match(line):
            group = m.group(2).strip()
        elif m := _INDUSTRY.match(line):
            rows.append((m.group(1), group, m.group(2).strip()))
    return rows


def fetch_osha_taxonomy(transport: PageFetcher) -> Taxonomy:
    root = transport.fetch(ROOT_URL)
    tax = Taxonomy()
    for major, division, major_name, page_id in parse_root_page(root):
        page = transport.fetch(group_url(page_id))
        for code, group, industry in parse_group_page(page, major):
            if not is_canonical(code):
                code = canonicalize(code)
            if code in tax.nodes:
                raise StructureError(f"SIC code {code} listed twice")
            tax.nodes[code] = TaxonomyNode(code, level_of(code), division, major_name, group, industry)
    return tax
