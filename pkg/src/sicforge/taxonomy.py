"""SIC hierarchy: code arithmetic, the tab-delimited taxonomy table, and the
SEC amendments.

Codes are always carried as 4-character zero-padded strings. Major Groups
are labeled XY00, Industry Groups XYZ0 and Industries XYZW; Divisions only
exist as names on the rows.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable

from .errors import InvalidCode, NoParent, ParseError
from .tables import format_table, write_table

NON_CONFORMING = frozenset({"0888", "8880", "8888"})
SEC_TAG = " (SEC)"
TABLE_HEADER = ("Code", "Division", "Major Group", "Industry Group", "Industry")


class Level(enum.Enum):
    DIVISION = "Division"
    MAJOR_GROUP = "MajorGroup"
    INDUSTRY_GROUP = "IndustryGroup"
    INDUSTRY = "Industry"
    NON_CONFORMING = "NonConforming"


def canonicalize(code: int | str) -> str:
    """Zero-pad a SIC code to 4 characters; 111 -> "0111"."""
    if isinstance(code, bool):
        raise InvalidCode(f"not a SIC code: {code!r}")
    if isinstance(code, int):
        value = code
    elif isinstance(code, str):
        text = code.strip()
        if not text.isascii() or not text.isdigit():
            raise InvalidCode(f"not a SIC code: {code!r}")
        value = int(text)
    else:
        raise InvalidCode(f"not a SIC code: {code!r}")
    if not 100 <= value <= 9999:
        raise InvalidCode(f"SIC code out of range [100, 9999]: {code!r}")
    return f"{value:04d}"


def is_canonical(code: str) -> bool:
    return isinstance(code, str) and len(code) == 4 and code.isascii() and code.isdigit() and int(code) >= 100


def _require_canonical(code: str) -> str:
    if not is_canonical(code):
        raise InvalidCode(f"non-canonical SIC code: {code!r}")
    return code


def level_of(code: str, overrides: Iterable[str] = NON_CONFORMING) -> Level:
    _require_canonical(code)
    if code in overrides:
        return Level.NON_CONFORMING
    if code.endswith("00"):
        return Level.MAJOR_GROUP
    if code.endswith("0"):
        return Level.INDUSTRY_GROUP
    return Level.INDUSTRY


def parent_of(code: str, overrides: Iterable[str] = NON_CONFORMING) -> str | None:
    level = level_of(code, overrides)
    if level is Level.NON_CONFORMING:
        raise NoParent(f"{code} does not fit the 4-digit hierarchy")
    if level is Level.INDUSTRY:
        return code[:3] + "0"
    if level is Level.INDUSTRY_GROUP:
        return code[:2] + "00"
    return None


def ancestors(code: str, overrides: Iterable[str] = NON_CONFORMING) -> list[str]:
    """Codes above `code` up to its Major Group, nearest first.

    Overrides apply to the starting code only; the steps above it are pure
    digit arithmetic, so 8881 climbs through 8880 to 8800 even though 8880
    on its own is non-conforming. XY0W industries reach XY00 in one step.
    """
    out = []
    parent = parent_of(code, overrides)
    while parent is not None:
        out.append(parent)
        parent = parent_of(parent, ())
    return out


def group_code(code: str) -> str:
    """Industry Group XYZ0 containing `code` (itself for group/major codes' own digits)."""
    return code[:3] + "0"


def major_code(code: str) -> str:
    return code[:2] + "00"


@dataclass(frozen=True)
class TaxonomyNode:
    code: str
    level: Level
    division_name: str = ""
    major_group_name: str = ""
    industry_group_name: str = ""
    industry_name: str = ""
    sec_only: bool = False

    def as_row(self) -> tuple[str, str, str, str, str]:
        industry = self.industry_name + (SEC_TAG if self.sec_only else "")
        return (self.code, self.division_name, self.major_group_name, self.industry_group_name, industry)


@dataclass
class Taxonomy:
    nodes: dict[str, TaxonomyNode] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, code: str) -> bool:
        return code in self.nodes

    def __getitem__(self, code: str) -> TaxonomyNode:
        return self.nodes[code]

    def codes(self) -> list[str]:
        return list(self.nodes)

    def non_conforming(self) -> set[str]:
        return {c for c, n in self.nodes.items() if n.level is Level.NON_CONFORMING}

    # Group and major-group names are implicit: they live on the Industry rows.
    def major_group_name(self, code: str) -> str | None:
        prefix = code[:2]
        for node in self.nodes.values():
            if node.level is not Level.NON_CONFORMING and node.code[:2] == prefix and node.major_group_name:
                return node.major_group_name
        return None

    def division_name(self, code: str) -> str | None:
        prefix = code[:2]
        for node in self.nodes.values():
            if node.level is not Level.NON_CONFORMING and node.code[:2] == prefix and node.division_name:
                return node.division_name
        return None

    def industry_group_name(self, code: str) -> str | None:
        prefix = code[:3]
        for node in self.nodes.values():
            if node.level is not Level.NON_CONFORMING and node.code[:3] == prefix and node.industry_group_name:
                return node.industry_group_name
        return None

    def has_implicit(self, code: str) -> bool:
        """True when `code` names a group or major group already implied by stored rows."""
        level = level_of(code)
        if level is Level.MAJOR_GROUP:
            return self.major_group_name(code) is not None
        if level is Level.INDUSTRY_GROUP:
            return self.industry_group_name(code) is not None
        return False

    def serialize(self) -> str:
        return format_table((n.as_row() for n in self.nodes.values()), TABLE_HEADER)

    def write(self, path: str | os.PathLike):
        return write_table(path, (n.as_row() for n in self.nodes.values()), TABLE_HEADER)


def _node_from_row(cells: list[str], overrides: Iterable[str]) -> TaxonomyNode:
    code, division, major, group, industry = (c.strip() for c in cells)
    sec_only = industry.endswith(SEC_TAG)
    if sec_only:
        industry = industry[: -len(SEC_TAG)]
    return TaxonomyNode(
        code=code,
        level=level_of(code, overrides),
        division_name=division,
        major_group_name=major,
        industry_group_name=group,
        industry_name=industry,
        sec_only=sec_only,
    )


def parse_taxonomy_table(text: str, overrides: Iterable[str] = NON_CONFORMING) -> Taxonomy:
    """Parse the 5-column tab-delimited SIC table.

    A row whose first column is not numeric is treated as a header and
    skipped. Codes must already be canonical.
    """
    overrides = frozenset(overrides)
    tax = Taxonomy()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split("\t")
        first = cells[0].strip()
        if not first.isdigit():
            continue
        if len(cells) != 5:
            raise ParseError(f"expected 5 tab-separated columns, got {len(cells)}", row=lineno)
        if not is_canonical(first):
            raise ParseError(f"non-canonical SIC code {first!r}", row=lineno)
        if first in tax.nodes:
            raise ParseError(f"duplicate SIC code {first}", row=lineno)
        node = _node_from_row(cells, overrides)
        if node.level is Level.INDUSTRY and not all(
            (node.division_name, node.major_group_name, node.industry_group_name, node.industry_name)
        ):
            raise ParseError(f"industry {first} is missing hierarchy names", row=lineno)
        tax.nodes[first] = node
    return tax


def read_taxonomy(path: str | os.PathLike) -> Taxonomy:
    with open(path, encoding="utf-8") as fh:
        return parse_taxonomy_table(fh.read())


def parse_sec_codes(text: str) -> list[tuple[str, str]]:
    """Parse the 2-column SEC code list (code TAB industry name, no header)."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) != 2:
            raise ParseError(f"expected 2 tab-separated columns, got {len(cells)}", row=lineno)
        try:
            code = canonicalize(cells[0])
        except InvalidCode as exc:
            raise ParseError(str(exc), row=lineno) from exc
        out.append((code, cells[1].strip()))
    return out


def read_sec_codes(path: str | os.PathLike) -> list[tuple[str, str]]:
    with open(path, encoding="utf-8") as fh:
        return parse_sec_codes(fh.read())


def amend_with_sec_codes(tax: Taxonomy, sec_list: Iterable[tuple[str, str]]) -> Taxonomy:
    """Add SEC-only codes to a taxonomy, returning a new Taxonomy.

    Group and major-group codes whose names are already implied by the
    existing rows are not added as rows of their own. New rows inherit
    ancestor names from the containing group where those can be derived.
    """
    out = Taxonomy(dict(tax.nodes))
    for code, name in sec_list:
        if code in out.nodes or tax.has_implicit(code):
            continue
        level = level_of(code)
        if level is Level.NON_CONFORMING:
            node = TaxonomyNode(code, level, industry_name=name, sec_only=True)
        else:
            group = tax.industry_group_name(code) or ""
            if not group and level is Level.INDUSTRY_GROUP:
                group = name
            node = TaxonomyNode(
                code,
                level,
                division_name=tax.division_name(code) or "",
                major_group_name=tax.major_group_name(code) or "",
                industry_group_name=group,
                industry_name=name,
                sec_only=True,
            )
        out.nodes[code] = node
    out.nodes = dict(sorted(out.nodes.items(), key=lambda kv: (kv[1].level is Level.NON_CONFORMING, kv[0])))
    return out


def sic_name_map(sec_list: Iterable[tuple[str, str]]) -> dict[str, str]:
    return {code: name for code, name in sec_list}


def sic_level_maps(codes: Iterable[str]) -> list[dict[str, str]]:
    """Coarsening maps for a set of SIC column codes: Industry -> Industry
    Group -> Major Group. Non-conforming codes map to themselves."""
    to_group = {c: (c if c in NON_CONFORMING else group_code(c)) for c in codes}
    to_major = {g: (g if g in NON_CONFORMING else major_code(g)) for g in to_group.values()}
    return [to_group, to_major]


def _load_bundled(name: str) -> str:
    return resources.files("sicforge").joinpath("data", name).read_text(encoding="utf-8")


def bundled_osha_table() -> Taxonomy:
    """The OSHA-derived table, without SEC-only rows."""
    return parse_taxonomy_table(_load_bundled("SIC.table.txt"))


def bundled_amended_table() -> Taxonomy:
    """The full table with SEC-only rows marked."""
    return parse_taxonomy_table(_load_bundled("SIC.Amended.txt"))


def bundled_sec_codes() -> list[tuple[str, str]]:
    return parse_sec_codes(_load_bundled("SIC.Codes.txt"))
