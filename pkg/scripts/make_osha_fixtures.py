#!/usr/bin/env python3
"""Render OSHA-shaped SIC manual pages from the bundled SIC.table.txt.

The pages mimic the live site's layout (one root page with division and
major-group entries, one page per major group) and are stored in the
hashed fixture layout that FixtureFetcher reads. Re-running is
deterministic.

    python scripts/make_osha_fixtures.py tests/fixtures/osha
"""

from __future__ import annotations

import argparse
import html
from itertools import groupby

from sicforge.osha import ROOT_URL, group_url
from sicforge.taxonomy import bundled_osha_table
from sicforge.transport import FixtureStore

DIVISION_LETTERS = "ABCDEFGHIJ"


def _page(title: str, body: list[str]) -> str:
    inner = "\n".join(body)
    return (
        "<!DOCTYPE html>\n<html><head><title>" + html.escape(title) + "</title></head>\n<body>\n"
        '<div id="wrapper">\n<div class="header">Occupational Safety and Health Administration</div>\n'
        f'<div id="maincontain">\n{inner}\n</div>\n</div>\n</body></html>\n'
    )


def render(tax) -> tuple[str, dict[str, str]]:
    rows = list(tax.nodes.values())
    root_body = ['<div class="page-title">SIC Division Structure</div>', "<div>"]
    group_pages: dict[str, str] = {}
    page_id = 0
    divisions = [name for name, _ in groupby(rows, key=lambda n: n.division_name)]
    for letter, (division, members) in zip(DIVISION_LETTERS, groupby(rows, key=lambda n: n.division_name)):
        root_body.append(f"<div><strong>Division {letter}: {html.escape(division)}</strong></div>")
        root_body.append("<ul>")
        for major_prefix, majors in groupby(members, key=lambda n: n.code[:2]):
            majors = list(majors)
            page_id += 1
            label = f"Major Group {major_prefix}: {majors[0].major_group_name}"
            link = f"sic_manual.display?id={page_id}&amp;tab=group"
            root_body.append(f'<li><div><a href="{link}" title="{html.escape(label)}">{html.escape(label)}</a></div></li>')
            body = [f'<div class="page-title">{html.escape(label)}</div>']
            for group_prefix, inds in groupby(majors, key=lambda n: n.code[:3]):
                inds = list(inds)
                body.append(f"<div><strong>Industry Group {group_prefix}: {html.escape(inds[0].industry_group_name)}</strong></div>")
                body.append("<div><ul>")
                for node in inds:
                    body.append(
                        f'<li><a href="sic_manual.display?id={node.code}&amp;tab=description">{node.code}</a> '
                        f"{html.escape(node.industry_name)}</li>"
                    )
                body.append("</ul></div>")
            body.append('<div class="footer"><a href="sic_manual.html">SIC Search</a> | <a href="sic_manual.html">Division Structure</a></div>')
            body.append("<div>SIC Search Division Structure</div>")
            group_pages[str(page_id)] = _page(label, body)
        root_body.append("</ul>")
    assert len(divisions) == len(DIVISION_LETTERS)
    root_body.append("</div>")
    return _page("SIC Manual", root_body), group_pages


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir")
    args = ap.parse_args(argv)
    root, groups = render(bundled_osha_table())
    store = FixtureStore(args.outdir)
    store.save(ROOT_URL, root)
    for page_id, text in groups.items():
        store.save(group_url(page_id), text)
    print(f"wrote {1 + len(groups)} pages to {args.outdir}")


if __name__ == "__main__":
    main()
