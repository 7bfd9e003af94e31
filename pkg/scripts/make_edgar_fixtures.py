#!/usr/bin/env python3
"""Write EDGAR-shaped listing/detail pages and their golden record files.

Golden TSVs are written directly from the source lists below (never via
the parser), so parser tests compare against an independent transcription.

    python scripts/make_edgar_fixtures.py tests/fixtures
"""

from __future__ import annotations

import argparse
import html
import random
from pathlib import Path

from sicforge.edgar import DOWNLOAD_HEADER, build_query_url
from sicforge.tables import write_table
from sicforge.transport import FixtureStore

REAL_7372 = [
    ("0000789019", "MICROSOFT CORP", "WA"),
    ("0001341439", "ORACLE CORP", "TX"),
    ("0000796343", "ADOBE INC.", "CA"),
    ("0000769397", "AUTODESK, INC.", "CA"),
    ("0000896878", "INTUIT INC", "CA"),
    ("0001108524", "SALESFORCE COM INC", "CA"),
    ("0000883241", "SYNOPSYS INC", "CA"),
    ("0000813672", "CADENCE DESIGN SYSTEMS INC", "CA"),
    ("0001660134", "OKTA, INC.", "CA"),
    ("0001373715", "SERVICENOW, INC.", "CA"),
    ("0001441816", "MONGODB, INC.", "NY"),
    ("0001579878", "SAP SE", "2M"),
    ("0001000184", "CHECK POINT SOFTWARE TECHNOLOGIES LTD", "L3"),
    ("0001094285", "OPEN TEXT CORP", "A6"),
]
STATES = ["CA", "NY", "TX", "MA", "WA", "NJ", "FL", "CO", "GA", "VA", "IL", "UT"]
ODD_LOCATIONS = ["E6", "L4", "I8", "X9", "U2", "LO"]
STEMS = ["ARC", "BYTE", "CLOUD", "DATA", "ECHO", "FLUX", "GRID", "HEX", "ION", "JADE", "KITE",
         "LOGIC", "META", "NOVA", "OPTI", "PIXEL", "QUANT", "RIVET", "SOLAR", "TERA", "ULTRA",
         "VECTOR", "WAVE", "XENO", "YIELD", "ZEN"]
TAILS = ["SOFT", "WARE", "LABS", "SYSTEMS", "NETWORKS", "TECHNOLOGIES", "DIGITAL", "LOGIX"]
SUFFIXES = ["INC", "CORP", "LTD", "INC.", "CO", "HOLDINGS, INC.", "LLC", "GROUP INC"]

SHORT_2834 = [
    ("0000078003", "PFIZER INC", "NY"),
    ("0000310158", "MERCK & CO., INC.", "NJ"),
    ("0000059478", "ELI LILLY & CO", "IN"),
    ("0000200406", "JOHNSON & JOHNSON", "NJ"),
    ("0000014272", "BRISTOL MYERS SQUIBB CO", "NY"),
    ("0001551152", "ABBVIE INC.", "IL"),
    ("0000318154", "AMGEN INC", "CA"),
    ("0000882095", "GILEAD SCIENCES, INC.", "CA"),
    ("0000310764", "STRYKER  CORP", "MI"),
    ("0001800000", "ACME  PHARMA   HOLDINGS INC", ""),
    ("0000899866", "ALEXION PHARMACEUTICALS INC", "MA"),
    ("0001000999", "NOVO-PHARMA A/S", "G7"),
]


def company_rows_7372() -> list[tuple[str, str, str]]:
    rng = random.Random(7372)
    rows = list(REAL_7372)
    seen = {r[1] for r in rows}
    cik = 1600000
    while len(rows) < 137:
        name = f"{rng.choice(STEMS)}{rng.choice(TAILS)} {rng.choice(SUFFIXES)}"
        if name in seen:
            continue
        seen.add(name)
        cik += rng.randint(1, 5000)
        loc = rng.choice(ODD_LOCATIONS) if rng.random() < 0.08 else rng.choice(STATES)
        rows.append((f"{cik:010d}", name, loc))
    rows.append(("0001700001", "B&G   SOFTWARE INC", "DE"))
    rows.pop(-2)
    rows.sort(key=lambda r: (r[1], r[0]))
    return rows


def listing_page(sic: str, industry: str, rows: list[tuple[str, str, str]]) -> str:
    trs = "\n".join(
        ('<tr class="blueRow">\n' if i % 2 == 0 else "<tr>\n")
        + f'<td valign="top"><a href="/cgi-bin/browse-edgar?action=getcompany&amp;CIK={cik}&amp;owner=include&amp;count=40">{cik}</a></td>\n'
        f'<td valign="top">{html.escape(name, quote=False)}</td>\n'
        f'<td valign="top">{html.escape(loc)}</td>\n</tr>'
        for i, (cik, name, loc) in enumerate(rows)
    )
    return f"""<!DOCTYPE html>
<html>
<head><title>EDGAR Company Search Results</title></head>
<body>
<div id="headerTop"><div id="Nav"><a href="/index.htm">Home</a> | <a href="/cgi-bin/srqsb?text=form-type%3D&amp;first=1&amp;last=40">Latest Filings</a></div></div>
<div id="contentDiv">
<div style="margin: 15px 0 10px 0; padding: 3px; overflow: hidden; background-color: #BCD6F8;">
<div class="companyInfo">
<span class="companyName">SIC {sic} - {html.escape(industry)} <span style="font-weight: normal">Click on CIK to view company filings</span></span>
</div>
</div>
<div id="seriesDiv" style="margin-top: 0px;">
<table class="tableFile2" summary="Results">
<tr>
<th scope="col">CIK</th>
<th scope="col">Company</th>
<th scope="col">State/Country</th>
</tr>
{trs}
</table>
</div>
</div>
</body>
</html>
"""


def detail_page(sic: str, industry: str, cik: str, name: str, location: str | None) -> str:
    loc = (
        f'State location: <a href="/cgi-bin/browse-edgar?action=getcompany&amp;State={location}">{location}</a> | '
        if location is not None
        else ""
    )
    return f"""<!DOCTYPE html>
<html>
<head><title>EDGAR Filing Documents</title></head>
<body>
<div id="contentDiv">
<div style="margin: 15px 0 10px 0; padding: 3px; overflow: hidden; background-color: #BCD6F8;">
<div class="mailer">Mailing Address
<span class="mailerAddress">60 EAST 42ND STREET</span>
<span class="mailerAddress">NEW YORK NY 10165</span>
</div>
<div class="companyInfo">
<span class="companyName">{html.escape(name)} <acronym title="Central Index Key">CIK</acronym>#: <a href="/cgi-bin/browse-edgar?action=getcompany&amp;CIK={cik}&amp;owner=include&amp;count=40">{cik} (see all company filings)</a></span>
<p class="identInfo"><acronym title="Standard Industrial Code">SIC</acronym>: <a href="/cgi-bin/browse-edgar?action=getcompany&amp;SIC={sic}&amp;owner=include&amp;count=40">{sic}</a> - {html.escape(industry)}<br />{loc}State of Inc.: <strong>DE</strong> | Fiscal Year End: 1231<br />(Office of Real Estate &amp; Construction)<br />Get <b>insider transactions</b> for this <a href="/cgi-bin/own-disp?action=getissuer&amp;CIK={cik}">issuer</a>.
</p>
</div>
</div>
<div id="seriesDiv"><table class="tableFile2" summary="Results">
<tr><th scope="col">Filings</th><th scope="col">Format</th><th scope="col">Description</th><th scope="col">Filing Date</th></tr>
<tr><td nowrap="nowrap">10-K</td><td nowrap="nowrap"><a href="/Archives/edgar/data/65172/index.htm">Documents</a></td><td class="small">Annual report</td><td>2017-04-14</td></tr>
</table></div>
</div>
</body>
</html>
"""


EMPTY_PAGE = """<!DOCTYPE html>
<html>
<head><title>EDGAR Company Search</title></head>
<body>
<div id="contentDiv">
<h1>No matching companies.</h1>
<div>Please try another search.</div>
</div>
</body>
</html>
"""


def clean(name: str) -> str:
    return " ".join(name.split())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir")
    args = ap.parse_args(argv)
    out = Path(args.outdir)
    store = FixtureStore(out / "edgar")
    golden = out / "edgar_golden"
    pages = out / "edgar_pages"
    pages.mkdir(parents=True, exist_ok=True)

    rows = company_rows_7372()
    ind = "SERVICES-PREPACKAGED SOFTWARE"
    for start in (0, 100):
        text = listing_page("7372", ind, rows[start : start + 100])
        store.save(build_query_url("7372", start), text)
        (pages / f"list_7372_start{start}.html").write_text(text, encoding="utf-8")
    write_table(golden / "SIC_7372.tsv", ((c, clean(n), "7372", ind, l) for c, n, l in rows), DOWNLOAD_HEADER)

    ind = "PHARMACEUTICAL PREPARATIONS"
    text = listing_page("2834", ind, SHORT_2834)
    store.save(build_query_url("2834", 0), text)
    (pages / "list_2834_short.html").write_text(text, encoding="utf-8")
    write_table(golden / "SIC_2834.tsv", ((c, clean(n), "2834", ind, l) for c, n, l in SHORT_2834), DOWNLOAD_HEADER)

    ind = "MINERAL ROYALTY TRADERS"
    text = detail_page("6795", ind, "0000065172", "MESABI   TRUST", "NY")
    store.save(build_query_url("6795", 0), text)
    (pages / "detail_6795.html").write_text(text, encoding="utf-8")
    write_table(golden / "SIC_6795.tsv", [("0000065172", "MESABI TRUST", "6795", ind, "NY")], DOWNLOAD_HEADER)

    text = detail_page("6795", ind, "0000065172", "MESABI TRUST", None)
    (pages / "detail_6795_no_location.html").write_text(text, encoding="utf-8")
    (pages / "empty.html").write_text(EMPTY_PAGE, encoding="utf-8")
    store.save_default(EMPTY_PAGE)
    print(f"wrote EDGAR fixtures under {out}")


if __name__ == "__main__":
    main()
