import math
from datetime import datetime
from pathlib import Path

import pytest

from sicforge.edgar import (
    CompanyRecord, FetchLog, PageKind, ScanMode, ScanPlan, build_query_url, classify_page, log_file_name,
    parse_company_list, parse_single_company, read_download_table, scan, write_download_table, write_fetch_log,
)
from sicforge.errors import FetchError, ParseError
from sicforge.taxonomy import bundled_sec_codes
from sicforge.transport import FixtureFetcher

MSFT = CompanyRecord("0000789019", "MICROSOFT CORP", "7372", "SERVICES-PREPACKAGED SOFTWARE", "WA")


def golden(fixtures: Path, sic: str) -> list[CompanyRecord]:
    return read_download_table(fixtures / "edgar_golden" / f"SIC_{sic}.tsv")


def page(fixtures: Path, name: str) -> str:
    return (fixtures / "edgar_pages" / name).read_text(encoding="utf-8")


@pytest.mark.parametrize("sic, start, tail", [
    ("7372", 0, "SIC=7372&owner=include&match=&start=0&count=100&hidefilings=0"),
    ("7372", 100, "SIC=7372&owner=include&match=&start=100&count=100&hidefilings=0"),
    ("0111", 0, "SIC=0111&owner=include&match=&start=0&count=100&hidefilings=0"),
])
def test_build_query_url(sic, start, tail):
    assert build_query_url(sic, start) == "https://www.sec.gov/cgi-bin/browse-edgar?action=getcompany&" + tail


@pytest.mark.parametrize("start", [-100, 50])
def test_build_query_url_rejects_offsets(start):
    with pytest.raises(ValueError):
        build_query_url("7372", start)


def test_classify_pages(fixtures):
    assert classify_page(page(fixtures, "list_7372_start0.html"), "7372") is PageKind.COMPANY_LIST
    assert classify_page(page(fixtures, "detail_6795.html"), "6795") is PageKind.SINGLE_COMPANY
    assert classify_page(page(fixtures, "empty.html"), "0100") is PageKind.EMPTY


def test_multi_page_list_matches_golden(fixtures):
    first, full = parse_company_list(page(fixtures, "list_7372_start0.html"), "7372")
    second, full2 = parse_company_list(page(fixtures, "list_7372_start100.html"), "7372")
    assert full and not full2
    assert (len(first), len(second)) == (100, 37)
    assert first + second == golden(fixtures, "7372")
    assert MSFT in first


def test_short_list_matches_golden(fixtures):
    records, full = parse_company_list(page(fixtures, "list_2834_short.html"), "2834")
    assert not full
    assert records == golden(fixtures, "2834")
    names = {r.name for r in records}
    assert "STRYKER CORP" in names and "ACME PHARMA HOLDINGS INC" in names


def test_single_company_matches_golden(fixtures):
    assert [parse_single_company(page(fixtures, "detail_6795.html"), "6795")] == golden(fixtures, "6795")


def test_single_company_missing_location(fixtures):
    with pytest.raises(ParseError):
        parse_single_company(page(fixtures, "detail_6795_no_location.html"), "6795")


def test_list_header_without_rows():
    html = "<div>SIC 7372 - SERVICES-PREPACKAGED SOFTWARE Click on CIK to view</div><table></table>"
    with pytest.raises(ParseError):
        parse_company_list(html, "7372")


def test_odd_locations_pass_through(fixtures):
    locations = {r.location for r in golden(fixtures, "7372")}
    assert {"E6", "L4"} <= locations


def fixed_clock():
    times = iter([datetime(2016, 4, 15, 12, 0, 0), datetime(2016, 4, 15, 12, 5, 0)])
    return lambda: next(times)


def test_scan_pagination_request_counts(fixtures):
    fetcher = FixtureFetcher(fixtures / "edgar")
    for sic in ("7372", "2834", "6795"):
        before = len(fetcher.requested)
        records, _ = scan(ScanPlan.listed([sic]), fetcher)
        n = len(golden(fixtures, sic))
        assert records == golden(fixtures, sic)
        assert len(fetcher.requested) - before == math.ceil(n / 100)


def test_scan_empty_code_is_one_page(fixtures):
    fetcher = FixtureFetcher(fixtures / "edgar")
    records, flog = scan(ScanPlan.listed(["0100"]), fetcher)
    assert records == [] and flog.pages_fetched == 1


def test_scan_logs_failures_and_continues(tmp_path, fixtures):
    fetcher = FixtureFetcher(fixtures / "edgar")

    class Flaky:
        def fetch(self, url):
            if "SIC=2834" in url:
                raise FetchError(url, 503)
            return fetcher.fetch(url)

    records, flog = scan(ScanPlan.listed(["2834", "6795"]), Flaky(), clock=fixed_clock())
    assert records == golden(fixtures, "6795")
    assert len(flog.failures) == 1 and flog.failures[0][1] == "503"
    path = write_fetch_log(flog, tmp_path)
    assert path.name == "log.2016-04-15.12.00.00.txt"
    lines = path.read_text().splitlines()
    assert lines[:2] == ["2016-04-15 12:00:00", "2016-04-15 12:05:00"]


def test_all_codes_plan_equals_listed_on_listed_fixtures(fixtures):
    plan_all = ScanPlan.all_codes()
    assert plan_all.mode is ScanMode.ALL_CODES and len(plan_all.codes) == 9900
    assert plan_all.codes[0] == "0100" and plan_all.codes[-1] == "9999"
    listed = ScanPlan.listed(bundled_sec_codes())
    assert listed.mode is ScanMode.LISTED_CODES and len(listed.codes) == 448
    f_all, f_listed = FixtureFetcher(fixtures / "edgar"), FixtureFetcher(fixtures / "edgar")
    rec_all, _ = scan(plan_all, f_all)
    rec_listed, _ = scan(listed, f_listed)
    assert sorted(r.as_row() for r in rec_all) == sorted(r.as_row() for r in rec_listed)
    assert len(f_listed.requested) < len(f_all.requested)


def test_scan_records_carry_query_code(fixtures):
    records, _ = scan(ScanPlan.listed(["7372", "2834", "6795"]), FixtureFetcher(fixtures / "edgar"))
    assert [r.sic for r in records] == ["7372"] * 137 + ["2834"] * 12 + ["6795"]


def test_download_table_round_trip(tmp_path, fixtures):
    records = golden(fixtures, "7372") + golden(fixtures, "2834")
    path = write_download_table(records, tmp_path / "SIC.Download.txt")
    assert read_download_table(path) == records
    one = write_download_table([MSFT], tmp_path / "one.txt").read_text()
    assert one == "CIK\tName\tSIC\tIndustry\tLocation\n0000789019\tMICROSOFT CORP\t7372\tSERVICES-PREPACKAGED SOFTWARE\tWA\n"
    assert write_download_table([], tmp_path / "none.txt").read_text() == "CIK\tName\tSIC\tIndustry\tLocation\n"


def test_log_file_name():
    assert log_file_name(datetime(2016, 1, 2, 3, 4, 5)) == "log.2016-01-02.03.04.05.txt"
    assert FetchLog(datetime(2016, 1, 1)).format().startswith("2016-01-01 00:00:00\n")
