"""End-to-end acceptance checks, one group per criterion, at the stated
tolerances. A PASS/FAIL line per criterion is printed in the terminal
summary (see conftest.py)."""

import math
import random
import time

import numpy as np
import pytest
from scipy.stats import binomtest

from oracles import SharpeOracle, random_instance
from sicforge.backtest import BacktestConfig, Classification, daily_pnl, horserace, run_backtest
from sicforge.cli import cmd_backtest, synthetic_inputs
from sicforge.config import load_config
from sicforge.edgar import (
    CompanyRecord, ScanPlan, parse_company_list, parse_single_company, read_download_table, scan,
)
from sicforge.matcher import (
    MatchKind, SecIndex, build_matrix, match_one, normalize_name, run_matching, summarize_matrix,
)
from sicforge.optimizer import optimize_holdings
from sicforge.riskmodel import ReturnsPanel, build_heterotic, first_pc, sample_correlation
from sicforge.synthetic import SyntheticConfig, fine_and_coarse, synthetic_panel
from sicforge.taxonomy import (
    NON_CONFORMING, Level, ancestors, bundled_amended_table, bundled_osha_table, bundled_sec_codes, level_of,
    parent_of, sic_name_map, _load_bundled,
)
from sicforge.tickers import TickerRecord, load_universe
from sicforge.transport import FixtureFetcher
from test_matcher import load_corpus


def data_rows(name):
    return [ln for ln in _load_bundled(name).splitlines() if ln.strip() and ln.split("\t")[0].strip().isdigit()]


# --- 1. taxonomy round-trip -------------------------------------------------

@pytest.mark.criterion(1, "taxonomy table round-trip, non-conforming set, parent chains (< 1 s)")
def test_c1_taxonomy_roundtrip():
    t0 = time.perf_counter()
    amended = bundled_amended_table()
    osha = bundled_osha_table()
    assert len(amended) == len(data_rows("SIC.Amended.txt"))
    assert len(osha) == len(data_rows("SIC.table.txt"))
    assert amended.non_conforming() == {"0888", "8880", "8888"}
    assert osha.non_conforming() == set()
    for tax in (osha, amended):
        industries = [c for c in tax.codes() if tax[c].level is Level.INDUSTRY]
        assert industries
        for code in industries:
            group = parent_of(code)
            major = parent_of(group) if level_of(group) is Level.INDUSTRY_GROUP else group
            assert parent_of(major) is None and level_of(major) is Level.MAJOR_GROUP
            assert tax.industry_group_name(group) and tax.major_group_name(major)
    assert amended.serialize().splitlines()[1:] == [r.rstrip("\r") for r in data_rows("SIC.Amended.txt")]
    assert time.perf_counter() - t0 < 1.0


# --- 2. exhaustive code arithmetic ------------------------------------------

@pytest.mark.criterion(2, "exhaustive level/parent arithmetic over 0100-9999 (< 1 s)")
def test_c2_code_arithmetic():
    t0 = time.perf_counter()
    counts = dict.fromkeys(Level, 0)
    for value in range(100, 10000):
        code = f"{value:04d}"
        level = level_of(code)
        counts[level] += 1
        expected = (Level.NON_CONFORMING if code in NON_CONFORMING else Level.MAJOR_GROUP if value % 100 == 0
                    else Level.INDUSTRY_GROUP if value % 10 == 0 else Level.INDUSTRY)
        assert level is expected
        if level is Level.NON_CONFORMING:
            continue
        chain = ancestors(code)
        assert len(chain) == {Level.INDUSTRY: 1 if code[2] == "0" else 2, Level.INDUSTRY_GROUP: 1,
                              Level.MAJOR_GROUP: 0}[level]
        assert not chain or level_of(chain[-1], ()) is Level.MAJOR_GROUP
        assert chain[:1] == ([] if level is Level.MAJOR_GROUP else [parent_of(code)])
    assert sum(counts.values()) == 9900
    assert counts[Level.NON_CONFORMING] == 3 and counts[Level.MAJOR_GROUP] == 99
    assert time.perf_counter() - t0 < 1.0


# --- 3. EDGAR goldens and pagination ----------------------------------------

MSFT = CompanyRecord("0000789019", "MICROSOFT CORP", "7372", "SERVICES-PREPACKAGED SOFTWARE", "WA")


@pytest.mark.criterion(3, "EDGAR pages match goldens (Microsoft included); ceil(n/100) requests per code")
def test_c3_edgar_goldens(fixtures):
    page = lambda name: (fixtures / "edgar_pages" / name).read_text(encoding="utf-8")  # noqa: E731
    golden = lambda sic: read_download_table(fixtures / "edgar_golden" / f"SIC_{sic}.tsv")  # noqa: E731
    a, _ = parse_company_list(page("list_7372_start0.html"), "7372")
    b, _ = parse_company_list(page("list_7372_start100.html"), "7372")
    assert a + b == golden("7372") and MSFT in golden("7372")
    assert parse_company_list(page("list_2834_short.html"), "2834")[0] == golden("2834")
    assert [parse_single_company(page("detail_6795.html"), "6795")] == golden("6795")
    fetcher = FixtureFetcher(fixtures / "edgar")
    for sic in ("7372", "2834", "6795"):
        before = len(fetcher.requested)
        records, _ = scan(ScanPlan.listed([sic]), fetcher)
        assert records == golden(sic)
        assert len(fetcher.requested) - before == math.ceil(len(records) / 100)


# --- 4. normalization corpus and idempotence ---------------------------------

def index(*records):
    return SecIndex.build([CompanyRecord(f"{i:010d}", n, s, "", "") for i, (n, s) in enumerate(records)],
                          sic_name_map(bundled_sec_codes()))


ALPHABET = list("abcdefgXYZ0189 &-.,'/!;()*#@\"\\") + ["é", "ß", "Ω", "\t", " "]
WORDS = ["Inc", " INC.", " CORP", " Corporation", "THE ", " CO", " LTD", "&amp;", "D/B/A", ".com", " NY",
         " /DE/", " Holdings", " Trust", " FUND", " L.P.", " PLC", "  "]


def random_name(rng):
    parts = [rng.choice(WORDS) if rng.random() < 0.4 else rng.choice(ALPHABET) for _ in range(rng.randint(0, 20))]
    return "".join(parts)


@pytest.mark.criterion(4, "50-name golden corpus, forced NoMatch and Ambiguous, idempotence over 10^4 strings")
def test_c4_normalization(fixtures):
    rows = load_corpus(fixtures)
    assert len(rows) == 50
    for r in rows:
        assert normalize_name(r["name"]) == r["light"]
        assert normalize_name(r["name"], drop_last=True) == r["stripped"]
    assert normalize_name("Microsoft Corporation", drop_last=True) == "MICROSOFT"
    assert normalize_name("The Coca-Cola Company", drop_last=True) == "COCA COLA"
    tk = lambda name: TickerRecord("T", "N", name, "$1B", 1.0)  # noqa: E731
    assert match_one(tk("ETRADE Financial Corp"), index(("E*TRADE FINANCIAL CORP", "6211"))).kind is MatchKind.NO_MATCH
    banks = index(("FIRST BANCORP /NC/", "6022"), ("FIRST BANCORP /ME/", "6035"))
    assert match_one(tk("First Bancorp"), banks).kind is MatchKind.AMBIGUOUS
    rng = random.Random(20240501)
    for _ in range(10_000):
        name = random_name(rng)
        for drop in (False, True):
            once = normalize_name(name, drop_last=drop)
            assert normalize_name(once, drop_last=drop) == once, name


# --- 5. fixture pipeline matrix ---------------------------------------------

@pytest.mark.criterion(5, "fixture pipeline matrix: rows sum to 1, one column per SIC, six-number summary")
def test_c5_pipeline_matrix(fixtures):
    uni = load_universe(fixtures / "pipeline")
    matched, _ = run_matching(uni, read_download_table(fixtures / "pipeline" / "SIC.Download.txt"),
                              sic_name_map(bundled_sec_codes()))
    m = build_matrix(matched)
    assert np.all(m.values.sum(axis=1) == 1)
    assert len(m.columns) == len({r.sic for r in matched}) == 9
    # column sums 3,1,1,1,1,3,1,1,2 -> sorted 1,1,1,1,1,1,2,3,3
    assert summarize_matrix(m).as_tuple() == pytest.approx((1, 1, 1, 14 / 9, 2, 3), abs=1e-12)


# --- 6. risk model -----------------------------------------------------------

def oriented(v):
    """Sign convention: positive sum; for a zero sum, first nonzero entry positive."""
    s = v.sum()
    if abs(s) > 1e-9:
        return v if s > 0 else -v
    return v if v[np.flatnonzero(np.abs(v) > 1e-12)[0]] > 0 else -v


@pytest.mark.criterion(6, "risk model: first PC vs eigh, PSD probes, noiseless recovery")
def test_c6a_first_pc_vs_eigh():
    rng = np.random.default_rng(6)
    for k in range(100):
        n = 1 + k % 20
        c = sample_correlation(rng.normal(size=(n, n + 5 + int(rng.integers(0, 30)))))
        vals, vecs = np.linalg.eigh(c)
        ref = oriented(vecs[:, -1])
        assert np.max(np.abs(first_pc(c) - ref)) <= 1e-10


@pytest.mark.criterion(6, "risk model: first PC vs eigh, PSD probes, noiseless recovery")
def test_c6b_psd_probes():
    panel, labels = synthetic_panel(SyntheticConfig(n_industries=8, per_industry=5, n_days=60), seed=6)
    x = np.log(panel.close[:, 1:] / panel.close[:, :-1])[:, -21:][:, ::-1]
    model = build_heterotic(ReturnsPanel(panel.tickers, list(range(21, 0, -1)), x), labels, lookback=21)
    g = model.gamma()
    rng = np.random.default_rng(66)
    for _ in range(1000):
        v = rng.normal(size=len(g))
        v /= np.linalg.norm(v)
        assert v @ g @ v >= -1e-10


@pytest.mark.criterion(6, "risk model: first PC vs eigh, PSD probes, noiseless recovery")
def test_c6c_noiseless_recovery():
    rng = np.random.default_rng(60)
    k, per, T = 4, 5, 200
    a = rng.normal(size=(k, k))
    phi = 1e-4 * (a @ a.T / k + 0.5 * np.eye(k))
    f = rng.normal(size=(k, T))
    f -= f.mean(axis=1, keepdims=True)
    w = np.linalg.cholesky(np.cov(f, ddof=1))
    f = np.linalg.cholesky(phi) @ np.linalg.solve(w, f)  # sample covariance is exactly phi
    beta = rng.uniform(0.5, 1.5, size=k * per)
    load = np.zeros((k * per, k))
    load[np.arange(k * per), np.repeat(np.arange(k), per)] = beta
    x = load @ f
    truth = load @ phi @ load.T
    tickers = [f"T{i:02d}" for i in range(k * per)]
    labels = {t: f"I{i // per}" for i, t in enumerate(tickers)}
    model = build_heterotic(ReturnsPanel(tickers, list(range(T, 0, -1)), x), labels, add_market=False, lookback=T)
    err = np.linalg.norm(model.gamma() - truth) / np.linalg.norm(truth)
    assert err < 0.05


# --- 7. optimizer vs brute-force oracle ---------------------------------------

@pytest.mark.criterion(7, "optimizer matches brute-force oracle on 200 instances, constraints to 1e-6 (< 30 s)")
def test_c7_optimizer_oracle():
    rng = np.random.default_rng(7)
    oracles = {n: SharpeOracle(n) for n in range(2, 7)}
    t0 = time.perf_counter()
    for _ in range(200):
        n = int(rng.integers(2, 7))
        investment = float(rng.uniform(1e5, 1e7))
        alpha, gamma, bounds = random_instance(rng, n, investment)
        res = optimize_holdings(alpha, gamma, bounds, investment)
        val, _ = oracles[n].solve(alpha, gamma, bounds, investment)
        assert abs(res.sharpe - val) <= 1e-6 * max(1.0, abs(val))
        h = res.h
        assert abs(h.sum()) <= 1e-6 * investment
        assert abs(np.abs(h).sum() - investment) <= 1e-6 * investment
        assert np.all(np.abs(h) <= bounds * (1 + 1e-6))
    assert time.perf_counter() - t0 < 30.0


# --- 8. backtest accounting ---------------------------------------------------

ACC = SyntheticConfig(n_industries=2, per_industry=5, n_days=100)
ACC_CFG = BacktestConfig(top_n=10, investment=1e6)


@pytest.fixture(scope="module")
def acc_run():
    panel, labels = synthetic_panel(ACC, seed=8)
    cls = Classification("fine", labels)
    return panel, cls, run_backtest(panel, cls, ACC_CFG)


@pytest.mark.criterion(8, "CPS identity, P&L linearity, look-ahead poisoning on 10 tickers x 100 days")
def test_c8_cps_identity(acc_run):
    _, _, rep = acc_run
    assert len(rep.dates) > 0 and rep.shares.sum() > 0
    assert rep.cps == 100.0 * float(np.sum(rep.pnl)) / float(np.sum(rep.shares))


@pytest.mark.criterion(8, "CPS identity, P&L linearity, look-ahead poisoning on 10 tickers x 100 days")
def test_c8_linearity(acc_run):
    panel, cls, rep = acc_run
    # doubling the book and the bound fraction scales every position, and so every P&L, by exactly 2
    cfg2 = BacktestConfig(top_n=10, investment=2 * ACC_CFG.investment, bound_fraction=2 * ACC_CFG.bound_fraction)
    rep2 = run_backtest(panel, cls, cfg2)
    assert np.array_equal(rep2.pnl, 2 * rep.pnl)
    assert np.array_equal(rep2.shares, 2 * rep.shares)
    for (_, h), t in zip(rep.holdings, rep.dates):
        col = panel.dates.index(t)
        for lam in (0.5, 3.0, -1.0):
            _, total, _ = daily_pnl(lam * h, panel.open[:, col], panel.close[:, col])
            assert total == pytest.approx(lam * daily_pnl(h, panel.open[:, col], panel.close[:, col])[1],
                                          rel=1e-12, abs=1e-9)


@pytest.mark.criterion(8, "CPS identity, P&L linearity, look-ahead poisoning on 10 tickers x 100 days")
def test_c8_lookahead_poisoning(acc_run):
    panel, cls, rep = acc_run
    rng = np.random.default_rng(88)
    for k, date in enumerate(rep.dates):
        col = panel.dates.index(date)
        bad = panel.copy()
        n, later = len(bad.tickers), bad.n_days - col - 1
        for name in ("close", "adj_close", "volume"):  # known only after the open of `date`
            getattr(bad, name)[:, col] *= rng.uniform(0.2, 5.0, n)
        for name in ("open", "adj_open", "close", "adj_close", "volume"):
            getattr(bad, name)[:, col + 1:] *= rng.uniform(0.2, 5.0, (n, later))
        poisoned = run_backtest(bad, cls, ACC_CFG)
        assert poisoned.holdings[k][0] == rep.holdings[k][0]
        assert np.array_equal(poisoned.holdings[k][1], rep.holdings[k][1]), date


# --- 9. granularity tendency ----------------------------------------------------

@pytest.mark.slow
@pytest.mark.criterion(9, "fine beats one-bucket ROC on >= 50 synthetic seeds, sign test p < 0.05 (< 5 min)")
def test_c9_granularity_sign_test():
    t0 = time.perf_counter()
    config = BacktestConfig(top_n=200)
    seeds = range(50)
    fine, coarse = [], []
    for seed in seeds:
        panel, labels = synthetic_panel(SyntheticConfig(), seed=9000 + seed)
        reports = {r.label: r for r in horserace(panel, fine_and_coarse(labels), config)}
        fine.append(reports["fine"].roc)
        coarse.append(reports["one-bucket"].roc)
    fine, coarse = np.array(fine), np.array(coarse)
    wins = int(np.sum(fine > coarse))
    ties = int(np.sum(fine == coarse))
    p = binomtest(wins, len(seeds) - ties, 0.5, alternative="greater").pvalue
    print(f"fine ROC {fine.mean():.4f} vs one-bucket {coarse.mean():.4f}; wins {wins}/{len(seeds)}, p = {p:.3g}")
    assert fine.mean() > coarse.mean()
    assert p < 0.05
    assert time.perf_counter() - t0 < 300.0


# --- 10. determinism -------------------------------------------------------------

@pytest.mark.criterion(10, "repeated cmd_backtest with a fixed seed writes byte-identical reports")
def test_c10_determinism(tmp_path):
    overrides = {"run_dir": str(tmp_path), "seed": 10, "synthetic_industries": 5, "synthetic_per_industry": 6,
                 "synthetic_days": 120, "top_n": 30}
    config = load_config(None, overrides, environ={})
    outputs = []
    for run in ("a", "b"):
        panel, classes = synthetic_inputs(config, config.seed)
        cmd_backtest(config, panel, classes, tmp_path / run, svg=True)
        outputs.append({p.name: p.read_bytes() for p in sorted((tmp_path / run).iterdir())})
    assert outputs[0] == outputs[1]
    assert {"report.txt", "report.svg", "pnl.fine.txt", "pnl.one-bucket.txt"} <= set(outputs[0])
