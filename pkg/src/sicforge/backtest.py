"""Intraday mean-reversion backtest used to compare industry classifications.

Arrays are stored in calendar order (column 0 oldest). The most-recent-first
index s used in the return definitions maps to column t = T - s.

For each trading day t:
  * overnight return E_t = ln(adj_open_t / adj_close_{t-1}); the alpha is -E_t
    (overnight moves are expected to revert during the day);
  * holdings maximize the Sharpe ratio under dollar neutrality, bounds
    |H_i| <= 0.01 A_it (A = trailing 21-day average dollar volume) and gross I;
  * positions open at the open and close at the close:
    P&L = H (close/open - 1), shares traded Q = 2|H|/open.

The universe (top names by ADDV over the 21 days before each 21-day interval)
and the risk model (close-to-close returns over the lookback before the
interval) are refreshed every interval. Everything used on day t is known
at day t's open.
"""

from __future__ import annotations

import logging
import os
import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Mapping, Sequence

import numpy as np
import pandas as pd

from .errors import InsufficientData, MissingData, ParseError, ZeroSignal
from .matcher import ClassificationMatrix
from .optimizer import PreparedRisk, optimize_holdings
from .riskmodel import ReturnsPanel, add_ridge, assemble_gamma, build_heterotic

log = logging.getLogger(__name__)

TRADING_DAYS = 252
PANEL_COLUMNS = ("open", "close", "adj_open", "adj_close", "volume")
REPORT_HEADER = ("Classification", "ROC", "SR", "CPS")


@dataclass
class PricePanel:
    """N x T price/volume arrays in calendar order; NaN marks missing data."""

    tickers: list[str]
    dates: list[str]
    open: np.ndarray
    close: np.ndarray
    adj_open: np.ndarray
    adj_close: np.ndarray
    volume: np.ndarray

    def __post_init__(self):
        shape = (len(self.tickers), len(self.dates))
        for name in PANEL_COLUMNS:
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ParseError(f"{name} has shape {arr.shape}, expected {shape}")
            setattr(self, name, arr)
        if len(set(self.tickers)) != len(self.tickers):
            raise ParseError("duplicate tickers in price panel")
        if any(a >= b for a, b in zip(self.dates, self.dates[1:])):
            raise ParseError("panel dates must be strictly increasing")

    @property
    def n_days(self) -> int:
        return len(self.dates)

    def t_of(self, s: int) -> int:
        """Column of the s-th most recent date (s = 1 is the last column)."""
        if not 1 <= s <= self.n_days:
            raise IndexError(f"s={s} outside 1..{self.n_days}")
        return self.n_days - s

    def copy(self) -> "PricePanel":
        return PricePanel(list(self.tickers), list(self.dates),
                          *(getattr(self, c).copy() for c in PANEL_COLUMNS))


def _valid(x: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        return np.isfinite(x) & (x > 0)


def _price(panel: PricePanel, field_name: str, i: int, t: int) -> float:
    if t < 0:
        raise MissingData(f"{panel.tickers[i]}: no {field_name} before the first date")
    v = getattr(panel, field_name)[i, t]
    if not (np.isfinite(v) and v > 0):
        raise MissingData(f"{panel.tickers[i]}: missing or nonpositive {field_name} on {panel.dates[t]}")
    return float(v)


def overnight_return(panel: PricePanel, i: int, s: int) -> float:
    """E_is = ln(adj_open(i, s) / adj_close(i, s+1))."""
    t = panel.t_of(s)
    return float(np.log(_price(panel, "adj_open", i, t) / _price(panel, "adj_close", i, t - 1)))


def close_return(panel: PricePanel, i: int, s: int) -> float:
    """R_is = ln(adj_close(i, s) / adj_close(i, s+1))."""
    t = panel.t_of(s)
    return float(np.log(_price(panel, "adj_close", i, t) / _price(panel, "adj_close", i, t - 1)))


def addv(panel: PricePanel, i: int, s: int, m: int = 21) -> float:
    """Mean dollar volume V * close over the m dates strictly before date s."""
    t = panel.t_of(s)
    if t - m < 0:
        raise MissingData(f"{panel.tickers[i]}: fewer than {m} dates before {panel.dates[t]}")
    vol = panel.volume[i, t - m : t]
    close = panel.close[i, t - m : t]
    if not (np.all(np.isfinite(vol)) and np.all(vol >= 0) and np.all(_valid(close))):
        raise MissingData(f"{panel.tickers[i]}: incomplete volume/close window before {panel.dates[t]}")
    return float(np.mean(vol * close))


def overnight_matrix(panel: PricePanel) -> np.ndarray:
    out = np.full(panel.open.shape, np.nan)
    ok = _valid(panel.adj_open[:, 1:]) & _valid(panel.adj_close[:, :-1])
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = np.log(panel.adj_open[:, 1:] / panel.adj_close[:, :-1])
    out[:, 1:] = np.where(ok, vals, np.nan)
    return out


def close_return_matrix(panel: PricePanel) -> np.ndarray:
    out = np.full(panel.close.shape, np.nan)
    ok = _valid(panel.adj_close[:, 1:]) & _valid(panel.adj_close[:, :-1])
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = np.log(panel.adj_close[:, 1:] / panel.adj_close[:, :-1])
    out[:, 1:] = np.where(ok, vals, np.nan)
    return out


def addv_matrix(panel: PricePanel, m: int = 21) -> np.ndarray:
    """A[:, t] = mean of volume*close over columns t-m .. t-1 (NaN if incomplete)."""
    with np.errstate(invalid="ignore"):
        ok = _valid(panel.close) & np.isfinite(panel.volume) & (panel.volume >= 0)
    dv = np.where(ok, panel.volume * panel.close, np.nan)
    out = np.full(dv.shape, np.nan)
    if dv.shape[1] > m:
        windows = np.lib.stride_tricks.sliding_window_view(dv, m, axis=1)[:, :-1]
        out[:, m:] = windows.mean(axis=2)
    return out


@dataclass(frozen=True)
class Interval:
    start: int  # first trading column of the interval
    end: int  # last trading column (inclusive)
    members: tuple[int, ...]  # panel row indices, in panel order


@dataclass
class UniverseSchedule:
    intervals: list[Interval]
    dates: list[str]

    def days(self) -> list[int]:
        return [t for iv in self.intervals for t in range(iv.start, iv.end + 1)]


def select_universe(
    panel: PricePanel,
    top_n: int = 2000,
    interval: int = 21,
    m: int = 21,
    lookback: int = 21,
    n_intervals: int | None = None,
    candidates: Sequence[str] | None = None,
) -> UniverseSchedule:
    """Intervals of `interval` dates ending at the last date; each interval's
    universe is the top_n names by ADDV over the m dates before its first
    date. Names need a complete ADDV window, a complete lookback of returns
    before the interval and the prior close; ADDV ties go to the earlier label."""
    first_ok = max(m, lookback + 1)
    bounds_list = []
    end = panel.n_days - 1
    while end - interval + 1 >= first_ok:
        bounds_list.append((end - interval + 1, end))
        end -= interval
        if n_intervals is not None and len(bounds_list) == n_intervals:
            break
    if n_intervals is not None and len(bounds_list) < n_intervals:
        raise InsufficientData(f"history supports only {len(bounds_list)} intervals, {n_intervals} requested")
    if not bounds_list:
        raise InsufficientData(f"need more than {first_ok + interval - 1} dates for one interval")
    bounds_list.reverse()

    A = addv_matrix(panel, m)
    R = close_return_matrix(panel)
    allowed = np.ones(len(panel.tickers), dtype=bool)
    if candidates is not None:
        keep = set(candidates)
        allowed = np.array([t in keep for t in panel.tickers])
    intervals = []
    for start, stop in bounds_list:
        elig = allowed & np.isfinite(A[:, start]) & (A[:, start] > 0)
        elig &= np.all(np.isfinite(R[:, start - lookback : start]), axis=1)
        idx = np.flatnonzero(elig)
        if len(idx) < top_n:
            if len(idx) < 2:
                raise InsufficientData(f"fewer than 2 eligible names for the interval starting {panel.dates[start]}")
            warnings.warn(f"only {len(idx)} eligible names for the interval starting {panel.dates[start]}", stacklevel=2)
        ranked = sorted(idx, key=lambda i: (-A[i, start], panel.tickers[i]))[:top_n]
        intervals.append(Interval(start, stop, tuple(sorted(ranked))))
    return UniverseSchedule(intervals, list(panel.dates))


def daily_pnl(h: np.ndarray, open_px: np.ndarray, close_px: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
    """Per-name P&L H (close/open - 1), total, and shares traded 2|H|/open."""
    h = np.asarray(h, dtype=float)
    held = h != 0
    if not (np.all(_valid(open_px[held])) and np.all(_valid(close_px[held]))):
        raise MissingData("missing open/close price for a held name")
    pnl = np.zeros_like(h)
    shares = np.zeros_like(h)
    pnl[held] = h[held] * (close_px[held] / open_px[held] - 1.0)
    shares[held] = 2.0 * np.abs(h[held]) / open_px[held]
    return pnl, float(pnl.sum()), shares


@dataclass(frozen=True)
class Metrics:
    roc: float
    sr: float | None
    cps: float | None


def compute_metrics(daily_totals: Sequence[float], daily_shares: Sequence[float], investment: float) -> Metrics:
    pnl = np.asarray(daily_totals, dtype=float)
    if pnl.size < 2:
        raise InsufficientData("at least 2 trading days are needed for metrics")
    mean = float(pnl.mean())
    sd = float(pnl.std(ddof=1))
    sr = mean / sd * np.sqrt(TRADING_DAYS) if sd > 0 else None
    total_shares = float(np.sum(daily_shares))
    cps = 100.0 * float(pnl.sum()) / total_shares if total_shares > 0 else None
    return Metrics(mean / investment * TRADING_DAYS, sr, cps)


@dataclass
class BacktestConfig:
    top_n: int = 2000
    interval: int = 21
    addv_window: int = 21
    lookback: int = 21
    investment: float = 2e7
    bound_fraction: float = 0.01
    add_market: bool = True
    cond_threshold: float = 1e8
    ridge: float = 1e-8
    n_intervals: int | None = None
    exact_max_n: int = 10
    max_iter: int = 100


@dataclass
class Classification:
    label: str
    assignment: dict[str, Hashable]
    level_maps: list[dict] = field(default_factory=list)

    @classmethod
    def from_matrix(cls, label: str, matrix: ClassificationMatrix, level_maps=None) -> "Classification":
        assignment = {}
        for t, lab in zip(matrix.tickers, matrix.assignments()):
            assignment.setdefault(t, lab)
        return cls(label, assignment, list(level_maps or []))


@dataclass
class BacktestReport:
    label: str
    dates: list[str]
    pnl: np.ndarray
    shares: np.ndarray
    metrics: Metrics
    investment: float
    holdings: list[tuple[tuple[str, ...], np.ndarray]]
    skipped: list[str] = field(default_factory=list)
    aborted: list[tuple[str, str]] = field(default_factory=list)

    @property
    def roc(self) -> float:
        return self.metrics.roc

    @property
    def sr(self) -> float | None:
        return self.metrics.sr

    @property
    def cps(self) -> float | None:
        return self.metrics.cps


def run_backtest(panel: PricePanel, classification: Classification, config: BacktestConfig | None = None,
                 schedule: UniverseSchedule | None = None) -> BacktestReport:
    cfg = config or BacktestConfig()
    if schedule is None:
        schedule = select_universe(panel, cfg.top_n, cfg.interval, cfg.addv_window, cfg.lookback,
                                   cfg.n_intervals, candidates=list(classification.assignment))
    E = overnight_matrix(panel)
    R = close_return_matrix(panel)
    A = addv_matrix(panel, cfg.addv_window)
    dates, pnl, shares, holdings, skipped, aborted = [], [], [], [], [], []
    for iv in schedule.intervals:
        members = [i for i in iv.members if panel.tickers[i] in classification.assignment]
        if len(members) < len(iv.members):
            log.warning("%s: %d universe name(s) without an industry dropped", classification.label,
                        len(iv.members) - len(members))
        names = [panel.tickers[i] for i in members]
        window = R[members, iv.start - cfg.lookback : iv.start][:, ::-1]
        returns = ReturnsPanel(names, list(range(cfg.lookback, 0, -1)), window)
        model = build_heterotic(returns, {n: classification.assignment[n] for n in names},
                                classification.level_maps, cfg.add_market, cfg.lookback, cfg.cond_threshold)
        gamma = add_ridge(assemble_gamma(model), cfg.ridge)
        full_risk = PreparedRisk(gamma)
        rows = np.array(members)
        for t in range(iv.start, iv.end + 1):
            date = panel.dates[t]
            e = E[rows, t]
            a_t = A[rows, t]
            live = np.isfinite(e) & _valid(panel.open[rows, t]) & np.isfinite(a_t) & (a_t > 0)
            h = np.zeros(len(rows))
            try:
                if live.sum() < 2:
                    raise ZeroSignal("fewer than 2 tradable names")
                risk = full_risk if live.all() else PreparedRisk(gamma[np.ix_(live, live)])
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    opt = optimize_holdings(-e[live], risk, cfg.bound_fraction * a_t[live], cfg.investment,
                                            cfg.exact_max_n, cfg.max_iter)
                h[live] = opt.h
            except ZeroSignal as exc:
                skipped.append(date)
                log.info("%s %s: skipped (%s)", classification.label, date, exc)
            try:
                _, total, q = daily_pnl(h, panel.open[rows, t], panel.close[rows, t])
                day_shares = float(q.sum())
            except MissingData as exc:
                aborted.append((date, str(exc)))
                log.warning("%s %s: day aborted (%s)", classification.label, date, exc)
                total, day_shares = 0.0, 0.0
            dates.append(date)
            pnl.append(total)
            shares.append(day_shares)
            holdings.append((tuple(names), h))
    metrics = compute_metrics(pnl, shares, cfg.investment)
    return BacktestReport(classification.label, dates, np.array(pnl), np.array(shares), metrics,
                          cfg.investment, holdings, skipped, aborted)


def horserace(panel: PricePanel, classifications: Sequence[Classification],
              config: BacktestConfig | None = None, workers: int = 1) -> list[BacktestReport]:
    """Run identical backtests that differ only in the classification. The
    universe is restricted to names every classification covers. Runs are
    independent, so `workers` > 1 evaluates them in a thread pool; the
    result is ordered by label either way."""
    cfg = config or BacktestConfig()
    if not classifications:
        return []
    common = set(panel.tickers)
    for c in classifications:
        common &= set(c.assignment)
    dropped = len(panel.tickers) - len(common)
    if dropped:
        log.warning("%d panel ticker(s) lack an assignment in at least one classification", dropped)
    schedule = select_universe(panel, cfg.top_n, cfg.interval, cfg.addv_window, cfg.lookback,
                               cfg.n_intervals, candidates=sorted(common))
    if workers > 1 and len(classifications) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda c: run_backtest(panel, c, cfg, schedule), classifications))
    else:
        reports = [run_backtest(panel, c, cfg, schedule) for c in classifications]
    return sorted(reports, key=lambda r: r.label)


_FF_INDUSTRY = re.compile(r"^\s*(\d+)\s+(\S+)\s*(.*?)\s*$")
_FF_RANGE = re.compile(r"^\s*(\d{3,4})\s*-\s*(\d{3,4})\b")


@dataclass(frozen=True)
class SicRange:
    low: int
    high: int
    industry: str


def parse_sic_ranges(text: str) -> list[SicRange]:
    """Parse a SIC-range industry definition file (Fama-French style).

    An industry line starts with its number and short name
    (" 1 Agric  Agriculture"); each following range line holds
    "LLLL-HHHH" plus an optional description. Blank lines are ignored.
    """
    out: list[SicRange] = []
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        rng = _FF_RANGE.match(line)
        if rng:
            if current is None:
                raise ParseError("range before any industry line", row=lineno)
            lo, hi = int(rng.group(1)), int(rng.group(2))
            if lo > hi:
                raise ParseError(f"inverted range {lo}-{hi}", row=lineno)
            out.append(SicRange(lo, hi, current))
            continue
        ind = _FF_INDUSTRY.match(line)
        if not ind:
            raise ParseError(f"unrecognized line {line.strip()!r}", row=lineno)
        current = ind.group(2)
    return out


def classify_by_ranges(sic_assignment: Mapping[str, str], ranges: Sequence[SicRange],
                       default: str | None = None) -> dict[str, str]:
    """Map ticker -> SIC code to ticker -> range industry. Codes outside every
    range go to `default`, or are dropped with a warning when it is None.
    The first matching range wins."""
    out = {}
    unmapped = 0
    for ticker, code in sic_assignment.items():
        value = int(code)
        hit = next((r.industry for r in ranges if r.low <= value <= r.high), default)
        if hit is None:
            unmapped += 1
            continue
        out[ticker] = hit
    if unmapped:
        warnings.warn(f"{unmapped} ticker(s) have SIC codes outside every range", stacklevel=2)
    return out


def sic_classifications(label_prefix: str, matrix: ClassificationMatrix) -> list[Classification]:
    """Industry / Industry Group / Major Group views of a SIC matrix, each
    with its coarsening hierarchy for the risk model nest."""
    from .taxonomy import sic_level_maps

    base = Classification.from_matrix(label_prefix, matrix)
    to_group, to_major = sic_level_maps(sorted(set(base.assignment.values())))
    group = {t: to_group[c] for t, c in base.assignment.items()}
    major = {t: to_major[g] for t, g in group.items()}
    return [
        Classification(f"{label_prefix}.industry", base.assignment, [to_group, to_major]),
        Classification(f"{label_prefix}.group", group, [to_major]),
        Classification(f"{label_prefix}.major", major, []),
    ]


def _fmt(v: float | None, digits: int = 6) -> str:
    return "NA" if v is None else f"{v:.{digits}f}"


def format_report_table(reports: Sequence[BacktestReport]) -> str:
    """ROC in percent, annualized SR, CPS in cents per share."""
    lines = ["\t".join(REPORT_HEADER)]
    for r in reports:
        lines.append("\t".join([r.label, _fmt(100 * r.roc, 4), _fmt(r.sr, 4), _fmt(r.cps, 4)]))
    return "".join(line + "\n" for line in lines)


def format_pnl_series(report: BacktestReport) -> str:
    cum = np.cumsum(report.pnl)
    lines = ["date\tpnl\tshares\tcum_pnl"]
    lines += [f"{d}\t{p:.6f}\t{q:.6f}\t{c:.6f}"
              for d, p, q, c in zip(report.dates, report.pnl, report.shares, cum)]
    return "".join(line + "\n" for line in lines)


def write_reports(reports: Sequence[BacktestReport], directory: str | os.PathLike) -> dict[str, Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    out = {"table": d / "report.txt"}
    out["table"].write_text(format_report_table(reports), encoding="utf-8")
    for r in reports:
        path = d / f"pnl.{_safe(r.label)}.txt"
        path.write_text(format_pnl_series(r), encoding="utf-8")
        out[r.label] = path
    return out


def _safe(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in label)


def read_pnl_series(path: str | os.PathLike) -> tuple[list[str], np.ndarray, np.ndarray]:
    frame = pd.read_csv(path, sep="\t", dtype={"date": str})
    missing = {"date", "pnl", "shares"} - set(frame.columns)
    if missing:
        raise ParseError(f"{path}: missing column(s) {', '.join(sorted(missing))}")
    return frame["date"].tolist(), frame["pnl"].to_numpy(dtype=float), frame["shares"].to_numpy(dtype=float)


def report_from_series(label: str, dates: Sequence[str], pnl: np.ndarray, shares: np.ndarray,
                       investment: float) -> BacktestReport:
    metrics = compute_metrics(pnl, shares, investment)
    return BacktestReport(label, list(dates), np.asarray(pnl), np.asarray(shares), metrics, investment, [])


def read_reports(directory: str | os.PathLike, investment: float) -> list[BacktestReport]:
    """Rebuild reports from the pnl.<label>.txt files of a run directory."""
    out = []
    for path in sorted(Path(directory).glob("pnl.*.txt")):
        label = path.name[len("pnl."):-len(".txt")]
        out.append(report_from_series(label, *read_pnl_series(path), investment))
    if not out:
        raise InsufficientData(f"{directory}: no pnl.*.txt series")
    return sorted(out, key=lambda r: r.label)


def load_price_panel(path: str | os.PathLike) -> PricePanel:
    """Load a long CSV (ticker,date,open,close,adj_open,adj_close,volume) or a
    directory of per-ticker CSVs named <TICKER>.csv with the same columns
    minus `ticker`."""
    path = Path(path)
    if path.is_dir():
        frames = []
        for f in sorted(path.glob("*.csv")):
            df = pd.read_csv(f, dtype={"date": str})
            df["ticker"] = f.stem
            frames.append(df)
        if not frames:
            raise ParseError(f"{path}: no .csv files")
        frame = pd.concat(frames, ignore_index=True)
    else:
        frame = pd.read_csv(path, sep=None, engine="python", dtype={"date": str, "ticker": str})
    frame.columns = [c.strip().lower() for c in frame.columns]
    missing = [c for c in ("ticker", "date", *PANEL_COLUMNS) if c not in frame.columns]
    if missing:
        raise ParseError(f"{path}: missing column(s) {', '.join(missing)}")
    if frame.duplicated(["ticker", "date"]).any():
        raise ParseError(f"{path}: duplicate (ticker, date) rows")
    tickers = sorted(frame["ticker"].astype(str).unique())
    dates = sorted(frame["date"].astype(str).unique())
    arrays = []
    for col in PANEL_COLUMNS:
        wide = frame.pivot(index="ticker", columns="date", values=col).reindex(index=tickers, columns=dates)
        arrays.append(wide.to_numpy(dtype=float))
    return PricePanel(tickers, dates, *arrays)


def write_price_panel(panel: PricePanel, path: str | os.PathLike) -> Path:
    rows = []
    for i, t in enumerate(panel.tickers):
        for j, d in enumerate(panel.dates):
            rows.append([t, d, *(getattr(panel, c)[i, j] for c in PANEL_COLUMNS)])
    frame = pd.DataFrame(rows, columns=["ticker", "date", *PANEL_COLUMNS])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.10g")
    return path


def render_svg(reports: Sequence[BacktestReport], width: int = 720, height: int = 400) -> str:
    """Cumulative P&L lines, one per report, as a standalone SVG document."""
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]
    pad_l, pad_r, pad_t, pad_b = 70, 140, 20, 40
    series = [np.concatenate([[0.0], np.cumsum(r.pnl)]) for r in reports]
    n = max((len(s) for s in series), default=1)
    lo = min((float(s.min()) for s in series), default=0.0)
    hi = max((float(s.max()) for s in series), default=1.0)
    if hi == lo:
        hi, lo = hi + 1.0, lo - 1.0
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def x(k):
        return pad_l + pw * k / max(1, n - 1)

    def y(v):
        return pad_t + ph * (hi - v) / (hi - lo)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad_l}" y1="{pad_t + ph}" x2="{pad_l + pw}" y2="{pad_t + ph}" stroke="black"/>',
        f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{pad_t + ph}" stroke="black"/>',
        f'<text x="{pad_l - 6}" y="{pad_t + 4}" font-size="11" text-anchor="end">{hi:.4g}</text>',
        f'<text x="{pad_l - 6}" y="{pad_t + ph}" font-size="11" text-anchor="end">{lo:.4g}</text>',
        f'<text x="{pad_l + pw / 2:.1f}" y="{height - 10}" font-size="12" text-anchor="middle">trading day</text>',
    ]
    if lo < 0 < hi:
        out.append(f'<line x1="{pad_l}" y1="{y(0):.2f}" x2="{pad_l + pw}" y2="{y(0):.2f}" stroke="#bbbbbb" stroke-dasharray="4 3"/>')
    for k, (r, s) in enumerate(zip(reports, series)):
        color = palette[k % len(palette)]
        pts = " ".join(f"{x(j):.2f},{y(v):.2f}" for j, v in enumerate(s))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = pad_t + 16 * (k + 1)
        out.append(f'<line x1="{pad_l + pw + 10}" y1="{ly - 4}" x2="{pad_l + pw + 30}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        label = r.label.replace("&", "&amp;").replace("<", "&lt;")
        out.append(f'<text x="{pad_l + pw + 36}" y="{ly}" font-size="12">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
