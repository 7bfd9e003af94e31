"""Synthetic price panels with industry structure and overnight reversal.

Each day t, ticker i in industry k has
  overnight log move  E_it = m_t + g_kt + e_it
  intraday  log move  D_it = m'_t + g'_kt - kappa * e_it + u_it
with independent Gaussian market (m, m'), industry (g, g') and
idiosyncratic (e, u) shocks. Only the idiosyncratic part of the overnight
move reverts, so a mean-reversion alpha -E earns money on it while its
industry and market parts are pure noise that a risk model aware of the
industries can hedge. Adjusted and unadjusted prices coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .backtest import Classification, PricePanel


@dataclass
class SyntheticConfig:
    n_industries: int = 20
    per_industry: int = 10
    n_days: int = 250
    market_vol: float = 0.01
    industry_vol: float = 0.01
    idio_vol: float = 0.01
    intraday_idio_vol: float = 0.01
    kappa: float = 0.3
    start_price: float = 50.0
    volume: float = 5e6
    volume_dispersion: float = 0.2
    start_date: str = "2010-01-04"


def industry_label(k: int) -> str:
    return f"IND{k:03d}"


def ticker_label(k: int, j: int) -> str:
    return f"S{k:03d}{j:03d}"


def synthetic_panel(config: SyntheticConfig | None = None, seed: int = 0) -> tuple[PricePanel, dict[str, str]]:
    """Return (panel, ticker -> industry)."""
    c = config or SyntheticConfig()
    rng = np.random.default_rng(seed)
    k_n, per, T = c.n_industries, c.per_industry, c.n_days
    n = k_n * per
    ind = np.repeat(np.arange(k_n), per)
    tickers = [ticker_label(k, j) for k in range(k_n) for j in range(per)]

    m_on = rng.normal(0, c.market_vol, T)
    m_in = rng.normal(0, c.market_vol, T)
    g_on = rng.normal(0, c.industry_vol, (k_n, T))
    g_in = rng.normal(0, c.industry_vol, (k_n, T))
    e = rng.normal(0, c.idio_vol, (n, T))
    u = rng.normal(0, c.intraday_idio_vol, (n, T))
    overnight = m_on[None, :] + g_on[ind] + e
    intraday = m_in[None, :] + g_in[ind] - c.kappa * e + u
    overnight[:, 0] = 0.0

    log_open = np.empty((n, T))
    log_close = np.empty((n, T))
    prev = np.log(c.start_price) + rng.normal(0, 0.3, n)
    for t in range(T):
        log_open[:, t] = prev + overnight[:, t]
        log_close[:, t] = log_open[:, t] + intraday[:, t]
        prev = log_close[:, t]
    open_px, close_px = np.exp(log_open), np.exp(log_close)
    scale = np.exp(rng.normal(0, c.volume_dispersion, n))
    volume = np.round(c.volume * scale[:, None] * np.exp(rng.normal(0, 0.1, (n, T))))

    dates = [d.strftime("%Y-%m-%d") for d in pd.bdate_range(c.start_date, periods=T)]
    panel = PricePanel(tickers, dates, open_px, close_px, open_px.copy(), close_px.copy(), volume)
    return panel, {t: industry_label(k) for t, k in zip(tickers, ind)}


def fine_and_coarse(assignment: dict[str, str]) -> list[Classification]:
    """The true industries and a single bucket holding every ticker."""
    return [
        Classification("fine", dict(assignment)),
        Classification("one-bucket", {t: "ALL" for t in assignment}),
    ]
