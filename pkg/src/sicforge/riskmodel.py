"""Heterotic risk model: a factor covariance built from industry clusters.

For every cluster the first principal component U of the members' sample
correlation matrix is the weight vector of the cluster factor

    f = sum_i U_i R_i / sigma_i,

whose sample variance equals the top eigenvalue lambda. Regressing each
member's standardized return on f gives loading sigma_i U_i and specific
variance sigma_i^2 (1 - lambda U_i^2), floored at zero.

When the factor covariance is singular or ill-conditioned (typical when
there are more clusters than observations) the factors themselves are
treated as the items of the next, coarser grouping and the same step is
repeated, each level nested inside the next, up to a single market factor.
Flattening the nest gives an ordinary factor model

    Gamma = L F L^T + diag(d),   L = [Om1, Om1 Om2, ...],
    F = blockdiag(D1, D2, ..., Phi_top),

where Om_k are the level-k loadings and D_k the specific variances of the
level-k factors.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np
import pandas as pd
from scipy.linalg import block_diag

from .errors import DegenerateModel, InsufficientData, ParseError, PartitionError, ShapeError
from .matcher import ClassificationMatrix

DEFAULT_LOOKBACK = 21
DEFAULT_COND_THRESHOLD = 1e8
DEFAULT_RIDGE = 1e-8
MARKET = "MARKET"


@dataclass
class ReturnsPanel:
    """N x T returns; column 0 is the most recent date."""

    tickers: list[str]
    dates: list
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.tickers), len(self.dates)):
            raise ShapeError(f"values shape {self.values.shape} vs {len(self.tickers)} tickers x {len(self.dates)} dates")
        if not np.all(np.isfinite(self.values)):
            raise ParseError("returns panel contains non-finite values")
        try:
            ordered = all(a > b for a, b in zip(self.dates, self.dates[1:]))
        except TypeError:
            ordered = True
        if not ordered:
            raise ParseError("panel dates must be strictly decreasing (most recent first)")

    def recent(self, lookback: int) -> np.ndarray:
        if lookback > self.values.shape[1]:
            raise InsufficientData(f"lookback {lookback} exceeds {self.values.shape[1]} observations")
        return self.values[:, :lookback]


@dataclass(frozen=True)
class Cluster:
    label: Hashable
    members: tuple[int, ...]
    weights: np.ndarray
    eigenvalue: float = float("nan")


@dataclass
class RiskModel:
    tickers: list[str]
    loadings: np.ndarray
    factor_cov: np.ndarray
    specific: np.ndarray
    level_sizes: list[int] = field(default_factory=list)

    @property
    def n_factors(self) -> int:
        return self.loadings.shape[1]

    def gamma(self) -> np.ndarray:
        return assemble_gamma(self)


def _std(x: np.ndarray) -> np.ndarray:
    return x.std(axis=1, ddof=1)


def sample_correlation(x: np.ndarray) -> np.ndarray:
    """Sample correlation of the rows of `x` (members x observations).

    A zero-variance row gets 1 on the diagonal and 0 elsewhere."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] < 2:
        raise InsufficientData("at least 2 observations are needed for a correlation")
    d = x - x.mean(axis=1, keepdims=True)
    ss = np.sqrt((d * d).sum(axis=1))
    live = ss > 0
    z = np.zeros_like(d)
    z[live] = d[live] / ss[live, None]
    c = z @ z.T
    np.clip(c, -1.0, 1.0, out=c)
    np.fill_diagonal(c, 1.0)
    return (c + c.T) / 2


def _check_symmetric(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {c.shape}")
    scale = max(1.0, float(np.abs(c).max(initial=0.0)))
    if not np.allclose(c, c.T, rtol=0, atol=1e-12 * scale):
        raise ShapeError("matrix is not symmetric")
    return c


def _orient(w: np.ndarray) -> np.ndarray:
    s = w.sum()
    if abs(s) > 1e-12 * max(1.0, np.abs(w).sum()):
        return w if s > 0 else -w
    nz = np.flatnonzero(np.abs(w) > 1e-15)
    return w if nz.size == 0 or w[nz[0]] > 0 else -w


def first_pc_with_value(c: np.ndarray) -> tuple[np.ndarray, float]:
    c = _check_symmetric(c)
    vals, vecs = np.linalg.eigh(c)
    w = vecs[:, -1]
    w = _orient(w / np.linalg.norm(w))
    return w, float(vals[-1])


def first_pc(c: np.ndarray) -> np.ndarray:
    """Unit eigenvector of the largest eigenvalue, oriented so its sum is
    non-negative (first nonzero component positive when the sum is zero)."""
    return first_pc_with_value(c)[0]


def _check_partition(clusters: Sequence[Cluster], n: int) -> None:
    seen = np.zeros(n, dtype=int)
    for cl in clusters:
        if len(cl.members) != len(cl.weights):
            raise PartitionError(f"cluster {cl.label!r}: {len(cl.members)} members but {len(cl.weights)} weights")
        for m in cl.members:
            if not 0 <= m < n:
                raise PartitionError(f"cluster {cl.label!r}: member index {m} out of range")
            seen[m] += 1
    if not np.all(seen == 1):
        raise PartitionError("clusters must cover every ticker exactly once")


def factor_returns(panel: ReturnsPanel | np.ndarray, clusters: Sequence[Cluster]) -> np.ndarray:
    """F x T panel: row f is sum over members of weight_i * R_i."""
    values = panel.values if isinstance(panel, ReturnsPanel) else np.asarray(panel, dtype=float)
    _check_partition(clusters, values.shape[0])
    out = np.empty((len(clusters), values.shape[1]))
    for k, cl in enumerate(clusters):
        out[k] = np.asarray(cl.weights) @ values[list(cl.members)]
    return out


def clusters_from_labels(labels: Sequence[Hashable]) -> list[list[int]]:
    """Member index lists, clusters in first-seen label order."""
    groups: dict[Hashable, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    return list(groups.values()), list(groups)


@dataclass
class _Level:
    loadings: np.ndarray  # items x factors
    specific: np.ndarray  # items
    factors: np.ndarray  # factors x T
    labels: list


def _embed(x: np.ndarray, labels: Sequence[Hashable]) -> _Level:
    """One nesting step: cluster the items (rows of x) by label."""
    sigma = _std(x)
    live = sigma > 0
    z = np.zeros_like(x)
    z[live] = x[live] / sigma[live, None]
    members, names = clusters_from_labels(labels)
    loadings = np.zeros((x.shape[0], len(members)))
    specific = np.zeros(x.shape[0])
    factors = np.empty((len(members), x.shape[1]))
    for k, idx in enumerate(members):
        u, lam = first_pc_with_value(sample_correlation(x[idx]))
        factors[k] = u @ z[idx]
        loadings[idx, k] = sigma[idx] * u
        specific[idx] = np.maximum(0.0, sigma[idx] ** 2 * (1.0 - lam * u * u))
    return _Level(loadings, specific, factors, names)


def _ill_conditioned(cov: np.ndarray, threshold: float) -> bool:
    vals = np.linalg.eigvalsh((cov + cov.T) / 2)
    return vals[0] <= 0 or vals[-1] / vals[0] >= threshold


def _cov(x: np.ndarray) -> np.ndarray:
    return np.atleast_2d(np.cov(x, ddof=1))


def build_heterotic(
    panel: ReturnsPanel,
    ind: ClassificationMatrix | Mapping[str, Hashable],
    level_maps: Sequence[Mapping[Hashable, Hashable]] | None = None,
    add_market: bool = True,
    lookback: int = DEFAULT_LOOKBACK,
    cond_threshold: float = DEFAULT_COND_THRESHOLD,
) -> RiskModel:
    """Build the nested model from the most recent `lookback` observations.

    `ind` assigns each panel ticker to an industry (a classification matrix
    or a ticker -> label mapping). `level_maps` are successive coarsening
    maps (industry label -> coarser label, ...). The nest ascends while the
    current factor covariance is ill-conditioned; if `add_market`, a single
    market factor always caps the nest.
    """
    if lookback < 2:
        raise InsufficientData("lookback must be at least 2")
    x = panel.recent(lookback)
    if isinstance(ind, ClassificationMatrix):
        assignment = dict(zip(ind.tickers, ind.assignments()))
    else:
        assignment = dict(ind)
    missing = [t for t in panel.tickers if t not in assignment]
    if missing:
        raise PartitionError(f"{len(missing)} panel ticker(s) missing from the classification, e.g. {missing[0]}")
    labels = [assignment[t] for t in panel.tickers]
    maps = list(level_maps or [])

    levels = [_embed(x, labels)]
    step = 0
    while True:
        top = levels[-1]
        k = top.factors.shape[0]
        if k == 1:
            break
        well = not _ill_conditioned(_cov(top.factors), cond_threshold)
        if well and not add_market:
            break
        if well or step >= len(maps):
            coarse = [MARKET] * k
        else:
            try:
                coarse = [maps[step][lab] for lab in top.labels]
            except KeyError as exc:
                raise PartitionError(f"level map {step} has no entry for {exc.args[0]!r}") from None
            step += 1
        levels.append(_embed(top.factors, coarse))

    phi = _cov(levels[-1].factors)
    if levels[-1].factors.shape[0] == 1 and not phi[0, 0] > 0:
        raise DegenerateModel("market factor has zero variance; no nonsingular level reachable")
    if _ill_conditioned(phi, cond_threshold) and phi.shape[0] > 1:
        raise DegenerateModel("factor covariance is singular at the top level")

    blocks, cols = [], []
    chain = np.eye(x.shape[0])
    for lvl in levels:
        chain = chain @ lvl.loadings
        cols.append(chain)
    for lvl in levels[1:]:
        blocks.append(np.diag(lvl.specific))
    blocks.append(phi)
    return RiskModel(
        tickers=list(panel.tickers),
        loadings=np.hstack(cols),
        factor_cov=block_diag(*blocks),
        specific=levels[0].specific,
        level_sizes=[lvl.factors.shape[0] for lvl in levels],
    )


def assemble_gamma(model: RiskModel) -> np.ndarray:
    g = model.loadings @ model.factor_cov @ model.loadings.T + np.diag(model.specific)
    return (g + g.T) / 2


def add_ridge(gamma: np.ndarray, ridge: float = DEFAULT_RIDGE) -> np.ndarray:
    """Gamma + ridge * mean(diag) * I, used before inversion."""
    return gamma + ridge * float(np.mean(np.diag(gamma))) * np.eye(gamma.shape[0])


def load_returns_panel(path: str | os.PathLike, orientation: str = "tickers-by-dates") -> ReturnsPanel:
    """Read a delimited (tab or comma) returns matrix with labels.

    orientation "tickers-by-dates": ticker rows, date columns;
    "dates-by-tickers": the transpose. Dates are reordered most recent first.
    """
    frame = pd.read_csv(path, sep=None, engine="python", index_col=0)
    if orientation == "dates-by-tickers":
        frame = frame.T
    elif orientation != "tickers-by-dates":
        raise ValueError(f"unknown orientation {orientation!r}")
    frame = frame[sorted(frame.columns, key=str, reverse=True)]
    return ReturnsPanel([str(t) for t in frame.index], [str(d) for d in frame.columns], frame.to_numpy(dtype=float))
