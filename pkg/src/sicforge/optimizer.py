"""Sharpe-ratio maximization under dollar neutrality and position bounds.

    maximize   S(h) = alpha.h / sqrt(h' Gamma h)
    subject to sum(h) = 0,  |h_i| <= b_i,  sum |h_i| = I.

Without binding bounds the optimum is the neutral direction
Gamma^-1 (alpha - mu 1) scaled to gross I. Otherwise, on each sign orthant
s the problem is a ratio of a linear form and a norm over a polytope; the
Charnes-Cooper substitution y = h / (alpha.h) turns it into the convex QP

    minimize y' Gamma y
    subject to alpha.y = 1, 1.y = 0, s_i y_i >= 0, c_i (s.y) - s_i y_i >= 0

with c_i = b_i / I, optimum S = 1 / sqrt(y' Gamma y) and h = y I / (s.y).
The gross constraint makes the feasible set non-convex, so the orthant
matters. Small problems enumerate every orthant with enough bound capacity
(exact). Large ones seed orthants from the unbounded solution, the alpha
ranks and a convex split relaxation (and their mirror images), then
improve the best seeds by sign flips and long/short swaps (a local search:
good in practice, not guaranteed globally optimal).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
import quadprog
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import ConvergenceWarning, ShapeError, ZeroSignal

DEFAULT_EXACT_MAX_N = 10
DEFAULT_MAX_ITER = 100
_FEAS_TOL = 1e-9


@dataclass
class Holdings:
    h: np.ndarray
    investment: float
    sharpe: float
    method: str
    iterations: int = 0
    converged: bool = True


class PreparedRisk:
    """Cholesky factors of a covariance matrix, reusable across days.

    The matrix is rescaled to unit mean diagonal for conditioning; Sharpe
    values are reported in the original units."""

    def __init__(self, gamma: np.ndarray):
        gamma = np.asarray(gamma, dtype=float)
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
            raise ShapeError(f"covariance must be square, got {gamma.shape}")
        self.n = gamma.shape[0]
        self.scale = float(np.mean(np.diag(gamma)))
        if not self.scale > 0:
            raise ShapeError("covariance has non-positive mean diagonal")
        self.gamma = (gamma + gamma.T) / (2 * self.scale)
        self.cho = cho_factor(self.gamma, lower=True)
        lower = np.tril(self.cho[0])
        # quadprog's factorized form wants R^-1 with G = R^T R, R = L^T.
        self.r_inv = solve_triangular(lower.T, np.eye(self.n), lower=False)

    def solve(self, v: np.ndarray) -> np.ndarray:
        return cho_solve(self.cho, v)

    def quad(self, h: np.ndarray) -> float:
        return float(h @ self.gamma @ h)


def sharpe(h: np.ndarray, alpha: np.ndarray, gamma: np.ndarray) -> float:
    return float(alpha @ h / np.sqrt(h @ gamma @ h))


def _capacity(signs: np.ndarray, bounds: np.ndarray) -> float:
    return 2.0 * min(bounds[signs > 0].sum(), bounds[signs < 0].sum())


def _orthant_qp(risk: PreparedRisk, a: np.ndarray, s: np.ndarray, c: np.ndarray):
    """Solve the homogenized QP on orthant s. Returns (y, multipliers) or None."""
    n = len(a)
    cmat = np.empty((n, 2 + 2 * n))
    cmat[:, 0] = a
    cmat[:, 1] = 1.0
    cmat[:, 2 : 2 + n] = np.diag(s)
    cmat[:, 2 + n :] = np.outer(s, c) - np.diag(s)
    rhs = np.zeros(2 + 2 * n)
    rhs[0] = 1.0
    try:
        y, _, _, _, lagr, _ = quadprog.solve_qp(risk.r_inv, np.zeros(n), cmat, rhs, meq=2, factorized=True)
    except ValueError:
        return None
    gross = s @ y
    if gross <= 0 or np.any(cmat[:, 2:].T @ y < -_FEAS_TOL * max(1.0, np.abs(y).max())):
        return None
    return y, lagr[2 : 2 + n]


def _finish(y: np.ndarray, s: np.ndarray, investment: float) -> np.ndarray:
    h = y * investment / (s @ y)
    h[s * h < 0] = 0.0
    return h


def _balance(signs: np.ndarray, bounds: np.ndarray, order: np.ndarray, investment: float) -> np.ndarray:
    """Move names (weakest first, per `order`) from the side with more bound
    capacity to the other until both sides can hold I/2 or no move helps."""
    s = signs.copy()
    while _capacity(s, bounds) < investment:
        long_cap, short_cap = bounds[s > 0].sum(), bounds[s < 0].sum()
        heavy = 1.0 if long_cap >= short_cap else -1.0
        gap = abs(long_cap - short_cap)
        pick = next((i for i in order if s[i] == heavy and bounds[i] < gap), None)
        if pick is None:
            break
        s[pick] = -heavy
    return s


def optimize_holdings(
    expected: np.ndarray,
    gamma: np.ndarray | PreparedRisk,
    bounds: np.ndarray,
    investment: float,
    exact_max_n: int = DEFAULT_EXACT_MAX_N,
    max_iter: int = DEFAULT_MAX_ITER,
) -> Holdings:
    alpha = np.asarray(expected, dtype=float)
    bounds = np.asarray(bounds, dtype=float)
    risk = gamma if isinstance(gamma, PreparedRisk) else PreparedRisk(gamma)
    n = alpha.shape[0]
    if n < 2:
        raise ShapeError("at least 2 names are required")
    if risk.n != n or bounds.shape != (n,):
        raise ShapeError("expected returns, covariance and bounds disagree in size")
    if not np.all(bounds > 0):
        raise ShapeError("position bounds must be positive")
    if not investment > 0:
        raise ShapeError("investment level must be positive")
    if not np.all(np.isfinite(alpha)):
        raise ShapeError("expected returns must be finite")
    spread = np.ptp(alpha)
    if spread <= 1e-14 * max(1.0, np.abs(alpha).max()):
        raise ZeroSignal("expected returns carry no cross-sectional dispersion")

    a = (alpha - alpha.mean()) / spread  # shifting by a constant is invisible under neutrality
    ones = np.ones(n)
    g_a, g_1 = risk.solve(a), risk.solve(ones)
    h0 = g_a - (ones @ g_a) / (ones @ g_1) * g_1
    to_units = spread / np.sqrt(risk.scale)

    h = h0 * investment / np.abs(h0).sum()
    if np.all(np.abs(h) <= bounds * (1 + 1e-12)):
        return Holdings(h, investment, sharpe(h, a, risk.gamma) * to_units, "unbounded")

    c = bounds / investment
    if n <= exact_max_n:
        return _exact(risk, a, bounds, investment, c, to_units)
    return _local(risk, a, bounds, investment, c, h0, to_units, max_iter)


def _exact(risk, a, bounds, investment, c, to_units) -> Holdings:
    n = len(a)
    orthants = [np.array(s, dtype=float) for s in itertools.product((1.0, -1.0), repeat=n)]
    orthants = [s for s in orthants if 0 < (s > 0).sum() < n]
    caps = np.array([_capacity(s, bounds) for s in orthants])
    best = None
    for s, cap in zip(orthants, caps):
        if cap < investment * (1 - 1e-12):
            continue
        sol = _orthant_qp(risk, a, s, c)
        if sol is not None and (best is None or risk.quad(sol[0]) < best[0]):
            best = (risk.quad(sol[0]), sol[0], s)
    inv = investment
    if best is None:
        # Gross I is out of reach: use the largest gross any orthant can hold
        # while still admitting a positive Sharpe ratio.
        for cap in sorted(set(caps.tolist()), reverse=True):
            if cap >= investment * (1 - 1e-12):
                continue
            for s in (o for o, k in zip(orthants, caps) if k == cap):
                sol = _orthant_qp(risk, a, s, bounds / cap)
                if sol is not None and (best is None or risk.quad(sol[0]) < best[0]):
                    best = (risk.quad(sol[0]), sol[0], s)
            if best is not None:
                inv = cap
                warnings.warn(f"bounds cannot hold gross investment {investment:g}; using {inv:g}",
                              ConvergenceWarning, stacklevel=3)
                break
    if best is None:
        raise ZeroSignal("no orthant admits a positive Sharpe ratio")
    h = _finish(best[1], best[2], inv)
    return Holdings(h, inv, sharpe(h, a, risk.gamma) * to_units, "exact", iterations=len(orthants))


def _relaxed_signs(risk: PreparedRisk, a: np.ndarray, c: np.ndarray) -> np.ndarray | None:
    """Signs of the convex split relaxation h = p - n, p, n >= 0, with the
    caps applied to p_i + n_i. Used only to seed the orthant search."""
    n = len(a)
    g = risk.gamma
    big = np.block([[g, -g], [-g, g]]) + 1e-8 * np.eye(2 * n)
    cmat = np.zeros((2 * n, 2 + 3 * n))
    cmat[:, 0] = np.concatenate([a, -a])
    cmat[:, 1] = np.concatenate([np.ones(n), -np.ones(n)])
    cmat[:, 2 : 2 + 2 * n] = np.eye(2 * n)
    caps = np.tile(c, (2 * n, 1))
    caps[np.arange(n), np.arange(n)] -= 1.0
    caps[n + np.arange(n), np.arange(n)] -= 1.0
    cmat[:, 2 + 2 * n :] = caps
    rhs = np.zeros(2 + 3 * n)
    rhs[0] = 1.0
    try:
        x = quadprog.solve_qp(big, np.zeros(2 * n), cmat, rhs, meq=2)[0]
    except ValueError:
        return None
    return np.where(x[:n] - x[n:] >= 0, 1.0, -1.0)


def _search(risk, a, c, s, y, bounds, inv, max_iter, width=20, pair_width=8):
    """Improve an orthant by single sign flips, then long/short pair swaps,
    among the names with the smallest position relative to their cap."""
    q = risk.quad(y)
    for it in range(1, max_iter + 1):
        rel = np.abs(y) / c
        order = np.argsort(rel, kind="stable")
        moves = [(i,) for i in order[:width]]
        longs = [i for i in order if s[i] > 0][:pair_width]
        shorts = [i for i in order if s[i] < 0][:pair_width]
        moves += [(i, j) for i in longs for j in shorts]
        for move in moves:
            t = s.copy()
            t[list(move)] *= -1.0
            if _capacity(t, bounds) < inv * (1 - 1e-12):
                continue
            sol = _orthant_qp(risk, a, t, c)
            if sol is not None and risk.quad(sol[0]) < q * (1 - 1e-10):
                s, y, q = t, sol[0], risk.quad(sol[0])
                break
        else:
            return s, y, it, True
    return s, y, max_iter, False


def _local(risk, a, bounds, investment, c, h0, to_units, max_iter) -> Holdings:
    order = np.argsort(np.abs(h0), kind="stable")
    med = np.median(a)
    raw = [np.where(h0 >= 0, 1.0, -1.0), np.where(a >= med, 1.0, -1.0)]
    relaxed = _relaxed_signs(risk, a, c)
    if relaxed is not None:
        raw.append(relaxed)
    seeds, seen = [], set()
    for s0 in raw + [-s for s in raw]:
        s = _balance(s0, bounds, order, investment)
        key = tuple(s)
        if key not in seen and 0 < (s > 0).sum() < len(s):
            seen.add(key)
            seeds.append(s)
    inv = investment
    best_cap = max(_capacity(s, bounds) for s in seeds)
    if best_cap < investment * (1 - 1e-12):
        inv = best_cap
        warnings.warn(
            f"bounds cannot hold gross investment {investment:g}; using {inv:g}", ConvergenceWarning, stacklevel=3
        )
        c = bounds / inv
    starts = []
    for s in seeds:
        if _capacity(s, bounds) < inv * (1 - 1e-12):
            continue
        sol = _orthant_qp(risk, a, s, c)
        if sol is not None:
            starts.append((risk.quad(sol[0]), s, sol[0]))
    if not starts:
        raise ZeroSignal("no seed orthant admits a positive Sharpe ratio")
    starts.sort(key=lambda t: t[0])
    best = None
    total_it, converged = 0, True
    for _, s, y in starts[:2]:
        s, y, it, ok = _search(risk, a, c, s, y, bounds, inv, max_iter)
        total_it += it
        converged &= ok
        if best is None or risk.quad(y) < risk.quad(best[1]):
            best = (s, y)
    if not converged:
        warnings.warn(f"orthant search hit the iteration cap ({max_iter})", ConvergenceWarning, stacklevel=3)
    h = _finish(best[1], best[0], inv)
    return Holdings(h, inv, sharpe(h, a, risk.gamma) * to_units, "local", iterations=total_it, converged=converged)
