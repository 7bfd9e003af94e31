import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import correlation_direct
from sicforge.errors import DegenerateModel, InsufficientData, ParseError, PartitionError, ShapeError
from sicforge.matcher import ClassificationMatrix
from sicforge.riskmodel import (
    Cluster, ReturnsPanel, add_ridge, assemble_gamma, build_heterotic, factor_returns, first_pc,
    first_pc_with_value, load_returns_panel, sample_correlation, RiskModel,
)


def block_panel(rng, n_ind, per, t, noise=0.5):
    f = rng.normal(size=(n_ind, t))
    x = np.repeat(f, per, axis=0) + noise * rng.normal(size=(n_ind * per, t))
    tickers = [f"T{i}" for i in range(n_ind * per)]
    labels = {tk: f"I{i // per}" for i, tk in enumerate(tickers)}
    return ReturnsPanel(tickers, list(range(t, 0, -1)), 0.01 * x), labels


def test_sample_correlation_examples():
    a = np.array([[1.0, 2, 3, 5], [1.0, 2, 3, 5]])
    assert np.allclose(sample_correlation(a), 1)
    b = np.array([[1.0, 2, 3, 5], [-1.0, -2, -3, -5]])
    assert sample_correlation(b)[0, 1] == pytest.approx(-1)
    with pytest.raises(InsufficientData):
        sample_correlation(np.ones((2, 1)))


def test_sample_correlation_matches_direct_formula():
    x = np.random.default_rng(0).normal(size=(3, 21))
    assert np.max(np.abs(sample_correlation(x) - correlation_direct(x))) < 1e-12


def test_zero_variance_rows():
    x = np.array([[1.0, 1, 1, 1], [1.0, 2, 4, 3], [2.0, 1, 0, 5]])
    c = sample_correlation(x)
    assert c[0].tolist() == [1, 0, 0] and c[1, 1] == 1


@pytest.mark.parametrize("c, w", [([[1.0]], [1.0]), ([[1.0, 1.0], [1.0, 1.0]], [2 ** -0.5, 2 ** -0.5])])
def test_first_pc_examples(c, w):
    assert np.allclose(first_pc(np.array(c)), w)


def test_first_pc_sign_and_eigen_equation():
    rng = np.random.default_rng(1)
    c = sample_correlation(rng.normal(size=(5, 30)))
    w, lam = first_pc_with_value(c)
    assert np.allclose(c @ w, lam * w, atol=1e-10)
    assert w.sum() >= 0 and np.linalg.norm(w) == pytest.approx(1)
    assert np.allclose(first_pc(c), w)


def test_first_pc_zero_sum_tie_break():
    c = np.array([[1.0, -0.9], [-0.9, 1.0]])
    w = first_pc(c)
    assert w[0] > 0 and w.sum() == pytest.approx(0, abs=1e-12)


def test_first_pc_rejects_non_symmetric():
    with pytest.raises(ShapeError):
        first_pc(np.array([[1.0, 0.5], [0.1, 1.0]]))
    with pytest.raises(ShapeError):
        first_pc(np.ones((2, 3)))


def test_factor_returns():
    x = np.random.default_rng(2).normal(size=(3, 5))
    singles = [Cluster(i, (i,), np.array([1.0])) for i in range(3)]
    assert np.allclose(factor_returns(x, singles), x)
    pair = [Cluster("a", (0, 1), np.array([2 ** -0.5, 2 ** -0.5])), Cluster("b", (2,), np.array([1.0]))]
    assert np.allclose(factor_returns(x, pair)[0], (x[0] + x[1]) / np.sqrt(2))
    with pytest.raises(PartitionError):
        factor_returns(x, pair[:1])
    with pytest.raises(PartitionError):
        factor_returns(x, pair + [Cluster("c", (0,), np.array([1.0]))])


def test_factor_returns_fixture_three_clusters():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(6, 8))
    clusters = [Cluster("a", (0, 3), rng.normal(size=2)), Cluster("b", (1, 4, 5), rng.normal(size=3)),
                Cluster("c", (2,), np.array([0.5]))]
    out = factor_returns(x, clusters)
    for k, cl in enumerate(clusters):
        brute = [sum(cl.weights[j] * x[m, t] for j, m in enumerate(cl.members)) for t in range(8)]
        assert np.allclose(out[k], brute)


def test_two_industries_plus_market():
    panel, labels = block_panel(np.random.default_rng(4), 2, 2, 60)
    model = build_heterotic(panel, labels, lookback=60)
    assert model.level_sizes == [2, 1] and model.n_factors == 3
    g = model.gamma()
    assert np.allclose(g, g.T, atol=1e-14) and np.linalg.eigvalsh(g).min() > 0
    assert np.all(model.specific >= 0)


def test_single_industry_collapses():
    panel, _ = block_panel(np.random.default_rng(5), 1, 4, 30)
    model = build_heterotic(panel, {t: "ONLY" for t in panel.tickers}, lookback=30)
    assert model.level_sizes == [1] and model.n_factors == 1


def test_many_industries_short_lookback_ascends():
    panel, labels = block_panel(np.random.default_rng(6), 30, 2, 21)
    model = build_heterotic(panel, labels, lookback=21, add_market=False)
    assert model.level_sizes[0] == 30 and len(model.level_sizes) >= 2
    hier = {f"I{i}": f"G{i // 10}" for i in range(30)}
    model2 = build_heterotic(panel, labels, [hier], lookback=21)
    assert model2.level_sizes == [30, 3, 1]


def test_classification_matrix_input_and_missing_ticker():
    panel, labels = block_panel(np.random.default_rng(7), 2, 3, 40)
    m = ClassificationMatrix.from_assignments(list(labels), list(labels.values()))
    a = build_heterotic(panel, m, lookback=40).gamma()
    b = build_heterotic(panel, labels, lookback=40).gamma()
    assert np.allclose(a, b)
    del labels["T0"]
    with pytest.raises(PartitionError):
        build_heterotic(panel, labels, lookback=40)


def test_degenerate_market():
    panel = ReturnsPanel(["A", "B"], [2, 1], np.zeros((2, 2)) + 0.0)
    with pytest.raises(DegenerateModel):
        build_heterotic(panel, {"A": "x", "B": "x"}, lookback=2)


def test_assemble_gamma_examples():
    z = RiskModel(["a", "b"], np.zeros((2, 1)), np.eye(1), np.array([1.0, 2.0]))
    assert np.allclose(assemble_gamma(z), np.diag([1.0, 2.0]))
    i = RiskModel(["a", "b"], np.eye(2), np.eye(2), np.zeros(2))
    assert np.allclose(assemble_gamma(i), np.eye(2))
    assert np.allclose(add_ridge(np.diag([1.0, 3.0]), 0.5), np.diag([2.0, 4.0]))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 10.0))
def test_homogeneity(seed, lam):
    panel, labels = block_panel(np.random.default_rng(seed), 3, 3, 40)
    g = build_heterotic(panel, labels, lookback=40).gamma()
    scaled = ReturnsPanel(panel.tickers, panel.dates, lam * panel.values)
    assert np.allclose(build_heterotic(scaled, labels, lookback=40).gamma(), lam ** 2 * g, rtol=1e-9, atol=0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 6), st.integers(1, 5))
def test_psd_and_variance_floor(seed, n_ind, per):
    panel, labels = block_panel(np.random.default_rng(seed), n_ind, per, 21)
    model = build_heterotic(panel, labels, lookback=21)
    g = model.gamma()
    assert np.linalg.eigvalsh(g).min() >= -1e-12 * np.abs(g).max()
    assert np.all(model.specific >= 0)
    assert all(a >= b for a, b in zip(model.level_sizes, model.level_sizes[1:]))
    assert len(model.level_sizes) <= 4


def test_returns_panel_validation():
    with pytest.raises(ShapeError):
        ReturnsPanel(["a"], ["d1", "d2"], np.zeros((2, 2)))
    with pytest.raises(ParseError):
        ReturnsPanel(["a"], ["2020-01-01", "2020-01-02"], np.zeros((1, 2)))
    with pytest.raises(ParseError):
        ReturnsPanel(["a"], ["d2", "d1"], np.array([[np.nan, 0.0]]))
    with pytest.raises(InsufficientData):
        ReturnsPanel(["a"], ["d2", "d1"], np.zeros((1, 2))).recent(3)


def test_load_returns_panel(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("ticker,2020-01-01,2020-01-02\nA,0.1,0.2\nB,0.3,0.4\n")
    panel = load_returns_panel(p)
    assert panel.dates == ["2020-01-02", "2020-01-01"] and panel.values.tolist() == [[0.2, 0.1], [0.4, 0.3]]
    q = tmp_path / "t.tsv"
    q.write_text("date\tA\tB\n2020-01-01\t0.1\t0.3\n2020-01-02\t0.2\t0.4\n")
    assert load_returns_panel(q, "dates-by-tickers").values.tolist() == panel.values.tolist()
