"""Open SIC industry classification from SEC/OSHA data, plus a horserace
backtest that scores any industry classification through heterotic risk
models."""

__version__ = "0.1.0"
