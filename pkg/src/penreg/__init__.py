"""Penalized least squares: estimators, exact finite-sample risk, lasso bounds
and Monte Carlo verification."""

__version__ = "0.1.0"
