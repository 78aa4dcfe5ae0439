"""Operator-series solutions of nonlinear Cauchy problems."""
