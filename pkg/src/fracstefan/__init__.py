"""Exact similarity solution of the one-phase fractional Stefan problem."""
