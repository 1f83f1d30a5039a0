"""Exact and numerical machinery for CM values of genus-two theta constants and Rosenhain invariants."""
