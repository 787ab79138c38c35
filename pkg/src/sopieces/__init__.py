"""Canonical filtrations and pieces of unipotent elements in orthogonal groups over small finite fields."""

__version__ = "0.1.0"
