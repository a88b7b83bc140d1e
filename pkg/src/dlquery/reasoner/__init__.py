"""Tableau reasoner for the supported description-logic fragment."""

from .core import PreModel, Reasoner, ReasonerCounters, category_of

__all__ = ["PreModel", "Reasoner", "ReasonerCounters", "category_of"]
