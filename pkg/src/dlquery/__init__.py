"""Axiom-template query answering over description-logic ontologies."""
