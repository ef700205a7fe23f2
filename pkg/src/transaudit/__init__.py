"""Validation toolkit for machine-translated LLM-evaluation benchmark suites."""

__version__ = "0.1.0"
