"""Parsing of model output into function calls."""
