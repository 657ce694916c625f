"""Schemas, dialogue state and the tracking pipeline."""
