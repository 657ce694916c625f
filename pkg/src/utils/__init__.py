"""Filesystem, JSON-lines and hashing helpers."""
