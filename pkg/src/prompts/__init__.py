"""Prompt construction and chat templates."""
