"""Run-configuration models, validation and settings files."""
