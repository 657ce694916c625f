"""Zero-shot dialogue state tracking through function calling."""
