"""Dataset ingestion, metrics and reports."""
