"""Fine-tuning data export."""
