"""On-disk formats: CSV signals and tables, TVF/FVF video, SNW models."""
