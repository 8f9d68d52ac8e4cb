"""phi-MaxCoverage solver."""
