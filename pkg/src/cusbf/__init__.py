"""Correlation-based user scheduling and beamforming for massive MIMO."""
