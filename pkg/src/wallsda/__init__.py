"""Physics-derived wall state-space models with subspace-alignment forecasting."""

__version__ = "0.1.0"
