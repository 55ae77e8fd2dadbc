"""Per-ACK EWMA congestion control with carried integer division, next to
per-round DCTCP/Prague baselines, in a deterministic packet simulator."""

__version__ = "0.1.0"
