"""Principal curvature estimates on discrete nets of curvature lines."""

__version__ = "0.1.0"
