"""Package modularity assessment with co-change clusters mined from version history."""

__version__ = "0.1.0"
