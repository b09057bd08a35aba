"""oncograde: tabular three-level lung cancer risk classification toolkit."""

__version__ = "0.1.0"
