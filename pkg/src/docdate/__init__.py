"""Document dating from tokens, dependency parses and temporal event graphs."""

__version__ = "0.1.0"
