"""Mining TODO-comment triples from git histories."""

__version__ = "0.1.0"
