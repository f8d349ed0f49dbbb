"""Multi-stage search engine and TREC-style evaluation harness."""

__version__ = "0.1.0"
