"""Synthetic data-warehouse benchmark: schemas, data, OLAP workloads, timing harness."""

__version__ = "0.1.0"
