"""Unbounded model checking of SSA integer programs via DimSpec encodings."""

__version__ = "0.1.0"
