"""Discrete-event simulator of a CXL.mem SSD memory expander with a DRAM page cache."""

__version__ = "0.1.0"
