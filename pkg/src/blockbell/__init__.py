"""Block-measurement Bell test simulator and exact analysis toolkit."""

__version__ = "0.1.0"
