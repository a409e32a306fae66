"""Complex random tensors."""

__version__ = "0.1.0"
