"""Region-based document image classification with layered weight transfer and stacking."""

__version__ = "0.1.0"
