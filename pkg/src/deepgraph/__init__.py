"""Network growth prediction from heat-kernel-signature graph descriptors."""
__version__ = "0.1.0"
