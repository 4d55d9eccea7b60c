"""Elastic Born inverse scattering on a periodic grid."""
__version__ = "0.1.0"
