"""Walsh sampling and boundary-corrected Daubechies reconstruction."""
__version__ = "0.1.0"
