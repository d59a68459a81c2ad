"""Lost-and-found image matching: CNN classifier + perceptual-hash ranking."""

__version__ = "0.1.0"
