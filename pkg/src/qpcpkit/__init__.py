"""Local Hamiltonians, stabilizer codes, gap amplification and a product-basis trace protocol."""

__version__ = "0.1.0"
