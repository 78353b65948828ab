"""Forward compositions of finite Blaschke products and shrinking targets."""

__version__ = "0.1.0"
