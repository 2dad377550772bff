"""Linear stability toolkit for Schwarzschild and Kerr black holes."""
