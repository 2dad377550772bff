"""Numerical engines shared by the toolkit modules."""
