"""Hooks package for acceptance guards on computed reports."""
