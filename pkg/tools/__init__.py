"""Tools and utilities for Optional Doob Core."""
