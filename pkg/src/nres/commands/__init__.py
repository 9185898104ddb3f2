"""CLI commands for nres."""
