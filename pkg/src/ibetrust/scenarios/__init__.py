"""Bundled simulation scenarios, loadable by name."""
