"""Command line, config parsing, checkpoints and report emission."""
