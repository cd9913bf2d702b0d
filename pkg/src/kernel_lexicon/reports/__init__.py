"""Report models, writers and subcommand runners."""
