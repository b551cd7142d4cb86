"""Configuration, scenarios, persistence, sweeps and the command line."""
