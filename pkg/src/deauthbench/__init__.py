"""deauthbench: deterministic testbed for Wi-Fi deauthentication resilience."""

__version__ = "0.1.0"
